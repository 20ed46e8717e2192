//! Iterative radix-2 FFT over any [`Scalar`].
//!
//! Generic so that the same transform differentiates cleanly under [`Dual`]
//! arithmetic; twiddles are plain `f64` constants.
//!
//! [`Dual`]: crate::scalar::Dual

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cmul_const, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = Σ_j x_j e^{-2πi jk/N}`
    Forward,
    /// `x_j = Σ_k X_k e^{+2πi jk/N}` (unnormalized)
    Inverse,
}

pub fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

fn twiddles(n: usize, dir: Direction) -> Vec<Complex<f64>> {
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    (0..n / 2)
        .map(|k| {
            let (s, c) = libm::sincos(2.0 * PI * k as f64 / n as f64);
            Complex::new(c, sign * s)
        })
        .collect()
}

/// In-place transform; `data.len()` must be a power of two.
pub fn fft_in_place<S: Scalar>(data: &mut [Complex<S>], dir: Direction) -> Result<()> {
    let n = data.len();
    check_pow2(n)?;
    if n == 1 {
        return Ok(());
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }

    let tw = twiddles(n, dir);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = cmul_const(data[start + k + half], tw[k * stride]);
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

pub fn fft<S: Scalar>(data: &[Complex<S>], dir: Direction) -> Result<Vec<Complex<S>>> {
    let mut out = data.to_vec();
    fft_in_place(&mut out, dir)?;
    Ok(out)
}

/// Forward transform of real samples.
pub fn fft_real<S: Scalar>(data: &[S]) -> Result<Vec<Complex<S>>> {
    let mut out: Vec<Complex<S>> = data.iter().map(|&v| Complex::new(v, S::zero())).collect();
    fft_in_place(&mut out, Direction::Forward)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .fold(Complex::new(0.0, 0.0), |acc, (j, &v)| {
                        let (s, c) = libm::sincos(-2.0 * PI * (j * k) as f64 / n as f64);
                        acc + v * Complex::new(c, s)
                    })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex<f64>> = (0..32)
            .map(|j| {
                Complex::new(
                    libm::sin(j as f64 * 0.37) + 0.1 * j as f64,
                    libm::cos(j as f64),
                )
            })
            .collect();
        let fast = fft(&x, Direction::Forward).unwrap();
        let slow = naive_dft(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let x: Vec<Complex<f64>> = (0..64)
            .map(|j| Complex::new(j as f64, -(j as f64) * 0.5))
            .collect();
        let y = fft(&fft(&x, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b / 64.0).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let mut x = alloc::vec![Complex::new(0.0f64, 0.0); 12];
        assert_eq!(
            fft_in_place(&mut x, Direction::Forward),
            Err(Error::NotPowerOfTwo(12))
        );
    }
}
