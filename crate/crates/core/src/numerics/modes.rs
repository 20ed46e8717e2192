//! Mode ↔ grid transforms and trigonometric interpolation.
//!
//! Grids are uniform on `[0, 2π)` with `σ_j = 2πj/N`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;

use super::fft::{check_pow2, fft_in_place, fft_real, Direction};
use crate::error::{Error, Result};
use crate::scalar::{cis, cscale, Scalar};

/// Sign of the exponent a mode vector is expanded against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `f(σ) = Σ c_m e^{+imσ}`
    Positive,
    /// `f(σ) = Σ c_m e^{-imσ}`
    Negative,
}

impl Orientation {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

#[inline]
pub fn sigma(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// Coefficients `c_m` for `|m| ≤ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector<S = f64> {
    k: usize,
    orientation: Orientation,
    coeffs: Vec<Complex<S>>,
}

impl<S: Scalar> ModeVector<S> {
    pub fn zeros(k: usize, orientation: Orientation) -> Self {
        Self {
            k,
            orientation,
            coeffs: vec![Complex::zero(); 2 * k + 1],
        }
    }

    pub fn from_fn(
        k: usize,
        orientation: Orientation,
        mut f: impl FnMut(i64) -> Complex<S>,
    ) -> Self {
        let coeffs = (-(k as i64)..=k as i64).map(&mut f).collect();
        Self {
            k,
            orientation,
            coeffs,
        }
    }

    /// Builds a real-valued mode vector from `c_0` and `c_1..c_K`;
    /// negative modes are the conjugates.
    pub fn real_from_positive(orientation: Orientation, c0: S, positive: &[Complex<S>]) -> Self {
        let k = positive.len();
        Self::from_fn(k, orientation, |m| match m {
            0 => Complex::new(c0, S::zero()),
            m if m > 0 => positive[m as usize - 1],
            m => positive[(-m) as usize - 1].conj(),
        })
    }

    #[inline]
    pub fn max_mode(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    #[inline]
    pub fn get(&self, m: i64) -> Complex<S> {
        if m.unsigned_abs() as usize > self.k {
            return Complex::zero();
        }
        self.coeffs[(m + self.k as i64) as usize]
    }

    #[inline]
    pub fn set(&mut self, m: i64, c: Complex<S>) {
        self.coeffs[(m + self.k as i64) as usize] = c;
    }

    pub fn coeffs(&self) -> &[Complex<S>] {
        &self.coeffs
    }

    /// Largest `|c_m − conj(c_{−m})|`.
    pub fn conjugation_defect(&self) -> f64 {
        (1..=self.k as i64)
            .map(|m| {
                let d = self.get(m) - self.get(-m).conj();
                libm::hypot(d.re.value(), d.im.value())
            })
            .fold(0.0, f64::max)
    }
}

/// Exact evaluation of the trigonometric polynomial on the `N`-grid,
/// returning complex samples.
pub fn modes_to_grid_complex<S: Scalar>(
    modes: &ModeVector<S>,
    n: usize,
) -> Result<Vec<Complex<S>>> {
    check_pow2(n)?;
    let k = modes.max_mode();
    if n < 2 * k + 2 {
        return Err(Error::GridTooSmall {
            n,
            required: 2 * k + 2,
        });
    }
    let mut buf = vec![Complex::zero(); n];
    for m in -(k as i64)..=k as i64 {
        let bin = match modes.orientation() {
            Orientation::Positive => m,
            Orientation::Negative => -m,
        }
        .rem_euclid(n as i64) as usize;
        buf[bin] = modes.get(m);
    }
    fft_in_place(&mut buf, Direction::Inverse)?;
    Ok(buf)
}

/// Real part of [`modes_to_grid_complex`].
pub fn modes_to_grid<S: Scalar>(modes: &ModeVector<S>, n: usize) -> Result<Vec<S>> {
    Ok(modes_to_grid_complex(modes, n)?
        .into_iter()
        .map(|z| z.re)
        .collect())
}

/// `c_m = (1/N) Σ_j f_j e^{∓imσ_j}` for `|m| ≤ K`.
pub fn grid_to_modes<S: Scalar>(
    grid: &[S],
    k: usize,
    orientation: Orientation,
) -> Result<ModeVector<S>> {
    let n = grid.len();
    check_pow2(n)?;
    if 2 * k + 2 > n {
        return Err(Error::GridTooSmall {
            n,
            required: 2 * k + 2,
        });
    }
    let spec = fft_real(grid)?;
    let inv = 1.0 / n as f64;
    Ok(ModeVector::from_fn(k, orientation, |m| {
        let bin = match orientation {
            Orientation::Positive => m,
            Orientation::Negative => -m,
        }
        .rem_euclid(n as i64) as usize;
        cscale(spec[bin], inv)
    }))
}

/// Spectral derivative of a periodic real grid (Nyquist bin dropped).
pub fn spectral_derivative<S: Scalar>(grid: &[S]) -> Result<Vec<S>> {
    let n = grid.len();
    let mut spec = fft_real(grid)?;
    let half = (n / 2) as i64;
    for (bin, c) in spec.iter_mut().enumerate() {
        let m = if (bin as i64) < half {
            bin as i64
        } else {
            bin as i64 - n as i64
        };
        if m == -half {
            *c = Complex::zero();
        } else {
            // multiply by i·m / N
            let f = m as f64 / n as f64;
            *c = Complex::new(-c.im.scale(f), c.re.scale(f));
        }
    }
    fft_in_place(&mut spec, Direction::Inverse)?;
    Ok(spec.into_iter().map(|z| z.re).collect())
}

/// Band-limited interpolant of a real periodic grid,
/// `f(s) = c_0 + 2 Re Σ_{m≥1} c_m e^{ims}`.
#[derive(Debug, Clone)]
pub struct TrigInterpolant<S = f64> {
    coeffs: Vec<Complex<S>>,
}

impl<S: Scalar> TrigInterpolant<S> {
    /// Fourier modes below `1e-15 × max` are dropped, which keeps evaluation
    /// cheap for band-limited data.
    pub fn new(grid: &[S]) -> Result<Self> {
        let n = grid.len();
        let spec = fft_real(grid)?;
        let inv = 1.0 / n as f64;
        let kmax = n / 2 - 1;
        let mut coeffs: Vec<Complex<S>> = spec[..=kmax].iter().map(|&c| cscale(c, inv)).collect();
        let scale = coeffs
            .iter()
            .map(|c| c.re.magnitude().max(c.im.magnitude()))
            .fold(0.0, f64::max);
        let floor = 1e-15 * scale;
        let keep = coeffs
            .iter()
            .rposition(|c| c.re.magnitude().max(c.im.magnitude()) > floor)
            .unwrap_or(0);
        coeffs.truncate(keep + 1);
        Ok(Self { coeffs })
    }

    pub fn from_coeffs(coeffs: Vec<Complex<S>>) -> Self {
        Self { coeffs }
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Primal-only copy, for root finding.
    pub fn values(&self) -> TrigInterpolant<f64> {
        TrigInterpolant {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex::new(c.re.value(), c.im.value()))
                .collect(),
        }
    }

    pub fn eval(&self, s: S) -> S {
        self.eval_with_derivative(s).0
    }

    /// Value and first derivative at `s`.
    pub fn eval_with_derivative(&self, s: S) -> (S, S) {
        let w = cis(s);
        let mut pow = w;
        let mut val = Complex::<S>::zero();
        let mut der = Complex::<S>::zero();
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let t = *c * pow;
            val += t;
            der += cscale(t, m as f64);
            pow = pow * w;
        }
        let two = S::cst(2.0);
        (self.coeffs[0].re + two * val.re, -two * der.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_mode_gives_constant_grid() {
        let mut m = ModeVector::<f64>::zeros(3, Orientation::Positive);
        m.set(0, Complex::new(1.0, 0.0));
        let g = modes_to_grid(&m, 16).unwrap();
        assert!(g.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn cosine_from_pair_of_modes() {
        for orientation in [Orientation::Positive, Orientation::Negative] {
            let mut m = ModeVector::<f64>::zeros(2, orientation);
            m.set(1, Complex::new(1.0, 0.0));
            m.set(-1, Complex::new(1.0, 0.0));
            let g = modes_to_grid(&m, 32).unwrap();
            for (j, v) in g.iter().enumerate() {
                assert!((v - 2.0 * libm::cos(sigma(j, 32))).abs() < 1e-14);
            }
            let back = grid_to_modes(&g, 2, orientation).unwrap();
            assert!((back.get(1) - Complex::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sine_orientation_sign() {
        // c_1 = -i/2, c_-1 = i/2 with e^{+imσ} is sin σ; with e^{-imσ} it is -sin σ.
        let pos =
            ModeVector::real_from_positive(Orientation::Positive, 0.0, &[Complex::new(0.0, -0.5)]);
        let neg =
            ModeVector::real_from_positive(Orientation::Negative, 0.0, &[Complex::new(0.0, -0.5)]);
        let gp = modes_to_grid(&pos, 8).unwrap();
        let gn = modes_to_grid(&neg, 8).unwrap();
        for j in 0..8 {
            let s = libm::sin(sigma(j, 8));
            assert!((gp[j] - s).abs() < 1e-15);
            assert!((gn[j] + s).abs() < 1e-15);
        }
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let m = ModeVector::<f64>::zeros(4, Orientation::Positive);
        assert_eq!(
            modes_to_grid(&m, 8),
            Err(Error::GridTooSmall { n: 8, required: 10 })
        );
        assert!(grid_to_modes(&[0.0; 8], 4, Orientation::Positive).is_err());
    }

    #[test]
    fn interpolant_reproduces_off_grid_values() {
        let f = |s: f64| libm::cos(3.0 * s) + 0.25 * libm::sin(s) + 0.1;
        let grid: Vec<f64> = (0..32).map(|j| f(sigma(j, 32))).collect();
        let interp = TrigInterpolant::new(&grid).unwrap();
        assert_eq!(interp.bandwidth(), 3);
        for s in [0.1, 1.234, 5.9, -0.4] {
            let (v, d) = interp.eval_with_derivative(s);
            assert!((v - f(s)).abs() < 1e-14);
            let df = -3.0 * libm::sin(3.0 * s) + 0.25 * libm::cos(s);
            assert!((d - df).abs() < 1e-13);
        }
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let g: Vec<f64> = (0..64).map(|j| libm::sin(2.0 * sigma(j, 64))).collect();
        let d = spectral_derivative(&g).unwrap();
        for j in 0..64 {
            assert!((d[j] - 2.0 * libm::cos(2.0 * sigma(j, 64))).abs() < 1e-13);
        }
    }
}
