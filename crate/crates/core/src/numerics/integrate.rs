//! Spectrally accurate cumulative integration on periodic grids.
//!
//! Cumulative integrals of periodic data are not periodic once the mean is
//! nonzero. Intermediate results are therefore carried as a polynomial in σ
//! with periodic grid coefficients, `G(σ) = Σ_k σ^k g_k(σ)`, and each
//! `∫₀^σ s^k h(s) ds` is reduced to periodic antiderivatives by parts.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;

use super::fft::{fft_in_place, fft_real, Direction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Splits `f = mean + f̃` and returns `(G, mean)` with `G(σ) = ∫₀^σ f̃`,
/// so `∫₀^σ f = G(σ) + mean·σ`.
pub fn periodic_antiderivative<S: Scalar>(grid: &[S]) -> Result<(Vec<S>, S)> {
    let n = grid.len();
    let mut spec = fft_real(grid)?;
    let inv = 1.0 / n as f64;
    let mean = spec[0].re.scale(inv);
    let half = (n / 2) as i64;

    spec[0] = Complex::zero();
    let mut at_zero = Complex::<S>::zero();
    for (bin, c) in spec.iter_mut().enumerate().skip(1) {
        let m = if (bin as i64) < half {
            bin as i64
        } else {
            bin as i64 - n as i64
        };
        if m == -half || m == half {
            *c = Complex::zero();
            continue;
        }
        // c/(i m N) = -i c/(m N)
        let f = inv / m as f64;
        *c = Complex::new(c.im.scale(f), -c.re.scale(f));
        at_zero = at_zero + *c;
    }
    fft_in_place(&mut spec, Direction::Inverse)?;
    let offset = at_zero.re;
    Ok((spec.into_iter().map(|z| z.re - offset).collect(), mean))
}

/// A function `Σ_k σ^k coeffs[k](σ)` with periodic grid coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGrid<S = f64> {
    coeffs: Vec<Vec<S>>,
}

impl<S: Scalar> PolyGrid<S> {
    pub fn constant(n: usize, value: S) -> Self {
        Self {
            coeffs: vec![vec![value; n]],
        }
    }

    pub fn from_periodic(grid: Vec<S>) -> Self {
        Self { coeffs: vec![grid] }
    }

    pub fn zeros(n: usize, degree: usize) -> Self {
        Self {
            coeffs: vec![vec![S::zero(); n]; degree + 1],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.coeffs[0].len()
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Vec<S>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Vec<S>] {
        &mut self.coeffs
    }

    /// Pointwise product with a periodic grid.
    pub fn mul_periodic(&self, f: &[S]) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|g| g.iter().zip(f).map(|(&a, &b)| a * b).collect())
                .collect(),
        }
    }

    /// Value at sample `j` (σ_j = 2πj/N).
    pub fn value_at(&self, j: usize) -> S {
        let s = 2.0 * PI * j as f64 / self.n() as f64;
        self.horner(s, j)
    }

    /// Value at σ = 2π; periodic coefficients are read at sample 0.
    pub fn value_at_end(&self) -> S {
        self.horner(2.0 * PI, 0)
    }

    fn horner(&self, s: f64, j: usize) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, g| acc.scale(s) + g[j])
    }

    /// `∫₀^σ` of this function, again as a polynomial-carry grid.
    pub fn integrate(&self) -> Result<Self> {
        let n = self.n();
        let mut out = Self::zeros(n, self.degree() + 1);
        for (k, h) in self.coeffs.iter().enumerate() {
            integrate_monomial(k, h, 1.0, &mut out.coeffs)?;
        }
        Ok(out)
    }
}

/// Accumulates `scale · ∫₀^σ s^k h(s) ds` into `out`.
fn integrate_monomial<S: Scalar>(k: usize, h: &[S], scale: f64, out: &mut [Vec<S>]) -> Result<()> {
    let (anti, mean) = periodic_antiderivative(h)?;
    let c = mean.scale(scale / (k + 1) as f64);
    for v in out[k + 1].iter_mut() {
        *v += c;
    }
    for (o, a) in out[k].iter_mut().zip(&anti) {
        *o += a.scale(scale);
    }
    if k > 0 {
        // ∫ s^k H' = s^k H − k ∫ s^{k−1} H
        integrate_monomial(k - 1, &anti, -scale * k as f64, out)?;
    }
    Ok(())
}

/// `∫_{0≤σ₁≤…≤σ_n≤2π} f₁(σ₁)⋯f_n(σ_n)` with `f₁` innermost.
pub fn simplex_iterated_integral<S: Scalar>(factors: &[&[S]]) -> Result<S> {
    let first = factors
        .first()
        .ok_or(Error::InvalidParameter("empty factor list"))?;
    let n = first.len();
    if factors.iter().any(|f| f.len() != n) {
        return Err(Error::Shape("factors sampled on different grids"));
    }
    let mut acc = PolyGrid::constant(n, S::one());
    for f in factors {
        acc = acc.mul_periodic(f).integrate()?;
    }
    Ok(acc.value_at_end())
}
