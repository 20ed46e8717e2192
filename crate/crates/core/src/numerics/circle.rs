//! Degree-one monotone circle maps and their inverses.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::modes::{sigma, TrigInterpolant};
use crate::scalar::Scalar;

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 60;

/// Samples of a map `R(σ) = σ + g(σ)` with `g` 2π-periodic, so
/// `R(σ + 2π) = R(σ) + 2π` holds by representation.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMap<S = f64> {
    offset: Vec<S>,
    derivative: Vec<S>,
}

impl<S: Scalar> CircleMap<S> {
    /// `offset[j] = R(σ_j) − σ_j`, `derivative[j] = R′(σ_j)`.
    pub fn new(offset: Vec<S>, derivative: Vec<S>) -> Result<Self> {
        if offset.len() != derivative.len() {
            return Err(Error::Shape("offset and derivative lengths differ"));
        }
        let map = Self { offset, derivative };
        let min = map.min_derivative();
        if !(min > 0.0) {
            return Err(Error::NonMonotone {
                min_derivative: min,
            });
        }
        Ok(map)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            offset: alloc::vec![S::zero(); n],
            derivative: alloc::vec![S::one(); n],
        }
    }

    /// Rigid rotation `σ ↦ σ + c`.
    pub fn rotation(n: usize, c: f64) -> Self {
        Self {
            offset: alloc::vec![S::cst(c); n],
            derivative: alloc::vec![S::one(); n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offset.len()
    }

    pub fn offset(&self) -> &[S] {
        &self.offset
    }

    pub fn derivative(&self) -> &[S] {
        &self.derivative
    }

    /// `R(σ_j)`.
    #[inline]
    pub fn value(&self, j: usize) -> S {
        self.offset[j] + S::cst(sigma(j, self.n()))
    }

    pub fn values(&self) -> Vec<S> {
        (0..self.n()).map(|j| self.value(j)).collect()
    }

    pub fn min_derivative(&self) -> f64 {
        self.derivative
            .iter()
            .map(|d| d.value())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solves `s + g(s) = u` for `s` by Newton's method safeguarded with a
/// monotone bisection bracket.
fn solve_monotone(g: &TrigInterpolant<f64>, u: f64, lo: f64, hi: f64) -> f64 {
    let f = |s: f64| {
        let (v, d) = g.eval_with_derivative(s);
        (s + v - u, 1.0 + d)
    };
    let (mut lo, mut hi) = (lo, hi);
    let mut s = 0.5 * (lo + hi);
    for _ in 0..NEWTON_MAX_ITER {
        let (fs, ds) = f(s);
        if fs > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let mut next = s - fs / ds;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - s).abs();
        s = next;
        if step < NEWTON_TOL || hi - lo < NEWTON_TOL {
            break;
        }
    }
    s
}

/// Samples of `R⁻¹` on the uniform grid, with `(R⁻¹)′ = 1/R′∘R⁻¹`.
///
/// The root is found on the primal parts; tangent information is then
/// recovered from one Newton step carried out in `S` arithmetic, which is
/// exactly the implicit-function relation `dR⁻¹ = −(dR)∘R⁻¹ / R′∘R⁻¹`.
pub fn invert_monotone<S: Scalar>(map: &CircleMap<S>) -> Result<CircleMap<S>> {
    let min = map.min_derivative();
    if !(min > 0.0) {
        return Err(Error::NonMonotone {
            min_derivative: min,
        });
    }
    let n = map.n();
    let g = TrigInterpolant::new(&map.offset)?;
    let g0 = g.values();

    let (gmin, gmax) = map
        .offset
        .iter()
        .map(|v| v.value())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    // The interpolant can overshoot the samples slightly; widen the bracket.
    let pad = 1e-6 + 1e-3 * (gmax - gmin);

    let mut offset = Vec::with_capacity(n);
    let mut derivative = Vec::with_capacity(n);
    for j in 0..n {
        let u = sigma(j, n);
        let (mut lo, mut hi) = (u - gmax - pad, u - gmin + pad);
        while lo + g0.eval(lo) > u {
            lo -= 1.0;
        }
        while hi + g0.eval(hi) < u {
            hi += 1.0;
        }
        let s = solve_monotone(&g0, u, lo, hi);

        let (gv, gd) = g.eval_with_derivative(S::cst(s));
        let s_full = S::cst(s) - (S::cst(s) + gv - S::cst(u)) / (S::one() + gd);
        let (_, gd_full) = g.eval_with_derivative(s_full);
        offset.push(s_full - S::cst(u));
        derivative.push(S::one() / (S::one() + gd_full));
    }
    Ok(CircleMap { offset, derivative })
}
