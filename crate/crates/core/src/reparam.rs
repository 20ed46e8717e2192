//! Circle reparameterizations and the weight-one pullback.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::circle::CircleMap;
use crate::numerics::modes::{sigma, TrigInterpolant};
use crate::phase_space::FieldGrid;
use crate::scalar::Scalar;

/// Largest admissible `Σ j|c_j|`, so that `φ′ ≥ 0.1`.
pub const MAX_BUDGET: f64 = 0.9;

/// `φ(σ) = σ + Σ_j c_j sin(jσ + θ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReparamMap {
    coeffs: Vec<f64>,
    phases: Vec<f64>,
}

impl ReparamMap {
    pub fn new(coeffs: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if coeffs.len() != phases.len() {
            return Err(Error::Shape("coefficient and phase counts differ"));
        }
        let budget: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c.abs())
            .sum();
        if !(budget <= MAX_BUDGET * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(
                "harmonic budget Σ j|c_j| exceeds 0.9",
            ));
        }
        Ok(Self { coeffs, phases })
    }

    pub fn identity() -> Self {
        Self {
            coeffs: Vec::new(),
            phases: Vec::new(),
        }
    }

    pub fn harmonics(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn budget(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c.abs())
            .sum()
    }

    /// `φ(σ) − σ` and `φ′(σ)`.
    pub fn offset_and_derivative(&self, s: f64) -> (f64, f64) {
        let mut off = 0.0;
        let mut der = 1.0;
        for (i, (c, th)) in self.coeffs.iter().zip(&self.phases).enumerate() {
            let j = (i + 1) as f64;
            let (sn, cs) = libm::sincos(j * s + th);
            off += c * sn;
            der += c * j * cs;
        }
        (off, der)
    }

    pub fn value(&self, s: f64) -> f64 {
        s + self.offset_and_derivative(s).0
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.offset_and_derivative(s).1
    }

    /// `φ(0)`; zero when the base point is preserved.
    pub fn base_point(&self) -> f64 {
        self.offset_and_derivative(0.0).0
    }

    /// Conjugates by a rotation to a zero `a` of `φ − id`, giving
    /// `σ ↦ φ(σ + a) − a`, which fixes 0 and has the same budget.
    pub fn fix_base_point(&self) -> Self {
        if self.coeffs.iter().all(|&c| c == 0.0) {
            return self.clone();
        }
        let g = |s: f64| self.offset_and_derivative(s).0;
        let n = 256 * self.harmonics().max(1);
        let mut a = 0.0;
        for j in 0..n {
            let (lo, hi) = (sigma(j, n), sigma(j + 1, n));
            let (glo, ghi) = (g(lo), g(hi));
            if glo == 0.0 {
                a = lo;
                break;
            }
            if glo * ghi < 0.0 {
                let (mut lo, mut hi, mut glo) = (lo, hi, glo);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let gm = g(mid);
                    if gm == 0.0 || hi - lo < 1e-16 {
                        lo = mid;
                        break;
                    }
                    if (gm < 0.0) == (glo < 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                a = lo;
                break;
            }
        }
        let phases = self
            .phases
            .iter()
            .enumerate()
            .map(|(i, th)| libm::remainder(th + (i + 1) as f64 * a, 2.0 * PI))
            .collect();
        Self {
            coeffs: self.coeffs.clone(),
            phases,
        }
    }

    /// Samples on the `N`-grid.
    pub fn sample(&self, n: usize) -> Result<CircleMap<f64>> {
        let (off, der): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|j| self.offset_and_derivative(sigma(j, n)))
            .unzip();
        CircleMap::new(off, der)
    }

    /// Samples of `self ∘ inner`.
    pub fn compose_sampled(&self, inner: &ReparamMap, n: usize) -> Result<CircleMap<f64>> {
        let (off, der): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|j| {
                let s = sigma(j, n);
                let (io, id) = inner.offset_and_derivative(s);
                let (oo, od) = self.offset_and_derivative(s + io);
                (io + oo, od * id)
            })
            .unzip();
        CircleMap::new(off, der)
    }
}

/// A random harmonic diffeomorphism with `Σ j|c_j| = amplitude`.
pub fn random_diffeo(
    seed: u64,
    harmonics: usize,
    amplitude: f64,
    fix_base_point: bool,
) -> Result<ReparamMap> {
    if !(0.0..=MAX_BUDGET).contains(&amplitude) {
        return Err(Error::InvalidParameter("amplitude must lie in [0, 0.9]"));
    }
    if harmonics == 0 {
        return Ok(ReparamMap::identity());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..harmonics).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let phases: Vec<f64> = (0..harmonics)
        .map(|_| 2.0 * PI * rng.gen::<f64>() - PI)
        .collect();
    let total: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (i + 1) as f64 * w)
        .sum();
    let coeffs = weights.iter().map(|w| amplitude * w / total).collect();
    let map = ReparamMap::new(coeffs, phases)?;
    Ok(if fix_base_point {
        map.fix_base_point()
    } else {
        map
    })
}

/// Weight-one pullback `(F∘φ)·φ′`, with `F` evaluated through its
/// trigonometric interpolant.
pub fn pull_back<S: Scalar>(field: &FieldGrid<S>, map: &CircleMap<S>) -> Result<FieldGrid<S>> {
    let n = field.n_samples();
    if map.n() != n {
        return Err(Error::Shape("map and field sampled on different grids"));
    }
    let points = map.values();
    let components = field
        .components()
        .iter()
        .map(|c| {
            let interp = TrigInterpolant::new(c)?;
            Ok(points
                .iter()
                .zip(map.derivative())
                .map(|(&s, &d)| interp.eval(s) * d)
                .collect())
        })
        .collect::<Result<Vec<Vec<S>>>>()?;
    FieldGrid::new(components)
}

/// [`pull_back`] by a harmonic map.
pub fn pullback_weight_one(field: &FieldGrid<f64>, map: &ReparamMap) -> Result<FieldGrid<f64>> {
    pull_back(field, &map.sample(field.n_samples())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn smooth_field(n: usize) -> FieldGrid<f64> {
        let a = (0..n).map(|j| libm::exp(libm::sin(sigma(j, n)))).collect();
        let b = (0..n).map(|j| 0.3 + libm::cos(2.0 * sigma(j, n))).collect();
        FieldGrid::new(vec![a, b]).unwrap()
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let map = random_diffeo(1, 3, 0.0, true).unwrap();
        let f = smooth_field(64);
        let g = pullback_weight_one(&f, &map).unwrap();
        for mu in 0..2 {
            for j in 0..64 {
                assert!((f.component(mu)[j] - g.component(mu)[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn single_harmonic_closed_form() {
        let map = ReparamMap::new(vec![0.5], vec![0.0]).unwrap();
        let s = map.sample(128).unwrap();
        assert!(s.min_derivative() >= 0.5 - 1e-15);
        let c = FieldGrid::scalar(vec![2.0; 128]);
        let g = pullback_weight_one(&c, &map).unwrap();
        for j in 0..128 {
            assert!(
                (g.component(0)[j] - 2.0 * (1.0 + 0.5 * libm::cos(sigma(j, 128)))).abs() < 1e-13
            );
        }
    }

    #[test]
    fn random_maps_respect_budget() {
        for seed in 0..20 {
            let map = random_diffeo(seed, 4, 0.9, seed % 2 == 0).unwrap();
            assert!(map.budget() <= 0.9 + 1e-12);
            assert!(map.sample(4096).unwrap().min_derivative() >= 0.1);
        }
        assert!(random_diffeo(0, 2, 0.95, false).is_err());
    }

    #[test]
    fn base_point_fixed() {
        for seed in 0..20 {
            let map = random_diffeo(seed, 3, 0.8, true).unwrap();
            assert!(
                map.base_point().abs() < 1e-14,
                "seed {seed}: {}",
                map.base_point()
            );
        }
    }

    #[test]
    fn pullback_preserves_integral() {
        let f = smooth_field(256);
        let map = random_diffeo(9, 3, 0.7, false).unwrap();
        let g = pullback_weight_one(&f, &map).unwrap();
        for mu in 0..2 {
            let a: f64 = f.component(mu).iter().sum();
            let b: f64 = g.component(mu).iter().sum();
            assert!((a - b).abs() * 2.0 * PI / 256.0 < 1e-11);
        }
    }
}
