//! Reparameterization clocks `R±`, classical DDF modes and invariants, and
//! the quasi-local fields they reconstruct.
//!
//! ```text
//! R±(σ) = σ ± φ₀ + periodic,   φ₀ = (4πT/k·p) k·x
//! A_m = (2π)^{-1/2} ∮ P₋ e^{−imR₋} dσ,   Ã_m = (2π)^{-1/2} ∮ P₊ e^{+imR₊} dσ
//! ```

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::circle::{invert_monotone, CircleMap};
use crate::numerics::fft::check_pow2;
use crate::numerics::modes::{modes_to_grid, modes_to_grid_complex, ModeVector};
use crate::phase_space::{eval_field, Chirality, FieldGrid, LightlikeFrame, StringState};
use crate::reparam::pull_back;
use crate::scalar::{cis, cmagnitude, cscale, Scalar};

/// `k·p`, rejected when it vanishes relative to `|k||p|`.
pub fn frame_momentum<S: Scalar>(state: &StringState<S>, frame: &LightlikeFrame) -> Result<S> {
    if frame.dim() != state.dim() {
        return Err(Error::Shape("frame and state dimensions differ"));
    }
    let kp = frame.dot(state.p());
    let kk: f64 = frame.k().iter().map(|v| v * v).sum();
    let pp: f64 = state.p().iter().map(|v| v.value() * v.value()).sum();
    if !(kp.value().abs() > 1e-12 * libm::sqrt(kk * pp)) {
        return Err(Error::DegenerateFrame { kp: kp.value() });
    }
    Ok(kp)
}

/// `φ₀ = (4πT/k·p) k·x`.
pub fn zero_mode_phase<S: Scalar>(state: &StringState<S>, frame: &LightlikeFrame) -> Result<S> {
    let kp = frame_momentum(state, frame)?;
    Ok(frame.dot(state.x()).scale(4.0 * PI * state.tension()) / kp)
}

/// Samples of `R±` and `R±′`.
pub fn compute_r<S: Scalar>(
    state: &StringState<S>,
    frame: &LightlikeFrame,
    chirality: Chirality,
    n: usize,
) -> Result<CircleMap<S>> {
    check_pow2(n)?;
    let modes = state.truncation();
    if n < 4 * modes {
        return Err(Error::GridTooSmall {
            n,
            required: 4 * modes,
        });
    }
    let kp = frame_momentum(state, frame)?;
    let phi0 = zero_mode_phase(state, frame)?;
    let coupling = libm::sqrt(4.0 * PI * state.tension());
    let orientation = chirality.orientation();

    // R′ − 1 carries √(4πT)(k·α_m)/k·p at mode m; R − σ integrates it.
    let slope: Vec<Complex<S>> = state
        .oscillators(chirality)
        .iter()
        .map(|v| {
            let c = frame.dot_complex(v);
            Complex::new(c.re / kp, c.im / kp).scale(S::cst(coupling))
        })
        .collect();
    let integrated: Vec<Complex<S>> = slope
        .iter()
        .enumerate()
        .map(|(i, c)| {
            // e^{±imσ}/(±im) = ∓(i/m) e^{±imσ}
            let f = -orientation.sign() / (i + 1) as f64;
            Complex::new(-c.im.scale(f), c.re.scale(f))
        })
        .collect();

    let offset = modes_to_grid(
        &ModeVector::real_from_positive(orientation, phi0.scale(chirality.sign()), &integrated),
        n,
    )?;
    let derivative = modes_to_grid(
        &ModeVector::real_from_positive(orientation, S::one(), &slope),
        n,
    )?;
    CircleMap::new(offset, derivative)
}

/// DDF modes of one chirality for `|m| ≤ m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DdfModes<S = f64> {
    chirality: Chirality,
    m_max: usize,
    k: Vec<f64>,
    /// `modes[m + m_max][μ]`
    modes: Vec<Vec<Complex<S>>>,
}

impl<S: Scalar> DdfModes<S> {
    pub fn new(chirality: Chirality, k: Vec<f64>, modes: Vec<Vec<Complex<S>>>) -> Result<Self> {
        if modes.len() % 2 == 0 {
            return Err(Error::Shape("mode list must have odd length 2·m_max + 1"));
        }
        if modes.iter().any(|v| v.len() != k.len()) {
            return Err(Error::Shape("mode vector has wrong dimension"));
        }
        Ok(Self {
            chirality,
            m_max: modes.len() / 2,
            k,
            modes,
        })
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn get(&self, m: i64) -> Result<&[Complex<S>]> {
        if m.unsigned_abs() as usize > self.m_max {
            return Err(Error::ModeOutOfRange {
                mode: m,
                max: self.m_max,
            });
        }
        Ok(&self.modes[(m + self.m_max as i64) as usize])
    }

    pub fn all(&self) -> &[Vec<Complex<S>>] {
        &self.modes
    }

    pub fn max_abs(&self) -> f64 {
        self.modes
            .iter()
            .flatten()
            .map(|z| cmagnitude(*z))
            .fold(0.0, f64::max)
    }

    /// `max_{m≠0} |η(k, A_m)| / max |A_m|`.
    pub fn transversality_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (1..=self.m_max as i64)
            .flat_map(|m| [m, -m])
            .map(|m| {
                let v = &self.modes[(m + self.m_max as i64) as usize];
                cmagnitude(crate::phase_space::Metric::dot_const_complex(&self.k, v))
            })
            .fold(0.0, f64::max)
            / scale
    }

    /// `max_m |A_{−m} − conj(A_m)| / max |A_m|`.
    pub fn conjugation_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mm = self.m_max as i64;
        (0..=mm)
            .flat_map(|m| {
                let a = &self.modes[(m + mm) as usize];
                let b = &self.modes[(mm - m) as usize];
                a.iter()
                    .zip(b)
                    .map(|(x, y)| cmagnitude(*y - x.conj()))
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
            / scale
    }
}

fn check_ddf_grid(n: usize, modes: usize, m_out: usize) -> Result<()> {
    check_pow2(n)?;
    let required = 8 * modes.max(m_out).max(1);
    if n < required {
        return Err(Error::GridTooSmall { n, required });
    }
    Ok(())
}

/// `(2π)^{-1/2} ∮ P e^{∓imR} dσ` by the periodic trapezoid rule, for one `m`.
pub fn ddf_mode<S: Scalar>(
    field: &FieldGrid<S>,
    map: &CircleMap<S>,
    chirality: Chirality,
    m: i64,
) -> Vec<Complex<S>> {
    let n = field.n_samples();
    let w = libm::sqrt(2.0 * PI) / n as f64;
    // A_m uses e^{−imR₋}, Ã_m uses e^{+imR₊}
    let freq = -chirality.orientation().sign() * m as f64;
    let phases: Vec<Complex<S>> = (0..n).map(|j| cis(map.value(j).scale(freq))).collect();
    (0..field.n_components())
        .map(|mu| {
            let acc = field
                .component(mu)
                .iter()
                .zip(&phases)
                .fold(Complex::<S>::zero(), |acc, (&f, e)| {
                    acc + Complex::new(e.re * f, e.im * f)
                });
            cscale(acc, w)
        })
        .collect()
}

/// DDF modes from a sampled field and its clock; each `m` (negative ones
/// included) is computed independently.
pub fn ddf_modes_from<S: Scalar>(
    field: &FieldGrid<S>,
    map: &CircleMap<S>,
    chirality: Chirality,
    k: &[f64],
    m_max: usize,
) -> Result<DdfModes<S>> {
    if map.n() != field.n_samples() {
        return Err(Error::Shape("map and field sampled on different grids"));
    }
    let modes = (-(m_max as i64)..=m_max as i64)
        .map(|m| ddf_mode(field, map, chirality, m))
        .collect();
    DdfModes::new(chirality, k.to_vec(), modes)
}

/// `A_m` (or `Ã_m`) for `|m| ≤ m_out`, requiring `N ≥ 8·max(M, m_out)`.
pub fn ddf_modes<S: Scalar>(
    state: &StringState<S>,
    frame: &LightlikeFrame,
    chirality: Chirality,
    m_out: usize,
    n: usize,
) -> Result<DdfModes<S>> {
    check_ddf_grid(n, state.truncation(), m_out)?;
    let map = compute_r(state, frame, chirality, n)?;
    let field = eval_field(state, chirality, n)?;
    ddf_modes_from(&field, &map, chirality, frame.k(), m_out)
}

/// `a_m = A_m e^{−imφ₀}`, independent of `x`.
pub fn strip_zero_mode<S: Scalar>(
    modes: &DdfModes<S>,
    state: &StringState<S>,
    frame: &LightlikeFrame,
) -> Result<DdfModes<S>> {
    let phi0 = zero_mode_phase(state, frame)?;
    let mm = modes.m_max as i64;
    let stripped = (-mm..=mm)
        .map(|m| {
            let e = cis(-(phi0.scale(m as f64)));
            modes.modes[(m + mm) as usize]
                .iter()
                .map(|&z| z * e)
                .collect()
        })
        .collect();
    DdfModes::new(modes.chirality, modes.k.clone(), stripped)
}

/// Factor lists and level of a DDF invariant
/// `D = Π a_{m_i}^{μ_i} Π ã_{m̃_j}^{ν_j} e^{iNφ₀}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DdfInvariantSpec {
    left: Vec<(usize, i64)>,
    right: Vec<(usize, i64)>,
    level: i64,
    control: bool,
}

impl DdfInvariantSpec {
    /// A level-matched spec; `Σ m_i` must equal `Σ m̃_j`.
    pub fn new(left: Vec<(usize, i64)>, right: Vec<(usize, i64)>) -> Result<Self> {
        let l: i64 = left.iter().map(|f| f.1).sum();
        let r: i64 = right.iter().map(|f| f.1).sum();
        if l != r {
            return Err(Error::LevelMismatch {
                left: l,
                right: r,
                level: l,
            });
        }
        Ok(Self {
            left,
            right,
            level: l,
            control: false,
        })
    }

    /// An unmatched spec for negative-control tests, with an explicit level.
    pub fn negative_control(left: Vec<(usize, i64)>, right: Vec<(usize, i64)>, level: i64) -> Self {
        Self {
            left,
            right,
            level,
            control: true,
        }
    }

    pub fn left(&self) -> &[(usize, i64)] {
        &self.left
    }

    pub fn right(&self) -> &[(usize, i64)] {
        &self.right
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn is_control(&self) -> bool {
        self.control
    }

    pub fn is_matched(&self) -> bool {
        let l: i64 = self.left.iter().map(|f| f.1).sum();
        let r: i64 = self.right.iter().map(|f| f.1).sum();
        l == self.level && r == self.level
    }

    pub fn max_mode(&self) -> usize {
        self.left
            .iter()
            .chain(&self.right)
            .map(|f| f.1.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn factors(&self, chirality: Chirality) -> &[(usize, i64)] {
        match chirality {
            Chirality::Minus => &self.left,
            Chirality::Plus => &self.right,
        }
    }
}

/// Value of a DDF invariant computed on the `N`-grid.
pub fn ddf_invariant<S: Scalar>(
    state: &StringState<S>,
    frame: &LightlikeFrame,
    spec: &DdfInvariantSpec,
    n: usize,
) -> Result<Complex<S>> {
    if !spec.control && !spec.is_matched() {
        let l: i64 = spec.left.iter().map(|f| f.1).sum();
        let r: i64 = spec.right.iter().map(|f| f.1).sum();
        return Err(Error::LevelMismatch {
            left: l,
            right: r,
            level: spec.level,
        });
    }
    check_ddf_grid(n, state.truncation(), spec.max_mode())?;
    let phi0 = zero_mode_phase(state, frame)?;
    let mut value = cis(phi0.scale(spec.level as f64));
    for chirality in Chirality::BOTH {
        let factors = spec.factors(chirality);
        if factors.is_empty() {
            continue;
        }
        let map = compute_r(state, frame, chirality, n)?;
        let field = eval_field(state, chirality, n)?;
        for &(mu, m) in factors {
            if mu >= state.dim() {
                return Err(Error::IndexOutOfRange {
                    index: mu,
                    dim: state.dim(),
                });
            }
            let a = ddf_mode(&field, &map, chirality, m)[mu];
            value = value * a * cis(-(phi0.scale(m as f64)));
        }
    }
    Ok(value)
}

/// `P^R(σ) = (2π)^{-1/2} Σ_m A_m e^{±imσ}` on the `N`-grid.
pub fn reconstruct_field<S: Scalar>(modes: &DdfModes<S>, n: usize) -> Result<FieldGrid<S>> {
    check_pow2(n)?;
    if 2 * modes.m_max + 2 > n {
        return Err(Error::GridTooSmall {
            n,
            required: 2 * modes.m_max + 2,
        });
    }
    let norm = 1.0 / libm::sqrt(2.0 * PI);
    let orientation = modes.chirality.orientation();
    let mm = modes.m_max as i64;
    let components = (0..modes.dim())
        .map(|mu| {
            let mv = ModeVector::from_fn(modes.m_max, orientation, |m| {
                cscale(modes.modes[(m + mm) as usize][mu], norm)
            });
            Ok(modes_to_grid_complex(&mv, n)?
                .into_iter()
                .map(|z| z.re)
                .collect())
        })
        .collect::<Result<Vec<Vec<S>>>>()?;
    FieldGrid::new(components)
}

/// `P^R = (R⁻¹)′ · P∘R⁻¹`, through monotone inversion and interpolation.
pub fn reconstruct_field_direct<S: Scalar>(
    state: &StringState<S>,
    frame: &LightlikeFrame,
    chirality: Chirality,
    n: usize,
) -> Result<FieldGrid<S>> {
    let map = compute_r(state, frame, chirality, n)?;
    let inverse = invert_monotone(&map)?;
    let field = eval_field(state, chirality, n)?;
    pull_back(&field, &inverse)
}
