//! Truncated closed-string phase space and its chiral fields.
//!
//! A state stores the center-of-mass pair `(x, p)` and the oscillators
//! `α_m`, `α̃_m` for `1 ≤ m ≤ M`. Negative modes are conjugates and the zero
//! modes are fixed to `α₀ = α̃₀ = p/√(4πT)`, which makes `∫P dσ = p` exact.
//!
//! ```text
//! P₋(σ) = (2π)^{-1/2} Σ_m α_m e^{+imσ}
//! P₊(σ) = (2π)^{-1/2} Σ_m α̃_m e^{-imσ}
//! ```

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::fft::check_pow2;
use crate::numerics::modes::{modes_to_grid_complex, ModeVector, Orientation};
use crate::scalar::{cscale, Scalar};

/// String tension for `α′ = 1`.
pub const DEFAULT_TENSION: f64 = 1.0 / (2.0 * PI);

/// Left (`−`, oscillators `α_m`) or right (`+`, oscillators `α̃_m`) movers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chirality {
    Minus,
    Plus,
}

impl Chirality {
    pub const BOTH: [Chirality; 2] = [Chirality::Minus, Chirality::Plus];

    /// Orientation of the mode expansion of `P±`.
    #[inline]
    pub fn orientation(self) -> Orientation {
        match self {
            Chirality::Minus => Orientation::Positive,
            Chirality::Plus => Orientation::Negative,
        }
    }

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Chirality::Minus => -1.0,
            Chirality::Plus => 1.0,
        }
    }

    #[inline]
    pub fn opposite(self) -> Chirality {
        match self {
            Chirality::Minus => Chirality::Plus,
            Chirality::Plus => Chirality::Minus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Chirality::Minus => "-",
            Chirality::Plus => "+",
        }
    }
}

/// Minkowski metric `diag(−1, +1, …, +1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metric {
    pub dim: usize,
}

impl Metric {
    #[inline]
    pub fn sign(mu: usize) -> f64 {
        if mu == 0 {
            -1.0
        } else {
            1.0
        }
    }

    #[inline]
    pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
        a.iter()
            .zip(b)
            .enumerate()
            .fold(S::zero(), |acc, (mu, (&x, &y))| {
                acc + (x * y).scale(Self::sign(mu))
            })
    }

    /// Bilinear (not sesquilinear) product of complex vectors.
    #[inline]
    pub fn dot_complex<S: Scalar>(a: &[Complex<S>], b: &[Complex<S>]) -> Complex<S> {
        a.iter()
            .zip(b)
            .enumerate()
            .fold(Complex::zero(), |acc, (mu, (&x, &y))| {
                acc + cscale(x * y, Self::sign(mu))
            })
    }

    /// `η(k, v)` for a plain vector `k`.
    #[inline]
    pub fn dot_const<S: Scalar>(k: &[f64], v: &[S]) -> S {
        k.iter()
            .zip(v)
            .enumerate()
            .fold(S::zero(), |acc, (mu, (&kk, &x))| {
                acc + x.scale(kk * Self::sign(mu))
            })
    }

    #[inline]
    pub fn dot_const_complex<S: Scalar>(k: &[f64], v: &[Complex<S>]) -> Complex<S> {
        k.iter()
            .zip(v)
            .enumerate()
            .fold(Complex::zero(), |acc, (mu, (&kk, &x))| {
                acc + cscale(x, kk * Self::sign(mu))
            })
    }
}

/// A constant null vector `k` on target space.
#[derive(Debug, Clone, PartialEq)]
pub struct LightlikeFrame {
    k: Vec<f64>,
}

impl LightlikeFrame {
    pub fn new(k: Vec<f64>) -> Result<Self> {
        let sq: f64 = k.iter().map(|v| v * v).sum();
        if k.len() < 2 || sq == 0.0 {
            return Err(Error::InvalidParameter(
                "frame vector must be nonzero with dim ≥ 2",
            ));
        }
        let norm = Metric::dot(&k, &k);
        if norm.abs() > 1e-14 * sq {
            return Err(Error::NotLightlike { norm });
        }
        Ok(Self { k })
    }

    /// `k = (1, 1, 0, …, 0)`.
    pub fn standard(dim: usize) -> Self {
        let mut k = vec![0.0; dim];
        k[0] = 1.0;
        k[1] = 1.0;
        Self { k }
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    #[inline]
    pub fn dot<S: Scalar>(&self, v: &[S]) -> S {
        Metric::dot_const(&self.k, v)
    }

    #[inline]
    pub fn dot_complex<S: Scalar>(&self, v: &[Complex<S>]) -> Complex<S> {
        Metric::dot_const_complex(&self.k, v)
    }
}

/// A point of the truncated phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct StringState<S = f64> {
    dim: usize,
    tension: f64,
    x: Vec<S>,
    p: Vec<S>,
    /// `left[m-1][μ] = α_m^μ`
    left: Vec<Vec<Complex<S>>>,
    /// `right[m-1][μ] = α̃_m^μ`
    right: Vec<Vec<Complex<S>>>,
}

impl<S: Scalar> StringState<S> {
    pub fn new(
        tension: f64,
        x: Vec<S>,
        p: Vec<S>,
        left: Vec<Vec<Complex<S>>>,
        right: Vec<Vec<Complex<S>>>,
    ) -> Result<Self> {
        let dim = x.len();
        if dim < 2 {
            return Err(Error::InvalidParameter("dimension must be at least 2"));
        }
        if !(tension > 0.0) {
            return Err(Error::InvalidParameter("tension must be positive"));
        }
        if p.len() != dim {
            return Err(Error::Shape("x and p dimensions differ"));
        }
        if left.len() != right.len() {
            return Err(Error::Shape("left and right truncations differ"));
        }
        if left.iter().chain(&right).any(|m| m.len() != dim) {
            return Err(Error::Shape("oscillator vector has wrong dimension"));
        }
        Ok(Self {
            dim,
            tension,
            x,
            p,
            left,
            right,
        })
    }

    /// A state with every oscillator zero.
    pub fn without_oscillators(tension: f64, x: Vec<S>, p: Vec<S>, modes: usize) -> Result<Self> {
        let dim = x.len();
        let zeros = vec![vec![Complex::zero(); dim]; modes];
        Self::new(tension, x, p, zeros.clone(), zeros)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn tension(&self) -> f64 {
        self.tension
    }

    /// Oscillator truncation `M`.
    #[inline]
    pub fn truncation(&self) -> usize {
        self.left.len()
    }

    pub fn x(&self) -> &[S] {
        &self.x
    }

    pub fn p(&self) -> &[S] {
        &self.p
    }

    pub fn oscillators(&self, chirality: Chirality) -> &[Vec<Complex<S>>] {
        match chirality {
            Chirality::Minus => &self.left,
            Chirality::Plus => &self.right,
        }
    }

    pub fn oscillators_mut(&mut self, chirality: Chirality) -> &mut [Vec<Complex<S>>] {
        match chirality {
            Chirality::Minus => &mut self.left,
            Chirality::Plus => &mut self.right,
        }
    }

    pub fn x_mut(&mut self) -> &mut [S] {
        &mut self.x
    }

    pub fn p_mut(&mut self) -> &mut [S] {
        &mut self.p
    }

    /// `α₀ = α̃₀ = p/√(4πT)`.
    pub fn zero_mode(&self) -> Vec<S> {
        let f = 1.0 / libm::sqrt(4.0 * PI * self.tension);
        self.p.iter().map(|v| v.scale(f)).collect()
    }

    /// `α_m` (or `α̃_m`) for any integer `m`; zero beyond the truncation.
    pub fn mode(&self, chirality: Chirality, m: i64) -> Vec<Complex<S>> {
        let osc = self.oscillators(chirality);
        let abs = m.unsigned_abs() as usize;
        if m == 0 {
            self.zero_mode()
                .into_iter()
                .map(|v| Complex::new(v, S::zero()))
                .collect()
        } else if abs > osc.len() {
            vec![Complex::zero(); self.dim]
        } else if m > 0 {
            osc[abs - 1].clone()
        } else {
            osc[abs - 1].iter().map(|z| z.conj()).collect()
        }
    }

    /// Mode vector of the `μ` component of `P±`, including the `(2π)^{-1/2}`.
    pub fn field_modes(&self, chirality: Chirality, mu: usize) -> ModeVector<S> {
        let norm = 1.0 / libm::sqrt(2.0 * PI);
        let positive: Vec<Complex<S>> = self
            .oscillators(chirality)
            .iter()
            .map(|v| cscale(v[mu], norm))
            .collect();
        let c0 = self.zero_mode()[mu].scale(norm);
        ModeVector::real_from_positive(chirality.orientation(), c0, &positive)
    }
}

impl StringState<f64> {
    /// Embeds the state into another scalar type with zero tangents.
    pub fn lift<S: Scalar>(&self) -> StringState<S> {
        let lift_c = |v: &Vec<Complex<f64>>| -> Vec<Complex<S>> {
            v.iter()
                .map(|z| Complex::new(S::cst(z.re), S::cst(z.im)))
                .collect()
        };
        StringState {
            dim: self.dim,
            tension: self.tension,
            x: self.x.iter().map(|&v| S::cst(v)).collect(),
            p: self.p.iter().map(|&v| S::cst(v)).collect(),
            left: self.left.iter().map(lift_c).collect(),
            right: self.right.iter().map(lift_c).collect(),
        }
    }
}

/// Uniform samples of a periodic field; one grid per component.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid<S = f64> {
    components: Vec<Vec<S>>,
}

impl<S: Scalar> FieldGrid<S> {
    pub fn new(components: Vec<Vec<S>>) -> Result<Self> {
        let n = components
            .first()
            .map(Vec::len)
            .ok_or(Error::Shape("field has no components"))?;
        if components.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("components sampled on different grids"));
        }
        Ok(Self { components })
    }

    pub fn scalar(values: Vec<S>) -> Self {
        Self {
            components: vec![values],
        }
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.components[0].len()
    }

    #[inline]
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, mu: usize) -> &[S] {
        &self.components[mu]
    }

    pub fn components(&self) -> &[Vec<S>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<S>> {
        self.components
    }

    pub fn sample(&self, j: usize) -> Vec<S> {
        self.components.iter().map(|c| c[j]).collect()
    }

    /// `(1/N) Σ_j f(σ_j)` per component.
    pub fn mean(&self) -> Vec<S> {
        let inv = 1.0 / self.n_samples() as f64;
        self.components
            .iter()
            .map(|c| c.iter().fold(S::zero(), |a, &v| a + v).scale(inv))
            .collect()
    }

    /// `max_j Σ_μ |f^μ(σ_j)|`.
    pub fn max_abs_sum(&self) -> f64 {
        (0..self.n_samples())
            .map(|j| {
                self.components
                    .iter()
                    .map(|c| c[j].value().abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter().map(|v| v.value().abs()))
            .fold(0.0, f64::max)
    }
}

fn check_grid(n: usize, modes: usize) -> Result<()> {
    check_pow2(n)?;
    let required = (4 * modes).max(4);
    if n < required {
        return Err(Error::GridTooSmall { n, required });
    }
    Ok(())
}

/// Samples of `P₋` or `P₊` on the `N`-grid.
pub fn eval_field<S: Scalar>(
    state: &StringState<S>,
    chirality: Chirality,
    n: usize,
) -> Result<FieldGrid<S>> {
    check_grid(n, state.truncation())?;
    let mut components = Vec::with_capacity(state.dim());
    for mu in 0..state.dim() {
        let samples = modes_to_grid_complex(&state.field_modes(chirality, mu), n)?;
        debug_assert!({
            let scale = samples
                .iter()
                .map(|z| z.re.value().abs())
                .fold(1e-300, f64::max);
            samples.iter().all(|z| z.im.value().abs() <= 1e-13 * scale)
        });
        components.push(samples.into_iter().map(|z| z.re).collect());
    }
    FieldGrid::new(components)
}

/// Largest imaginary residue of the evaluated `P±` samples relative to the
/// field's max-norm.
pub fn field_reality_defect(
    state: &StringState<f64>,
    chirality: Chirality,
    n: usize,
) -> Result<f64> {
    check_grid(n, state.truncation())?;
    let (mut im, mut re) = (0.0f64, 0.0f64);
    for mu in 0..state.dim() {
        for z in modes_to_grid_complex(&state.field_modes(chirality, mu), n)? {
            im = im.max(z.im.abs());
            re = re.max(z.re.abs());
        }
    }
    Ok(if re > 0.0 { im / re } else { im })
}

/// Samples of the embedding `X(σ) = x + i(4πT)^{-1/2} Σ_{m≠0} (α_m e^{imσ} + α̃_m e^{−imσ})/m`.
pub fn eval_position<S: Scalar>(state: &StringState<S>, n: usize) -> Result<FieldGrid<S>> {
    check_grid(n, state.truncation())?;
    let f = 1.0 / libm::sqrt(4.0 * PI * state.tension());
    let modes = state.truncation();
    let mut components = Vec::with_capacity(state.dim());
    for mu in 0..state.dim() {
        // e^{+imσ} coefficient: i/(m√(4πT)) (α_m − α̃_{−m})
        let positive: Vec<Complex<S>> = (1..=modes)
            .map(|m| {
                let a = state.left[m - 1][mu];
                let b = state.right[m - 1][mu].conj();
                let d = cscale(a - b, f / m as f64);
                Complex::new(-d.im, d.re)
            })
            .collect();
        let mv = ModeVector::real_from_positive(Orientation::Positive, state.x[mu], &positive);
        let samples = modes_to_grid_complex(&mv, n)?;
        components.push(samples.into_iter().map(|z| z.re).collect());
    }
    FieldGrid::new(components)
}

/// `∫ P dσ` with `P = √(T/2)(P₊ + P₋)`, by the periodic trapezoid rule.
pub fn com_momentum<S: Scalar>(state: &StringState<S>, n: usize) -> Result<Vec<S>> {
    let minus = eval_field(state, Chirality::Minus, n)?;
    let plus = eval_field(state, Chirality::Plus, n)?;
    let w = libm::sqrt(state.tension() / 2.0) * 2.0 * PI / n as f64;
    Ok((0..state.dim())
        .map(|mu| {
            minus
                .component(mu)
                .iter()
                .zip(plus.component(mu))
                .fold(S::zero(), |acc, (&a, &b)| acc + a + b)
                .scale(w)
        })
        .collect())
}

/// Samples of `η(P±, P±)`.
pub fn virasoro_density<S: Scalar>(
    state: &StringState<S>,
    chirality: Chirality,
    n: usize,
) -> Result<FieldGrid<S>> {
    let field = eval_field(state, chirality, n)?;
    let values = (0..n)
        .map(|j| {
            (0..state.dim()).fold(S::zero(), |acc, mu| {
                let v = field.component(mu)[j];
                acc + (v * v).scale(Metric::sign(mu))
            })
        })
        .collect();
    Ok(FieldGrid::scalar(values))
}

/// Parameters of [`random_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomStateParams {
    pub dim: usize,
    pub modes: usize,
    pub seed: u64,
    /// Oscillator amplitudes fall off as `e^{−m/decay}/m`.
    pub decay: f64,
    /// Lower bound imposed on `R±′`.
    pub margin: f64,
    pub tension: f64,
}

impl Default for RandomStateParams {
    fn default() -> Self {
        Self {
            dim: 4,
            modes: 8,
            seed: 0,
            decay: 0.5,
            margin: 0.2,
            tension: DEFAULT_TENSION,
        }
    }
}

const MAX_FRAME_RETRIES: usize = 32;

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

/// Minimum over σ of `Σ_{m≥1} 2 Re(c_m e^{imσ})`, located on a dense grid and
/// polished by Newton's method on the derivative.
fn trig_minimum(c: &[Complex<f64>]) -> f64 {
    let eval = |s: f64| {
        let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
        for (i, cm) in c.iter().enumerate() {
            let m = (i + 1) as f64;
            let (sn, cs) = libm::sincos(m * s);
            let re = cm.re * cs - cm.im * sn;
            let im = cm.re * sn + cm.im * cs;
            v += 2.0 * re;
            d -= 2.0 * m * im;
            dd -= 2.0 * m * m * re;
        }
        (v, d, dd)
    };
    let n = (64 * c.len()).max(4096);
    let (mut best_s, mut best) = (0.0, f64::INFINITY);
    for j in 0..n {
        let s = 2.0 * PI * j as f64 / n as f64;
        let v = eval(s).0;
        if v < best {
            best = v;
            best_s = s;
        }
    }
    let mut s = best_s;
    for _ in 0..20 {
        let (_, d, dd) = eval(s);
        if dd <= 0.0 {
            break;
        }
        let next = s - d / dd;
        let v = eval(next).0;
        if v > best {
            break;
        }
        best = v;
        s = next;
    }
    best
}

/// Draws a random state whose clocks `R±` have `min R±′ ≥ margin`.
///
/// `p` is drawn timelike and future-directed, which keeps `k·p` away from zero
/// for every null `k`. Oscillators are complex Gaussian with standard deviation
/// `∝ e^{−m/decay}/m` and each chirality is uniformly rescaled, if needed, so
/// that the monotonicity margin holds.
pub fn random_state(
    params: &RandomStateParams,
    frame: &LightlikeFrame,
) -> Result<StringState<f64>> {
    let RandomStateParams {
        dim,
        modes,
        seed,
        decay,
        margin,
        tension,
    } = *params;
    if dim < 2 || frame.dim() != dim {
        return Err(Error::InvalidParameter(
            "dimension must be ≥ 2 and match the frame",
        ));
    }
    if modes < 1 {
        return Err(Error::InvalidParameter("truncation must be at least 1"));
    }
    if !(decay > 0.0) || !(margin > 0.0 && margin < 1.0) || !(tension > 0.0) {
        return Err(Error::InvalidParameter(
            "need decay > 0, 0 < margin < 1, tension > 0",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng)).collect();

    let mut p = vec![0.0; dim];
    let mut kp = 0.0;
    for attempt in 0..=MAX_FRAME_RETRIES {
        for v in p.iter_mut().skip(1) {
            *v = 0.5 * standard_normal(&mut rng);
        }
        p[0] = libm::sqrt(p.iter().skip(1).map(|v| v * v).sum::<f64>() + 1.0);
        kp = frame.dot(&p);
        let scale = libm::sqrt(
            p.iter().map(|v| v * v).sum::<f64>() * frame.k().iter().map(|v| v * v).sum::<f64>(),
        );
        if kp.abs() > 1e-8 * scale {
            break;
        }
        if attempt == MAX_FRAME_RETRIES {
            return Err(Error::DegenerateFrame { kp });
        }
    }

    let base = kp.abs() / libm::sqrt(4.0 * PI * tension);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<Complex<f64>>> {
        (1..=modes)
            .map(|m| {
                let sd =
                    base * libm::exp(-(m as f64) / decay) / m as f64 / core::f64::consts::SQRT_2;
                (0..dim)
                    .map(|_| Complex::new(sd * standard_normal(rng), sd * standard_normal(rng)))
                    .collect()
            })
            .collect()
    };
    let mut left = draw(&mut rng);
    let mut right = draw(&mut rng);

    // R′ − 1 = (√(4πT)/k·p) · 2 Re Σ_{m≥1} (k·α_m) e^{±imσ}
    let coupling = libm::sqrt(4.0 * PI * tension) / kp;
    for osc in [&mut left, &mut right] {
        let c: Vec<Complex<f64>> = osc
            .iter()
            .map(|v| frame.dot_complex(v) * coupling)
            .collect();
        let min = trig_minimum(&c);
        if min < -(1.0 - margin) {
            let f = (1.0 - margin) / (-min) * (1.0 - 1e-12);
            for v in osc.iter_mut().flat_map(|v| v.iter_mut()) {
                *v *= f;
            }
        }
    }

    StringState::new(tension, x, p, left, right)
}
