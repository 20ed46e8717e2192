//! Poisson brackets on the truncated mode phase space.
//!
//! States are flattened into a real chart `y = (x, p, Re α_m, Im α_m, Re α̃_m,
//! Im α̃_m)`. The pairing is `{x^μ, p^ν} = η^{μν}` and
//! `{Re α_m^μ, Im α_m^ν} = (m/2) η^{μν}` (likewise for `α̃`), which is
//! `{α_m^μ, α_n^ν} = −i m η^{μν} δ_{m+n}`. Gradients of observables are
//! propagated with dual numbers through the same code that evaluates them and
//! cross-checked against central differences.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;

use crate::ddf::{ddf_invariant, DdfInvariantSpec};
use crate::error::{Error, Result};
use crate::phase_space::{
    eval_field, eval_position, virasoro_density, Chirality, LightlikeFrame, Metric, StringState,
};
use crate::pohlmeyer::{pohlmeyer_invariant, InvariantSpec};
use crate::scalar::{cis, Dual, Scalar};

/// Threshold for [`invariance_report`] rows.
pub const INVARIANCE_THRESHOLD: f64 = 1e-5;
/// Propagated and finite-difference gradients farther apart than this signal
/// a non-smooth point or an error.
pub const GRADIENT_MISMATCH_LIMIT: f64 = 1e-3;

/// Index bookkeeping for the real chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartLayout {
    pub dim: usize,
    pub modes: usize,
}

impl ChartLayout {
    pub fn of<S: Scalar>(state: &StringState<S>) -> Self {
        Self {
            dim: state.dim(),
            modes: state.truncation(),
        }
    }

    pub fn len(&self) -> usize {
        2 * self.dim + 4 * self.modes * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x(&self, mu: usize) -> usize {
        mu
    }

    #[inline]
    pub fn p(&self, mu: usize) -> usize {
        self.dim + mu
    }

    /// Index of `Re α_m^μ` (`imag = false`) or `Im α_m^μ`.
    #[inline]
    pub fn oscillator(&self, chirality: Chirality, m: usize, mu: usize, imag: bool) -> usize {
        let sector = match chirality {
            Chirality::Minus => 0,
            Chirality::Plus => 1,
        };
        2 * self.dim
            + sector * 2 * self.modes * self.dim
            + (m - 1) * 2 * self.dim
            + usize::from(imag) * self.dim
            + mu
    }

    /// Human-readable coordinate name.
    pub fn name(&self, i: usize) -> String {
        let d = self.dim;
        if i < d {
            return format!("x{i}");
        }
        if i < 2 * d {
            return format!("p{}", i - d);
        }
        let r = i - 2 * d;
        let per = 2 * self.modes * d;
        let tilde = if r / per == 1 { "~" } else { "" };
        let r = r % per;
        let m = r / (2 * d) + 1;
        let part = if (r % (2 * d)) / d == 1 { "Im" } else { "Re" };
        format!("{part} a{tilde}{m}^{}", r % d)
    }
}

/// Flattens a state into chart coordinates.
pub fn chart<S: Scalar>(state: &StringState<S>) -> Vec<S> {
    let layout = ChartLayout::of(state);
    let mut y = vec![S::zero(); layout.len()];
    for mu in 0..layout.dim {
        y[layout.x(mu)] = state.x()[mu];
        y[layout.p(mu)] = state.p()[mu];
    }
    for ch in Chirality::BOTH {
        for (i, v) in state.oscillators(ch).iter().enumerate() {
            for mu in 0..layout.dim {
                y[layout.oscillator(ch, i + 1, mu, false)] = v[mu].re;
                y[layout.oscillator(ch, i + 1, mu, true)] = v[mu].im;
            }
        }
    }
    y
}

/// Rebuilds a state from chart coordinates.
pub fn unchart<S: Scalar>(layout: ChartLayout, tension: f64, y: &[S]) -> Result<StringState<S>> {
    if y.len() != layout.len() {
        return Err(Error::Shape("chart vector has wrong length"));
    }
    let d = layout.dim;
    let x = (0..d).map(|mu| y[layout.x(mu)]).collect();
    let p = (0..d).map(|mu| y[layout.p(mu)]).collect();
    let osc = |ch| -> Vec<Vec<Complex<S>>> {
        (1..=layout.modes)
            .map(|m| {
                (0..d)
                    .map(|mu| {
                        Complex::new(
                            y[layout.oscillator(ch, m, mu, false)],
                            y[layout.oscillator(ch, m, mu, true)],
                        )
                    })
                    .collect()
            })
            .collect()
    };
    StringState::new(tension, x, p, osc(Chirality::Minus), osc(Chirality::Plus))
}

/// Sparse antisymmetric pairing `Ω` on chart coordinates, stored as the
/// upper entries `Ω_{ij} = w` (so `Ω_{ji} = −w`).
#[derive(Debug, Clone, PartialEq)]
pub struct BracketMatrix {
    layout: ChartLayout,
    pairs: Vec<(usize, usize, f64)>,
}

impl BracketMatrix {
    pub fn new(layout: ChartLayout) -> Self {
        let mut pairs = Vec::new();
        for mu in 0..layout.dim {
            pairs.push((layout.x(mu), layout.p(mu), Metric::sign(mu)));
        }
        for ch in Chirality::BOTH {
            for m in 1..=layout.modes {
                for mu in 0..layout.dim {
                    pairs.push((
                        layout.oscillator(ch, m, mu, false),
                        layout.oscillator(ch, m, mu, true),
                        0.5 * m as f64 * Metric::sign(mu),
                    ));
                }
            }
        }
        Self { layout, pairs }
    }

    pub fn layout(&self) -> ChartLayout {
        self.layout
    }

    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    /// `Ω_{ij}`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.pairs
            .iter()
            .find_map(|&(a, b, w)| {
                if (a, b) == (i, j) {
                    Some(w)
                } else if (a, b) == (j, i) {
                    Some(-w)
                } else {
                    None
                }
            })
            .unwrap_or(0.0)
    }

    /// Operator norm, `max(1, M/2)`.
    pub fn norm(&self) -> f64 {
        self.pairs.iter().map(|p| p.2.abs()).fold(0.0, f64::max)
    }

    /// `u·Ω·v` for complex chart covectors (bilinear, no conjugation).
    pub fn pair(&self, u: &Gradient, v: &Gradient) -> Complex<f64> {
        let mut acc = Complex::zero();
        for &(i, j, w) in &self.pairs {
            let (ui, uj) = (u.component(i), u.component(j));
            let (vi, vj) = (v.component(i), v.component(j));
            acc += (ui * vj - uj * vi) * w;
        }
        acc
    }
}

/// A band-limited real test function `cos(kσ)` or `sin(kσ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TestFunction {
    pub harmonic: usize,
    pub sine: bool,
}

impl TestFunction {
    pub fn value(&self, s: f64) -> f64 {
        let a = self.harmonic as f64 * s;
        if self.sine {
            libm::sin(a)
        } else {
            libm::cos(a)
        }
    }

    /// `∮ φψ dσ`.
    pub fn overlap(&self, other: &TestFunction) -> f64 {
        if self.sine != other.sine || self.harmonic != other.harmonic {
            return 0.0;
        }
        match (self.harmonic, self.sine) {
            (0, true) => 0.0,
            (0, false) => 2.0 * PI,
            _ => PI,
        }
    }

    /// `cos kσ` and `sin kσ` for `k = 1..=m`.
    pub fn basis(m: usize) -> Vec<TestFunction> {
        (1..=m)
            .flat_map(|k| {
                [
                    TestFunction {
                        harmonic: k,
                        sine: false,
                    },
                    TestFunction {
                        harmonic: k,
                        sine: true,
                    },
                ]
            })
            .collect()
    }

    fn id(&self) -> String {
        format!("{}{}", if self.sine { "sin" } else { "cos" }, self.harmonic)
    }
}

/// A complex function on phase space with an evaluation procedure built
/// from the library's operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// A single chart coordinate.
    Coordinate(usize),
    /// `α_m^μ` or `α̃_m^μ` for any integer `m`.
    Oscillator {
        chirality: Chirality,
        m: i64,
        mu: usize,
    },
    Pohlmeyer {
        spec: InvariantSpec,
        n_grid: usize,
    },
    /// `L_m = ½∮ e^{−imσ} η(P₋,P₋)` or `L̃_m = ½∮ e^{+imσ} η(P₊,P₊)`.
    Virasoro {
        chirality: Chirality,
        m: i64,
        n_grid: usize,
    },
    Ddf {
        frame: LightlikeFrame,
        spec: DdfInvariantSpec,
        n_grid: usize,
    },
    /// `∮ φ(σ) e_μ X^μ(σ) dσ`
    SmearedPosition {
        test: TestFunction,
        e: Vec<f64>,
        n_grid: usize,
    },
    /// `∮ φ(σ) e_μ P^μ(σ) dσ` with `P = √(T/2)(P₊ + P₋)`
    SmearedMomentum {
        test: TestFunction,
        e: Vec<f64>,
        n_grid: usize,
    },
    Product(Box<Observable>, Box<Observable>),
}

/// Smallest admissible power-of-two grid for quadratic densities, `≥ 4M`.
pub fn density_grid(modes: usize) -> usize {
    (4 * modes).max(16).next_power_of_two()
}

impl Observable {
    pub fn pohlmeyer(spec: InvariantSpec) -> Self {
        Observable::Pohlmeyer { spec, n_grid: 128 }
    }

    pub fn ddf(frame: LightlikeFrame, spec: DdfInvariantSpec) -> Self {
        Observable::Ddf {
            frame,
            spec,
            n_grid: 512,
        }
    }

    pub fn virasoro(chirality: Chirality, m: i64, modes: usize) -> Self {
        Observable::Virasoro {
            chirality,
            m,
            n_grid: density_grid(modes),
        }
    }

    pub fn product(a: Observable, b: Observable) -> Self {
        Observable::Product(Box::new(a), Box::new(b))
    }

    /// Stable identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            Observable::Coordinate(i) => format!("y[{i}]"),
            Observable::Oscillator { chirality, m, mu } => {
                format!(
                    "alpha{}_{m}^{mu}",
                    if *chirality == Chirality::Plus {
                        "~"
                    } else {
                        ""
                    }
                )
            }
            Observable::Pohlmeyer { spec, .. } => format!(
                "Z{}{}{:?}",
                if spec.symmetrized { "sym" } else { "" },
                spec.chirality.symbol(),
                spec.indices
            ),
            Observable::Virasoro { chirality, m, .. } => {
                format!(
                    "L{}_{m}",
                    if *chirality == Chirality::Plus {
                        "~"
                    } else {
                        ""
                    }
                )
            }
            Observable::Ddf { spec, .. } => format!(
                "D{}[{:?}|{:?}]N={}",
                if spec.is_control() { "ctl" } else { "" },
                spec.left(),
                spec.right(),
                spec.level()
            ),
            Observable::SmearedPosition { test, e, .. } => format!("X[{}]{:?}", test.id(), e),
            Observable::SmearedMomentum { test, e, .. } => format!("P[{}]{:?}", test.id(), e),
            Observable::Product(a, b) => format!("({})*({})", a.id(), b.id()),
        }
    }

    pub fn eval<S: Scalar>(&self, state: &StringState<S>) -> Result<Complex<S>> {
        let real = |v: S| Complex::new(v, S::zero());
        match self {
            Observable::Coordinate(i) => {
                let y = chart(state);
                y.get(*i).copied().map(real).ok_or(Error::IndexOutOfRange {
                    index: *i,
                    dim: y.len(),
                })
            }
            Observable::Oscillator { chirality, m, mu } => {
                if *mu >= state.dim() {
                    return Err(Error::IndexOutOfRange {
                        index: *mu,
                        dim: state.dim(),
                    });
                }
                Ok(state.mode(*chirality, *m)[*mu])
            }
            Observable::Pohlmeyer { spec, n_grid } => {
                let field = eval_field(state, spec.chirality, *n_grid)?;
                pohlmeyer_invariant(&field, spec).map(real)
            }
            Observable::Virasoro {
                chirality,
                m,
                n_grid,
            } => {
                if m.unsigned_abs() as usize > state.truncation() {
                    return Err(Error::ModeOutOfRange {
                        mode: *m,
                        max: state.truncation(),
                    });
                }
                let density = virasoro_density(state, *chirality, *n_grid)?;
                let freq = chirality.orientation().sign() * -(*m as f64);
                let w = PI / *n_grid as f64;
                let acc = density.component(0).iter().enumerate().fold(
                    Complex::<S>::zero(),
                    |acc, (j, &v)| {
                        let e = cis(S::cst(freq * 2.0 * PI * j as f64 / *n_grid as f64));
                        acc + Complex::new(e.re * v, e.im * v)
                    },
                );
                Ok(Complex::new(acc.re.scale(w), acc.im.scale(w)))
            }
            Observable::Ddf {
                frame,
                spec,
                n_grid,
            } => ddf_invariant(state, frame, spec, *n_grid),
            Observable::SmearedPosition { test, e, n_grid } => {
                let x = eval_position(state, *n_grid)?;
                smear(x.components(), test, e, *n_grid, 1.0).map(real)
            }
            Observable::SmearedMomentum { test, e, n_grid } => {
                let minus = eval_field(state, Chirality::Minus, *n_grid)?;
                let plus = eval_field(state, Chirality::Plus, *n_grid)?;
                let total: Vec<Vec<S>> = minus
                    .components()
                    .iter()
                    .zip(plus.components())
                    .map(|(a, b)| a.iter().zip(b).map(|(&u, &v)| u + v).collect())
                    .collect();
                smear(&total, test, e, *n_grid, libm::sqrt(state.tension() / 2.0)).map(real)
            }
            Observable::Product(a, b) => Ok(a.eval(state)? * b.eval(state)?),
        }
    }
}

fn smear<S: Scalar>(
    components: &[Vec<S>],
    test: &TestFunction,
    e: &[f64],
    n: usize,
    factor: f64,
) -> Result<S> {
    if e.len() != components.len() {
        return Err(Error::Shape("polarization and field dimensions differ"));
    }
    let w = 2.0 * PI / n as f64 * factor;
    let mut acc = S::zero();
    for j in 0..n {
        let phi = test.value(2.0 * PI * j as f64 / n as f64);
        for (c, &em) in components.iter().zip(e) {
            if em != 0.0 {
                acc += c[j].scale(phi * em);
            }
        }
    }
    Ok(acc.scale(w))
}

/// Complex chart covector `∂f/∂y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Gradient {
    #[inline]
    pub fn component(&self, i: usize) -> Complex<f64> {
        Complex::new(self.re[i], self.im[i])
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.re.iter().chain(&self.im).map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.re
            .iter()
            .chain(&self.im)
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Forward-mode gradient, one dual-number pass per chart coordinate.
pub fn gradient_propagated(obs: &Observable, state: &StringState<f64>) -> Result<Gradient> {
    let layout = ChartLayout::of(state);
    let y = chart(state);
    let mut yd: Vec<Dual> = y.iter().map(|&v| Dual::constant(v)).collect();
    let mut re = Vec::with_capacity(y.len());
    let mut im = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        yd[i].eps = 1.0;
        let value = obs.eval(&unchart(layout, state.tension(), &yd)?)?;
        yd[i].eps = 0.0;
        re.push(value.re.eps);
        im.push(value.im.eps);
    }
    Ok(Gradient { re, im })
}

/// Central differences with `h = 1e-5·(1 + |y_i|)`.
pub fn gradient_finite_difference(obs: &Observable, state: &StringState<f64>) -> Result<Gradient> {
    let layout = ChartLayout::of(state);
    let mut y = chart(state);
    let mut re = Vec::with_capacity(y.len());
    let mut im = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let y0 = y[i];
        let h = 1e-5 * (1.0 + y0.abs());
        y[i] = y0 + h;
        let up = obs.eval(&unchart(layout, state.tension(), &y)?)?;
        y[i] = y0 - h;
        let down = obs.eval(&unchart(layout, state.tension(), &y)?)?;
        y[i] = y0;
        let d = (up - down) / (2.0 * h);
        re.push(d.re);
        im.push(d.im);
    }
    Ok(Gradient { re, im })
}

/// Both gradients and their largest disagreement relative to the gradient's
/// max-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub propagated: Gradient,
    pub finite_difference: Gradient,
    pub mismatch: f64,
    pub worst_coordinate: usize,
}

pub fn gradient_check(obs: &Observable, state: &StringState<f64>) -> Result<GradientCheck> {
    let propagated = gradient_propagated(obs, state)?;
    let finite_difference = gradient_finite_difference(obs, state)?;
    let scale = propagated
        .max_abs()
        .max(finite_difference.max_abs())
        .max(f64::MIN_POSITIVE);
    let (mut mismatch, mut worst_coordinate) = (0.0, 0);
    for i in 0..propagated.len() {
        let d = (propagated.component(i) - finite_difference.component(i)).norm() / scale;
        if d > mismatch {
            mismatch = d;
            worst_coordinate = i;
        }
    }
    Ok(GradientCheck {
        propagated,
        finite_difference,
        mismatch,
        worst_coordinate,
    })
}

/// Propagated gradient, rejected if central differences disagree beyond
/// [`GRADIENT_MISMATCH_LIMIT`].
pub fn gradient(obs: &Observable, state: &StringState<f64>) -> Result<Gradient> {
    let check = gradient_check(obs, state)?;
    if check.mismatch > GRADIENT_MISMATCH_LIMIT {
        let i = check.worst_coordinate;
        return Err(Error::GradientMismatch {
            coordinate: i,
            propagated: check.propagated.component(i).norm(),
            finite_difference: check.finite_difference.component(i).norm(),
        });
    }
    Ok(check.propagated)
}

/// `{f, g} = ∇f · Ω · ∇g` from already computed gradients.
pub fn bracket_from_gradients(omega: &BracketMatrix, df: &Gradient, dg: &Gradient) -> Complex<f64> {
    omega.pair(df, dg)
}

/// `{f, g}` at `state`.
pub fn bracket(f: &Observable, g: &Observable, state: &StringState<f64>) -> Result<Complex<f64>> {
    let omega = BracketMatrix::new(ChartLayout::of(state));
    let df = gradient(f, state)?;
    let dg = gradient(g, state)?;
    Ok(omega.pair(&df, &dg))
}

/// `L_m` (minus) or `L̃_m` (plus) as an observable; requires `|m| ≤ M`.
pub fn virasoro_mode(state: &StringState<f64>, chirality: Chirality, m: i64) -> Result<Observable> {
    if m.unsigned_abs() as usize > state.truncation() {
        return Err(Error::ModeOutOfRange {
            mode: m,
            max: state.truncation(),
        });
    }
    Ok(Observable::virasoro(chirality, m, state.truncation()))
}

/// One `{obs, L_m}` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceRow {
    pub observable: String,
    pub m: i64,
    pub chirality: Chirality,
    pub residue: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
    pub max_residue: f64,
    pub pass: bool,
}

/// `|{obs, L_m}| / (‖∇obs‖·‖∇L_m‖·‖Ω‖)` for `|m| ≤ m_window` and both
/// chiralities.
pub fn invariance_report(
    obs: &Observable,
    state: &StringState<f64>,
    m_window: usize,
    threshold: f64,
) -> Result<InvarianceReport> {
    if 2 * m_window > state.truncation() {
        return Err(Error::InvalidParameter("m window must not exceed M/2"));
    }
    let omega = BracketMatrix::new(ChartLayout::of(state));
    let dobs = gradient(obs, state)?;
    let id = obs.id();
    let mut rows = Vec::new();
    for chirality in Chirality::BOTH {
        for m in -(m_window as i64)..=m_window as i64 {
            let l = virasoro_mode(state, chirality, m)?;
            let dl = gradient_propagated(&l, state)?;
            let scale = dobs.norm() * dl.norm() * omega.norm();
            let residue = if scale > 0.0 {
                omega.pair(&dobs, &dl).norm() / scale
            } else {
                0.0
            };
            rows.push(InvarianceRow {
                observable: id.clone(),
                m,
                chirality,
                residue,
                pass: residue <= threshold,
            });
        }
    }
    let max_residue = rows.iter().map(|r| r.residue).fold(0.0, f64::max);
    Ok(InvarianceReport {
        pass: rows.iter().all(|r| r.pass),
        max_residue,
        rows,
    })
}
