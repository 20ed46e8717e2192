//! Pohlmeyer invariants: iterated integrals of a chiral field and the traced
//! Wilson loop of a constant connection they expand.
//!
//! Ordering is `σ₁ ≤ … ≤ σ_n` with `μ₁` on the innermost integral, so
//! `W = Σ_n Σ_μ Z^{μ₁⋯μ_n} Tr(A_{μ₁}⋯A_{μ_n})`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use crate::ddf::{ddf_modes, reconstruct_field};
use crate::error::{Error, Result};
use crate::numerics::circle::CircleMap;
use crate::numerics::integrate::{simplex_iterated_integral, PolyGrid};
use crate::numerics::modes::TrigInterpolant;
use crate::phase_space::{Chirality, FieldGrid, LightlikeFrame, StringState};
use crate::reparam::pull_back;
use crate::scalar::Scalar;

/// Index list of a Pohlmeyer invariant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InvariantSpec {
    pub chirality: Chirality,
    pub indices: Vec<usize>,
    /// Average over cyclic rotations of `indices`.
    pub symmetrized: bool,
}

impl InvariantSpec {
    pub fn new(chirality: Chirality, indices: Vec<usize>, symmetrized: bool) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter("index list must be nonempty"));
        }
        Ok(Self {
            chirality,
            indices,
            symmetrized,
        })
    }

    pub fn raw(chirality: Chirality, indices: Vec<usize>) -> Self {
        Self {
            chirality,
            indices,
            symmetrized: false,
        }
    }

    pub fn degree(&self) -> usize {
        self.indices.len()
    }
}

fn raw_invariant<S: Scalar>(field: &FieldGrid<S>, indices: &[usize]) -> Result<S> {
    let factors: Vec<&[S]> = indices.iter().map(|&mu| field.component(mu)).collect();
    simplex_iterated_integral(&factors)
}

/// `Z^{μ₁⋯μ_n}` of a sampled field, raw or cyclically averaged.
pub fn pohlmeyer_invariant<S: Scalar>(field: &FieldGrid<S>, spec: &InvariantSpec) -> Result<S> {
    if spec.indices.is_empty() {
        return Err(Error::InvalidParameter("index list must be nonempty"));
    }
    let dim = field.n_components();
    if let Some(&bad) = spec.indices.iter().find(|&&mu| mu >= dim) {
        return Err(Error::IndexOutOfRange { index: bad, dim });
    }
    if !spec.symmetrized {
        return raw_invariant(field, &spec.indices);
    }
    let n = spec.indices.len();
    let mut rotated = spec.indices.clone();
    let mut sum = S::zero();
    for _ in 0..n {
        sum += raw_invariant(field, &rotated)?;
        rotated.rotate_left(1);
    }
    Ok(sum.scale(1.0 / n as f64))
}

/// `Z` evaluated on the field reconstructed from DDF modes `|m| ≤ m_out`.
pub fn pohlmeyer_via_ddf<S: Scalar>(
    state: &StringState<S>,
    frame: &LightlikeFrame,
    spec: &InvariantSpec,
    m_out: usize,
    n: usize,
) -> Result<S> {
    let modes = ddf_modes(state, frame, spec.chirality, m_out, n)?;
    pohlmeyer_invariant(&reconstruct_field(&modes, n)?, spec)
}

/// `Z` on a field and on its weight-one pullback by `map`.
pub fn reparam_check(
    field: &FieldGrid<f64>,
    map: &CircleMap<f64>,
    spec: &InvariantSpec,
) -> Result<(f64, f64)> {
    let direct = pohlmeyer_invariant(field, spec)?;
    let pulled = pohlmeyer_invariant(&pull_back(field, map)?, spec)?;
    Ok((direct, pulled))
}

/// Constant connection `A_μ` (complex `d×d`) and truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct WilsonConfig {
    matrices: Vec<DMatrix<Complex<f64>>>,
    order: usize,
}

impl WilsonConfig {
    pub fn new(matrices: Vec<DMatrix<Complex<f64>>>, order: usize) -> Result<Self> {
        let d = matrices
            .first()
            .ok_or(Error::InvalidParameter("connection has no components"))?
            .nrows();
        if d == 0 || matrices.iter().any(|a| a.nrows() != d || a.ncols() != d) {
            return Err(Error::Shape(
                "connection matrices must be square and equally sized",
            ));
        }
        if order == 0 {
            return Err(Error::InvalidParameter("series order must be at least 1"));
        }
        if matrices
            .iter()
            .flat_map(|a| a.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParameter(
                "connection matrices must be finite",
            ));
        }
        Ok(Self { matrices, order })
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrices(&self) -> &[DMatrix<Complex<f64>>] {
        &self.matrices
    }

    /// `max_μ ‖A_μ‖_F`, an upper bound on the operator norms.
    pub fn norm(&self) -> f64 {
        self.matrices.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// Truncated Wilson loop with per-order traces.
#[derive(Debug, Clone, PartialEq)]
pub struct WilsonLoop {
    pub value: Complex<f64>,
    /// `orders[n] = Σ_μ Z^{μ₁⋯μ_n} Tr(A_{μ₁}⋯A_{μ_n})`
    pub orders: Vec<Complex<f64>>,
    pub remainder_bound: f64,
}

/// `d·e^x·x^{n+1}/(n+1)!`, bounding `|Σ_{k>n} Tr U_k|` when `‖U_k‖ ≤ x^k/k!`.
pub fn series_tail_bound(x: f64, d: usize, order: usize) -> f64 {
    let mut term = 1.0;
    for k in 1..=order + 1 {
        term *= x / k as f64;
    }
    d as f64 * libm::exp(x) * term
}

/// Complex polynomial-carry grid, stored as two real ones.
#[derive(Clone)]
struct CPoly {
    re: PolyGrid<f64>,
    im: PolyGrid<f64>,
}

impl CPoly {
    fn constant(n: usize, z: Complex<f64>) -> Self {
        Self {
            re: PolyGrid::constant(n, z.re),
            im: PolyGrid::constant(n, z.im),
        }
    }

    fn zeros(n: usize, degree: usize) -> Self {
        Self {
            re: PolyGrid::zeros(n, degree),
            im: PolyGrid::zeros(n, degree),
        }
    }

    /// `self += u·m` for a periodic complex grid `m`.
    fn add_product(&mut self, u: &CPoly, m_re: &[f64], m_im: &[f64]) {
        for k in 0..=u.re.degree() {
            let (ur, ui) = (&u.re.coeffs()[k], &u.im.coeffs()[k]);
            let out_re = &mut self.re.coeffs_mut()[k];
            for j in 0..ur.len() {
                out_re[j] += ur[j] * m_re[j] - ui[j] * m_im[j];
            }
            let out_im = &mut self.im.coeffs_mut()[k];
            for j in 0..ur.len() {
                out_im[j] += ur[j] * m_im[j] + ui[j] * m_re[j];
            }
        }
    }

    fn integrate(&self) -> Result<Self> {
        Ok(Self {
            re: self.re.integrate()?,
            im: self.im.integrate()?,
        })
    }

    fn value_at_end(&self) -> Complex<f64> {
        Complex::new(self.re.value_at_end(), self.im.value_at_end())
    }
}

/// Path-ordered exponential trace by the matrix recursion
/// `U_n(σ) = ∫₀^σ U_{n−1}(s) Σ_μ A_μ P^μ(s) ds`, one cumulative integral per
/// order and never enumerating index tuples.
pub fn wilson_loop(field: &FieldGrid<f64>, config: &WilsonConfig) -> Result<WilsonLoop> {
    if config.matrices.len() != field.n_components() {
        return Err(Error::Shape("connection and field dimensions differ"));
    }
    let n = field.n_samples();
    let d = config.matrix_dim();

    // M(σ_j) entries as periodic grids
    let mut m_re = vec![vec![vec![0.0; n]; d]; d];
    let mut m_im = vec![vec![vec![0.0; n]; d]; d];
    for (mu, a) in config.matrices.iter().enumerate() {
        let p = field.component(mu);
        for r in 0..d {
            for c in 0..d {
                let z = a[(r, c)];
                if z.is_zero() {
                    continue;
                }
                for j in 0..n {
                    m_re[r][c][j] += z.re * p[j];
                    m_im[r][c][j] += z.im * p[j];
                }
            }
        }
    }

    let mut u: Vec<Vec<CPoly>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    CPoly::constant(
                        n,
                        if r == c {
                            Complex::new(1.0, 0.0)
                        } else {
                            Complex::zero()
                        },
                    )
                })
                .collect()
        })
        .collect();
    let mut orders = vec![Complex::new(d as f64, 0.0)];
    for _ in 1..=config.order {
        let degree = u[0][0].re.degree();
        let mut next = Vec::with_capacity(d);
        for r in 0..d {
            let mut row = Vec::with_capacity(d);
            for c in 0..d {
                let mut acc = CPoly::zeros(n, degree);
                for k in 0..d {
                    acc.add_product(&u[r][k], &m_re[k][c], &m_im[k][c]);
                }
                row.push(acc.integrate()?);
            }
            next.push(row);
        }
        u = next;
        orders.push((0..d).map(|i| u[i][i].value_at_end()).sum());
    }

    let x = 2.0 * PI * field.max_abs_sum() * config.norm();
    Ok(WilsonLoop {
        value: orders.iter().sum(),
        remainder_bound: series_tail_bound(x, d, config.order),
        orders,
    })
}

/// `Tr P exp ∮ A_μ P^μ` by classical RK4 on `U′ = U·M(σ)`, with `P`
/// evaluated off-grid through its trigonometric interpolant.
pub fn wilson_loop_ode(
    field: &FieldGrid<f64>,
    config: &WilsonConfig,
    steps: usize,
) -> Result<Complex<f64>> {
    if config.matrices.len() != field.n_components() {
        return Err(Error::Shape("connection and field dimensions differ"));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("step count must be positive"));
    }
    let interps = field
        .components()
        .iter()
        .map(|c| TrigInterpolant::new(c))
        .collect::<Result<Vec<_>>>()?;
    let d = config.matrix_dim();
    let connection = |s: f64| -> DMatrix<Complex<f64>> {
        interps
            .iter()
            .zip(&config.matrices)
            .fold(DMatrix::zeros(d, d), |acc, (p, a)| {
                acc + a * Complex::new(p.eval(s), 0.0)
            })
    };
    let h = 2.0 * PI / steps as f64;
    let mut u = DMatrix::<Complex<f64>>::identity(d, d);
    for i in 0..steps {
        let s = i as f64 * h;
        let (m0, m1, m2) = (connection(s), connection(s + 0.5 * h), connection(s + h));
        let hh = Complex::new(h, 0.0);
        let k1 = &u * &m0;
        let k2 = (&u + &k1 * (hh * 0.5)) * &m1;
        let k3 = (&u + &k2 * (hh * 0.5)) * &m1;
        let k4 = (&u + &k3 * hh) * &m2;
        u += (k1 + k2 * Complex::new(2.0, 0.0) + k3 * Complex::new(2.0, 0.0) + k4) * (hh / 6.0);
    }
    Ok(u.trace())
}

/// Per-order traces `Σ Z^{μ₁⋯μ_n} Tr(A_{μ₁}⋯A_{μ_n})` for `n ≤ max_order`,
/// assembled by enumerating every index tuple.
pub fn wilson_enumerated(
    field: &FieldGrid<f64>,
    config: &WilsonConfig,
    max_order: usize,
) -> Result<Vec<Complex<f64>>> {
    let dim = field.n_components();
    if config.matrices.len() != dim {
        return Err(Error::Shape("connection and field dimensions differ"));
    }
    let d = config.matrix_dim();
    let mut orders = vec![Complex::new(d as f64, 0.0)];
    for order in 1..=max_order {
        let mut total = Complex::zero();
        let mut idx = vec![0usize; order];
        loop {
            let z = raw_invariant(field, &idx)?;
            let product = idx
                .iter()
                .fold(DMatrix::<Complex<f64>>::identity(d, d), |acc, &mu| {
                    acc * &config.matrices[mu]
                });
            total += product.trace() * z;
            // odometer increment
            let mut pos = order;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < dim {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
        orders.push(total);
    }
    Ok(orders)
}
