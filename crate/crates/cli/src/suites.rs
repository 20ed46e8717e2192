//! Verification suites. Each suite maps a set of states to report rows.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use stringinv_core::ddf::{
    ddf_modes, reconstruct_field, reconstruct_field_direct, DdfInvariantSpec,
};
use stringinv_core::numerics::circle::{invert_monotone, CircleMap};
use stringinv_core::numerics::modes::{sigma, spectral_derivative, TrigInterpolant};
use stringinv_core::pohlmeyer::{
    pohlmeyer_invariant, wilson_enumerated, wilson_loop, wilson_loop_ode,
};
use stringinv_core::poisson::{
    gradient, gradient_check, gradient_propagated, invariance_report, BracketMatrix, ChartLayout,
    Observable, TestFunction,
};
use stringinv_core::{
    com_momentum, compute_r, eval_field, field_reality_defect, random_diffeo, Chirality, FieldGrid,
    InvariantSpec, LightlikeFrame, Metric, StringState, WilsonConfig,
};

use crate::error::CliError;
use crate::io::state_to_json;
use crate::report::{digest, Row};

pub const SUITES: &[&str] = &[
    "reality",
    "periodicity",
    "transversality",
    "shuffle",
    "reparam",
    "substitution",
    "poisson",
    "witt",
    "negative-controls",
    "canonical",
    "wilson",
    "reconstruction",
    "gradient",
];

/// Default tolerance per check family; keys are valid `--tolerance` names.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("canonical", 1e-8),
    ("gradient", 1e-5),
    ("negative-controls", 1e-2),
    ("negative-controls.count", 3.0),
    ("periodicity.derivative", 1e-11),
    ("periodicity.inverse", 1e-10),
    ("periodicity.inverse-derivative", 1e-9),
    ("periodicity.winding", 1e-12),
    ("poisson", 1e-5),
    ("reality.conjugation", 1e-11),
    ("reality.field", 1e-13),
    ("reality.mean", 1e-12),
    ("reality.momentum", 1e-12),
    ("reality.parseval", 1e-12),
    ("reconstruction", 1e-6),
    ("reconstruction.monotone", 1.0),
    ("reparam.raw", 1e-8),
    ("reparam.rotation", 1e-8),
    ("shuffle.deg2", 1e-10),
    ("shuffle.deg3", 1e-9),
    ("substitution", 1e-6),
    ("transversality", 1e-10),
    ("transversality.convergence", 1e-11),
    ("wilson.assembly", 1e-9),
    ("wilson.remainder", 1.0),
    ("witt", 1e-5),
];

/// Reconstruction errors below this are treated as converged when checking
/// monotone improvement in `M_out`.
pub const RECONSTRUCTION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub frame: Vec<f64>,
    pub n: usize,
    pub m_out: usize,
    /// Virasoro modes `|m| ≤ window`.
    pub window: usize,
    pub diffeos: usize,
    pub rotations: usize,
    pub diffeo_harmonics: usize,
    pub diffeo_amplitude: f64,
    pub wilson_dim: usize,
    pub wilson_order: usize,
    pub wilson_norm: f64,
    /// Seed for diffeomorphisms and connections.
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            frame: LightlikeFrame::standard(4).k().to_vec(),
            n: 4096,
            m_out: 512,
            window: 4,
            diffeos: 10,
            rotations: 10,
            diffeo_harmonics: 3,
            diffeo_amplitude: 0.5,
            wilson_dim: 2,
            wilson_order: 12,
            wilson_norm: 0.25,
            seed: 0,
            tolerances: BTreeMap::new(),
        }
    }
}

impl SuiteConfig {
    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .expect("known tolerance key")
        })
    }

    pub fn set_tolerance(&mut self, key: &str, value: f64) -> Result<(), CliError> {
        if !DEFAULT_TOLERANCES.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Usage(format!("unknown tolerance name '{key}'")));
        }
        if !(value > 0.0) || !value.is_finite() {
            return Err(CliError::Usage(format!(
                "tolerance '{key}' must be positive and finite"
            )));
        }
        self.tolerances.insert(key.into(), value);
        Ok(())
    }

    pub fn lightlike_frame(&self) -> Result<LightlikeFrame, CliError> {
        Ok(LightlikeFrame::new(self.frame.clone())?)
    }
}

/// A state under test together with its content digest.
#[derive(Debug, Clone)]
pub struct Subject {
    pub label: String,
    pub state: StringState<f64>,
    pub digest: String,
}

impl Subject {
    pub fn new(label: impl Into<String>, state: StringState<f64>) -> Self {
        let digest = digest(&[state_to_json(&state)]);
        Self {
            label: label.into(),
            state,
            digest,
        }
    }
}

fn tag(name: &str, ch: Chirality) -> String {
    format!("{name}[{}]", ch.symbol())
}

/// Index lists used for the substitution, reparameterization and shuffle
/// spot checks, by degree.
pub fn index_lists(degree: usize) -> Vec<Vec<usize>> {
    match degree {
        1 => vec![vec![0], vec![1], vec![2], vec![3]],
        2 => vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0], vec![1, 1]],
        3 => vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 1], vec![0, 0, 2]],
        4 => vec![vec![0, 1, 2, 3], vec![1, 2, 3, 2], vec![3, 3, 1, 0]],
        _ => Vec::new(),
    }
}

fn valid_lists(degree: usize, dim: usize) -> Vec<Vec<usize>> {
    index_lists(degree)
        .into_iter()
        .filter(|l| l.iter().all(|&mu| mu < dim))
        .collect()
}

/// `2π · max_σ Σ_μ |P^μ(σ)|`, the natural size of a first-order invariant.
pub fn field_scale(field: &FieldGrid<f64>) -> f64 {
    2.0 * PI * field.max_abs_sum()
}

/// Symmetrized Pohlmeyer specs used for Poisson checks.
pub fn pohlmeyer_observables(dim: usize) -> Vec<Observable> {
    let lists: Vec<Vec<usize>> = vec![
        vec![2],
        vec![0],
        vec![1, 2],
        vec![0, 3],
        vec![0, 2, 3],
        vec![1, 2, 1],
    ];
    let mut out = Vec::new();
    for ch in Chirality::BOTH {
        for l in &lists {
            if l.iter().all(|&mu| mu < dim) {
                out.push(Observable::pohlmeyer(InvariantSpec {
                    chirality: ch,
                    indices: l.clone(),
                    symmetrized: true,
                }));
            }
        }
    }
    out
}

/// Level-matched DDF invariants.
pub fn ddf_specs(dim: usize) -> Vec<DdfInvariantSpec> {
    let t = dim - 1;
    let lists = vec![
        (vec![(2.min(t), 1)], vec![(t, 1)]),
        (vec![(2.min(t), 2), (t, 1)], vec![(2.min(t), 3)]),
        (vec![(2.min(t), 1), (2.min(t), 1)], vec![(t, 2)]),
        (vec![(0, 1)], vec![(1, -1), (t, 2)]),
    ];
    lists
        .into_iter()
        .map(|(l, r)| DdfInvariantSpec::new(l, r).expect("matched"))
        .collect()
}

/// Deliberately unmatched DDF specs, one or two per kind of mismatch: a bare
/// level phase, factors on one side only, both sides at the wrong level, and
/// zero-mode factors.
pub fn control_specs(dim: usize) -> Vec<DdfInvariantSpec> {
    let t = dim - 1;
    let a = 2.min(t);
    let c = DdfInvariantSpec::negative_control;
    vec![
        c(vec![], vec![], 1),
        c(vec![(a, 1)], vec![], 0),
        c(vec![(a, 1)], vec![], 1),
        c(vec![(a, 1)], vec![], 2),
        c(vec![(0, 1)], vec![], 1),
        c(vec![], vec![(t, 1)], 0),
        c(vec![(a, 1)], vec![(t, 1)], 3),
        c(vec![(a, 1)], vec![(t, 2)], 1),
        c(vec![(a, 0)], vec![(t, 0)], 1),
    ]
}

fn max_abs_diff(a: &FieldGrid<f64>, b: &FieldGrid<f64>) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

/// Runs one suite over every subject, in parallel across subjects.
pub fn run_suite(
    name: &str,
    subjects: &[Subject],
    cfg: &SuiteConfig,
) -> Result<Vec<Row>, CliError> {
    let frame = cfg.lightlike_frame()?;
    let per_subject = |s: &Subject| -> Result<Vec<Row>, CliError> {
        match name {
            "reality" => reality(s, cfg, &frame),
            "periodicity" => periodicity(s, cfg, &frame),
            "transversality" => transversality(s, cfg, &frame),
            "shuffle" => shuffle(s, cfg),
            "reparam" => reparam(s, cfg),
            "substitution" => substitution(s, cfg, &frame),
            "poisson" => poisson(s, cfg, &frame),
            "witt" => witt(s, cfg),
            "negative-controls" => negative_controls(s, cfg, &frame),
            "canonical" => canonical(s, cfg),
            "wilson" => wilson(s, cfg),
            "reconstruction" => reconstruction(s, cfg, &frame),
            "gradient" => gradients(s, cfg, &frame),
            other => Err(CliError::Usage(format!("unknown suite '{other}'"))),
        }
    };
    let rows: Vec<Vec<Row>> = subjects
        .par_iter()
        .map(per_subject)
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn inputs(s: &Subject, extra: &str) -> String {
    digest(&[s.digest.as_str(), extra])
}

fn reality(s: &Subject, cfg: &SuiteConfig, frame: &LightlikeFrame) -> Result<Vec<Row>, CliError> {
    let st = &s.state;
    let mut rows = Vec::new();
    let key = format!("n={}", cfg.n);
    for ch in Chirality::BOTH {
        rows.push(Row::max(
            tag("reality.field", ch),
            inputs(s, &key),
            field_reality_defect(st, ch, cfg.n)?,
            cfg.tolerance("reality.field"),
        ));

        let field = eval_field(st, ch, cfg.n)?;
        let c = 1.0 / (2.0 * PI * (2.0 * st.tension()).sqrt());
        let mean = field.mean();
        let scale = st
            .p()
            .iter()
            .map(|v| (v * c).abs())
            .fold(f64::MIN_POSITIVE, f64::max);
        let err = mean
            .iter()
            .zip(st.p())
            .map(|(m, p)| (m - p * c).abs())
            .fold(0.0, f64::max)
            / scale;
        rows.push(Row::max(
            tag("reality.mean", ch),
            inputs(s, &key),
            err,
            cfg.tolerance("reality.mean"),
        ));

        let mut worst = 0.0f64;
        for mu in 0..st.dim() {
            let lhs: f64 =
                field.component(mu).iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / cfg.n as f64;
            let m = st.truncation() as i64;
            let rhs: f64 = (-m..=m).map(|k| st.mode(ch, k)[mu].norm_sqr()).sum();
            worst = worst.max((lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE));
        }
        rows.push(Row::max(
            tag("reality.parseval", ch),
            inputs(s, &key),
            worst,
            cfg.tolerance("reality.parseval"),
        ));

        let modes = ddf_modes(st, frame, ch, cfg.m_out, cfg.n)?;
        rows.push(Row::max(
            tag("reality.conjugation", ch),
            inputs(s, &format!("{key} m_out={}", cfg.m_out)),
            modes.conjugation_defect(),
            cfg.tolerance("reality.conjugation"),
        ));
    }
    let p = com_momentum(st, cfg.n)?;
    let scale = st
        .p()
        .iter()
        .map(|v| v.abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let err = p
        .iter()
        .zip(st.p())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale;
    rows.push(Row::max(
        "reality.momentum",
        inputs(s, &key),
        err,
        cfg.tolerance("reality.momentum"),
    ));
    Ok(rows)
}

fn periodicity(
    s: &Subject,
    cfg: &SuiteConfig,
    frame: &LightlikeFrame,
) -> Result<Vec<Row>, CliError> {
    let n = cfg.n;
    let key = format!("n={n}");
    let mut rows = Vec::new();
    for ch in Chirality::BOTH {
        let r = compute_r(&s.state, frame, ch, n)?;
        let g = TrigInterpolant::new(r.offset())?;

        let winding = (0..n)
            .map(|j| (g.eval(sigma(j, n) + 2.0 * PI) - r.offset()[j]).abs())
            .fold(0.0, f64::max);
        rows.push(Row::max(
            tag("periodicity.winding", ch),
            inputs(s, &key),
            winding,
            cfg.tolerance("periodicity.winding"),
        ));

        let d = spectral_derivative(r.offset())?;
        let err = d
            .iter()
            .zip(r.derivative())
            .map(|(a, b)| (1.0 + a - b).abs())
            .fold(0.0, f64::max);
        rows.push(Row::max(
            tag("periodicity.derivative", ch),
            inputs(s, &key),
            err,
            cfg.tolerance("periodicity.derivative"),
        ));

        let inv = invert_monotone(&r)?;
        let (mut round, mut ident) = (0.0f64, 0.0f64);
        for j in 0..n {
            let t = inv.value(j);
            let (gv, gd) = g.eval_with_derivative(t);
            round = round.max((t + gv - sigma(j, n)).abs());
            ident = ident.max((inv.derivative()[j] * (1.0 + gd) - 1.0).abs());
        }
        rows.push(Row::max(
            tag("periodicity.inverse", ch),
            inputs(s, &key),
            round,
            cfg.tolerance("periodicity.inverse"),
        ));
        rows.push(Row::max(
            tag("periodicity.inverse-derivative", ch),
            inputs(s, &key),
            ident,
            cfg.tolerance("periodicity.inverse-derivative"),
        ));
    }
    Ok(rows)
}

fn transversality(
    s: &Subject,
    cfg: &SuiteConfig,
    frame: &LightlikeFrame,
) -> Result<Vec<Row>, CliError> {
    let key = format!("n={} m_out={}", cfg.n, cfg.m_out);
    let mut rows = Vec::new();
    for ch in Chirality::BOTH {
        let a = ddf_modes(&s.state, frame, ch, cfg.m_out, cfg.n)?;
        rows.push(Row::max(
            tag("transversality", ch),
            inputs(s, &key),
            a.transversality_defect(),
            cfg.tolerance("transversality"),
        ));
        let b = ddf_modes(&s.state, frame, ch, cfg.m_out, 2 * cfg.n)?;
        let diff = a
            .all()
            .iter()
            .zip(b.all())
            .flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        rows.push(Row::max(
            tag("transversality.convergence", ch),
            inputs(s, &key),
            diff,
            cfg.tolerance("transversality.convergence"),
        ));
    }
    Ok(rows)
}

fn shuffle(s: &Subject, cfg: &SuiteConfig) -> Result<Vec<Row>, CliError> {
    let d = s.state.dim();
    let key = format!("n={}", cfg.n);
    let mut rows = Vec::new();
    for ch in Chirality::BOTH {
        let field = eval_field(&s.state, ch, cfg.n)?;
        let z = |idx: &[usize]| pohlmeyer_invariant(&field, &InvariantSpec::raw(ch, idx.to_vec()));
        let z1: Vec<f64> = (0..d).map(|a| z(&[a])).collect::<Result<_, _>>()?;
        let mut z2 = vec![vec![0.0; d]; d];
        for a in 0..d {
            for b in 0..d {
                z2[a][b] = z(&[a, b])?;
            }
        }
        let mut deg2 = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let terms = [z1[a] * z1[b], z2[a][b], z2[b][a]];
                let scale = terms
                    .iter()
                    .map(|t| t.abs())
                    .fold(f64::MIN_POSITIVE, f64::max);
                deg2 = deg2.max((terms[0] - terms[1] - terms[2]).abs() / scale);
            }
        }
        rows.push(Row::max(
            tag("shuffle.deg2", ch),
            inputs(s, &key),
            deg2,
            cfg.tolerance("shuffle.deg2"),
        ));

        let mut deg3 = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let terms = [
                        z1[a] * z2[b][c],
                        z(&[a, b, c])?,
                        z(&[b, a, c])?,
                        z(&[b, c, a])?,
                    ];
                    let scale = terms
                        .iter()
                        .map(|t| t.abs())
                        .fold(f64::MIN_POSITIVE, f64::max);
                    deg3 = deg3.max((terms[0] - terms[1] - terms[2] - terms[3]).abs() / scale);
                }
            }
        }
        rows.push(Row::max(
            tag("shuffle.deg3", ch),
            inputs(s, &key),
            deg3,
            cfg.tolerance("shuffle.deg3"),
        ));
    }
    Ok(rows)
}

/// Largest `|Z_map − Z| / |Z|` over the given maps, for every index list of
/// degree 1..=4.
pub fn reparam_spread(
    field: &FieldGrid<f64>,
    ch: Chirality,
    maps: &[CircleMap<f64>],
    symmetrized: bool,
) -> Result<f64, CliError> {
    let pulled: Vec<FieldGrid<f64>> = maps
        .iter()
        .map(|m| stringinv_core::reparam::pull_back(field, m))
        .collect::<Result<_, _>>()?;
    let mut worst = 0.0f64;
    for degree in 1..=4 {
        for l in valid_lists(degree, field.n_components()) {
            let spec = InvariantSpec {
                chirality: ch,
                indices: l,
                symmetrized,
            };
            let z = pohlmeyer_invariant(field, &spec)?;
            for g in &pulled {
                let zp = pohlmeyer_invariant(g, &spec)?;
                worst = worst.max((zp - z).abs() / z.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(worst)
}

fn reparam(s: &Subject, cfg: &SuiteConfig) -> Result<Vec<Row>, CliError> {
    let n = cfg.n;
    let key = format!(
        "n={n} seed={} diffeos={} J={} amp={} rotations={}",
        cfg.seed, cfg.diffeos, cfg.diffeo_harmonics, cfg.diffeo_amplitude, cfg.rotations
    );
    let diffeos: Vec<CircleMap<f64>> = (0..cfg.diffeos as u64)
        .map(|i| {
            random_diffeo(
                cfg.seed.wrapping_add(i),
                cfg.diffeo_harmonics,
                cfg.diffeo_amplitude,
                true,
            )?
            .sample(n)
        })
        .collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_c1_4c1e);
    let rotations: Vec<CircleMap<f64>> = (0..cfg.rotations)
        .map(|_| CircleMap::rotation(n, 2.0 * PI * rng.gen::<f64>()))
        .collect();
    let mut rows = Vec::new();
    for ch in Chirality::BOTH {
        let field = eval_field(&s.state, ch, n)?;
        rows.push(Row::max(
            tag("reparam.raw", ch),
            inputs(s, &key),
            reparam_spread(&field, ch, &diffeos, false)?,
            cfg.tolerance("reparam.raw"),
        ));
        rows.push(Row::max(
            tag("reparam.rotation", ch),
            inputs(s, &key),
            reparam_spread(&field, ch, &rotations, true)?,
            cfg.tolerance("reparam.rotation"),
        ));
    }
    Ok(rows)
}

/// `|Z(P) − Z(P^R)| / (|Z| + scale^n)` maximized over the index lists of one
/// degree.
pub fn substitution_defect(
    direct: &FieldGrid<f64>,
    reconstructed: &FieldGrid<f64>,
    ch: Chirality,
    degree: usize,
) -> Result<f64, CliError> {
    let scale = field_scale(direct).powi(degree as i32);
    let mut worst = 0.0f64;
    for l in valid_lists(degree, direct.n_components()) {
        let spec = InvariantSpec {
            chirality: ch,
            indices: l,
            symmetrized: true,
        };
        let a = pohlmeyer_invariant(direct, &spec)?;
        let b = pohlmeyer_invariant(reconstructed, &spec)?;
        worst = worst.max((a - b).abs() / (a.abs() + scale));
    }
    Ok(worst)
}

fn substitution(
    s: &Subject,
    cfg: &SuiteConfig,
    frame: &LightlikeFrame,
) -> Result<Vec<Row>, CliError> {
    let key = format!("n={} m_out={}", cfg.n, cfg.m_out);
    let mut rows = Vec::new();
    for ch in Chirality::BOTH {
        let direct = eval_field(&s.state, ch, cfg.n)?;
        let recon = reconstruct_field(&ddf_modes(&s.state, frame, ch, cfg.m_out, cfg.n)?, cfg.n)?;
        for degree in 1..=4 {
            rows.push(Row::max(
                tag(&format!("substitution.n{degree}"), ch),
                inputs(s, &key),
                substitution_defect(&direct, &recon, ch, degree)?,
                cfg.tolerance("substitution"),
            ));
        }
    }
    Ok(rows)
}

fn check_window(s: &Subject, cfg: &SuiteConfig) -> Result<(), CliError> {
    if 2 * cfg.window > s.state.truncation() {
        return Err(CliError::Usage(format!(
            "window {} exceeds M/2 for state '{}' (M = {})",
            cfg.window,
            s.label,
            s.state.truncation()
        )));
    }
    Ok(())
}

fn poisson(s: &Subject, cfg: &SuiteConfig, frame: &LightlikeFrame) -> Result<Vec<Row>, CliError> {
    check_window(s, cfg)?;
    let tol = cfg.tolerance("poisson");
    let key = format!("window={}", cfg.window);
    let mut rows = Vec::new();
    for obs in pohlmeyer_observables(s.state.dim()) {
        let rep = invariance_report(&obs, &s.state, cfg.window, tol)?;
        rows.push(Row::max(
            format!("poisson.{}", obs.id()),
            inputs(s, &key),
            rep.max_residue,
            tol,
        ));
    }
    for spec in ddf_specs(s.state.dim()) {
        let obs = Observable::ddf(frame.clone(), spec);
        let rep = invariance_report(&obs, &s.state, cfg.window, tol)?;
        rows.push(Row::max(
            format!("poisson.{}", obs.id()),
            inputs(s, &key),
            rep.max_residue,
            tol,
        ));
    }
    Ok(rows)
}

/// `max |{L_m, L_n} + i(m−n)L_{m+n}| / (‖∇L_m‖‖∇L_n‖‖Ω‖)` over `|m|,|n| ≤ w`.
pub fn witt_residue(state: &StringState<f64>, ch: Chirality, w: usize) -> Result<f64, CliError> {
    let omega = BracketMatrix::new(ChartLayout::of(state));
    let modes = state.truncation();
    let w = w as i64;
    let grads: BTreeMap<i64, _> = (-w..=w)
        .map(|m| {
            Ok((
                m,
                gradient_propagated(&Observable::virasoro(ch, m, modes), state)?,
            ))
        })
        .collect::<Result<_, CliError>>()?;
    let mut worst = 0.0f64;
    for m in -w..=w {
        for n in -w..=w {
            let b = omega.pair(&grads[&m], &grads[&n]);
            let l = Observable::virasoro(ch, m + n, modes).eval(state)?;
            let res = b + Complex::new(0.0, (m - n) as f64) * l;
            let scale = grads[&m].norm() * grads[&n].norm() * omega.norm();
            if scale > 0.0 {
                worst = worst.max(res.norm() / scale);
            }
        }
    }
    Ok(worst)
}

fn witt(s: &Subject, cfg: &SuiteConfig) -> Result<Vec<Row>, CliError> {
    check_window(s, cfg)?;
    let key = format!("window={}", cfg.window);
    Chirality::BOTH
        .iter()
        .map(|&ch| {
            Ok(Row::max(
                tag("witt", ch),
                inputs(s, &key),
                witt_residue(&s.state, ch, cfg.window)?,
                cfg.tolerance("witt"),
            ))
        })
        .collect()
}

fn negative_controls(
    s: &Subject,
    cfg: &SuiteConfig,
    frame: &LightlikeFrame,
) -> Result<Vec<Row>, CliError> {
    check_window(s, cfg)?;
    let threshold = cfg.tolerance("negative-controls");
    let key = format!("window={}", cfg.window);
    let mut hits = 0usize;
    for spec in control_specs(s.state.dim()) {
        let rep = invariance_report(
            &Observable::ddf(frame.clone(), spec),
            &s.state,
            cfg.window,
            1e-5,
        )?;
        if rep.max_residue >= threshold {
            hits += 1;
        }
    }
    Ok(vec![Row::min(
        "negative-controls",
        inputs(s, &key),
        hits as f64,
        cfg.tolerance("negative-controls.count"),
    )])
}

/// Largest deviation of smeared `{X, P}` brackets from `η(e,e′)∮φψ`, over
/// the `2M` test functions and all coordinate polarizations.
pub fn canonical_defect(state: &StringState<f64>, n_grid: usize) -> Result<f64, CliError> {
    let d = state.dim();
    let omega = BracketMatrix::new(ChartLayout::of(state));
    let basis = TestFunction::basis(state.truncation());
    let unit = |mu: usize| {
        let mut e = vec![0.0; d];
        e[mu] = 1.0;
        e
    };
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    for t in &basis {
        for mu in 0..d {
            let gx = gradient(
                &Observable::SmearedPosition {
                    test: *t,
                    e: unit(mu),
                    n_grid,
                },
                state,
            )?;
            let gp = gradient(
                &Observable::SmearedMomentum {
                    test: *t,
                    e: unit(mu),
                    n_grid,
                },
                state,
            )?;
            xs.push((*t, mu, gx));
            ps.push((*t, mu, gp));
        }
    }
    let mut worst = 0.0f64;
    for (tx, mu, gx) in &xs {
        for (tp, nu, gp) in &ps {
            let v = omega.pair(gx, gp);
            let expect = if mu == nu {
                Metric::sign(*mu) * tx.overlap(tp)
            } else {
                0.0
            };
            worst = worst.max((v - Complex::new(expect, 0.0)).norm());
        }
    }
    // zero-mode sector
    let layout = ChartLayout::of(state);
    for mu in 0..d {
        for nu in 0..d {
            let v = omega.pair(
                &gradient_propagated(&Observable::Coordinate(layout.x(mu)), state)?,
                &gradient_propagated(&Observable::Coordinate(layout.p(nu)), state)?,
            );
            let expect = if mu == nu { Metric::sign(mu) } else { 0.0 };
            worst = worst.max((v - Complex::new(expect, 0.0)).norm());
        }
    }
    Ok(worst)
}

fn canonical(s: &Subject, cfg: &SuiteConfig) -> Result<Vec<Row>, CliError> {
    let _ = cfg;
    let n_grid = stringinv_core::poisson::density_grid(s.state.truncation());
    Ok(vec![Row::max(
        "canonical",
        inputs(s, &format!("n={n_grid}")),
        canonical_defect(&s.state, n_grid)?,
        cfg.tolerance("canonical"),
    )])
}

/// Random anti-Hermitian `d×d` matrices with Frobenius norm `norm`.
pub fn random_connection(dim: usize, d: usize, norm: f64, seed: u64) -> Vec<DMatrix<Complex<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| {
            let g = DMatrix::from_fn(d, d, |_, _| {
                Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let a = &g - g.adjoint();
            let f = a.norm();
            if f > 0.0 {
                a * Complex::new(norm / f, 0.0)
            } else {
                a
            }
        })
        .collect()
}

fn wilson(s: &Subject, cfg: &SuiteConfig) -> Result<Vec<Row>, CliError> {
    let key = format!(
        "n={} d={} order={} norm={} seed={}",
        cfg.n, cfg.wilson_dim, cfg.wilson_order, cfg.wilson_norm, cfg.seed
    );
    let config = WilsonConfig::new(
        random_connection(s.state.dim(), cfg.wilson_dim, cfg.wilson_norm, cfg.seed),
        cfg.wilson_order,
    )?;
    let mut rows = Vec::new();
    for ch in Chirality::BOTH {
        let field = eval_field(&s.state, ch, cfg.n)?;
        let w = wilson_loop(&field, &config)?;
        let low = 4.min(cfg.wilson_order);
        let e = wilson_enumerated(&field, &config, low)?;
        let assembly = (0..=low)
            .map(|k| (w.orders[k] - e[k]).norm() / e[k].norm().max(1.0))
            .fold(0.0, f64::max);
        rows.push(Row::max(
            tag("wilson.assembly", ch),
            inputs(s, &key),
            assembly,
            cfg.tolerance("wilson.assembly"),
        ));
        let reference = wilson_loop_ode(&field, &config, cfg.n)?;
        let ratio = (w.value - reference).norm() / w.remainder_bound.max(f64::MIN_POSITIVE);
        rows.push(Row::max(
            tag("wilson.remainder", ch),
            inputs(s, &key),
            ratio,
            cfg.tolerance("wilson.remainder"),
        ));
    }
    Ok(rows)
}

/// `max |P^R_modes − P^R_direct|` for `M_out = m_out, m_out/2, …` down to
/// `m_out/8`, in increasing `M_out` order.
pub fn reconstruction_ladder(
    state: &StringState<f64>,
    frame: &LightlikeFrame,
    ch: Chirality,
    m_out: usize,
    n: usize,
) -> Result<Vec<(usize, f64)>, CliError> {
    let direct = reconstruct_field_direct(state, frame, ch, n)?;
    let modes = ddf_modes(state, frame, ch, m_out, n)?;
    let mut out = Vec::new();
    for shift in (0..4).rev() {
        let m = m_out >> shift;
        if m == 0 {
            continue;
        }
        let trimmed = stringinv_core::ddf::DdfModes::new(
            ch,
            modes.k().to_vec(),
            modes.all()[m_out - m..=m_out + m].to_vec(),
        )?;
        out.push((m, max_abs_diff(&reconstruct_field(&trimmed, n)?, &direct)));
    }
    Ok(out)
}

fn reconstruction(
    s: &Subject,
    cfg: &SuiteConfig,
    frame: &LightlikeFrame,
) -> Result<Vec<Row>, CliError> {
    let key = format!("n={} m_out={}", cfg.n, cfg.m_out);
    let mut rows = Vec::new();
    for ch in Chirality::BOTH {
        let ladder = reconstruction_ladder(&s.state, frame, ch, cfg.m_out, cfg.n)?;
        let last = ladder.last().map(|l| l.1).unwrap_or(f64::NAN);
        rows.push(Row::max(
            tag("reconstruction", ch),
            inputs(s, &key),
            last,
            cfg.tolerance("reconstruction"),
        ));
        let worst = ladder
            .windows(2)
            .map(|w| w[1].1 / w[0].1.max(RECONSTRUCTION_FLOOR))
            .fold(0.0, f64::max);
        rows.push(Row::max(
            tag("reconstruction.monotone", ch),
            inputs(s, &key),
            worst,
            cfg.tolerance("reconstruction.monotone"),
        ));
    }
    Ok(rows)
}

fn gradients(s: &Subject, cfg: &SuiteConfig, frame: &LightlikeFrame) -> Result<Vec<Row>, CliError> {
    let mut observables = pohlmeyer_observables(s.state.dim());
    observables.extend(
        ddf_specs(s.state.dim())
            .into_iter()
            .map(|spec| Observable::ddf(frame.clone(), spec)),
    );
    observables.extend(
        control_specs(s.state.dim())
            .into_iter()
            .map(|spec| Observable::ddf(frame.clone(), spec)),
    );
    let m = s.state.truncation() as i64;
    let w = (cfg.window as i64).min(m);
    for ch in Chirality::BOTH {
        observables.extend((-w..=w).map(|k| Observable::virasoro(ch, k, s.state.truncation())));
    }
    let worst = observables
        .par_iter()
        .map(|o| gradient_check(o, &s.state).map(|c| c.mismatch))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![Row::max(
        "gradient",
        inputs(s, &format!("observables={}", observables.len())),
        worst,
        cfg.tolerance("gradient"),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_tolerance_key_is_positive() {
        assert!(DEFAULT_TOLERANCES.iter().all(|(_, v)| *v > 0.0));
        let mut cfg = SuiteConfig::default();
        assert!(cfg.set_tolerance("witt", 1e-3).is_ok());
        assert_eq!(cfg.tolerance("witt"), 1e-3);
        assert!(cfg.set_tolerance("nope", 1.0).is_err());
        assert!(cfg.set_tolerance("witt", 0.0).is_err());
    }

    #[test]
    fn connection_is_anti_hermitian() {
        for a in random_connection(4, 3, 0.25, 7) {
            assert!((&a + a.adjoint()).norm() < 1e-15);
            assert!((a.norm() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn control_specs_are_unmatched() {
        assert!(control_specs(4)
            .iter()
            .all(|s| s.is_control() && !s.is_matched()));
        assert!(ddf_specs(4).iter().all(|s| s.is_matched()));
    }
}
