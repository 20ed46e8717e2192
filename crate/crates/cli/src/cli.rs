//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use stringinv_core::ddf::{
    ddf_modes, reconstruct_field, reconstruct_field_direct, strip_zero_mode, DdfInvariantSpec,
};
use stringinv_core::numerics::circle::invert_monotone;
use stringinv_core::poisson::{
    bracket, invariance_report, ChartLayout, Observable, INVARIANCE_THRESHOLD,
};
use stringinv_core::{
    compute_r, eval_field, eval_position, pohlmeyer_invariant, pohlmeyer_via_ddf, random_state,
    virasoro_density, FieldGrid, InvariantSpec, LightlikeFrame, RandomStateParams, StringState,
    DEFAULT_TENSION,
};

use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_PASS};
use crate::io::{
    field_csv, parse_chirality, parse_requests, state_from_json, state_to_json, DdfModesFile,
};
use crate::report::Report;
use crate::suites::{field_scale, run_suite, Subject, SuiteConfig, SUITES};

#[derive(Debug, Parser)]
#[command(
    name = "stringinv",
    version,
    about = "Invariants of the classical closed bosonic string"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random state with monotone clocks.
    Generate(GenerateArgs),
    /// Sample a field or clock on the grid as CSV.
    Eval(EvalArgs),
    /// Compute DDF modes.
    Ddf(DdfArgs),
    /// Evaluate Pohlmeyer invariants.
    Pohlmeyer(PohlmeyerArgs),
    /// Poisson bracket of two observables, or an invariance scan.
    Bracket(BracketArgs),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long = "modes", short = 'M', default_value_t = 8)]
    pub modes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub decay: f64,
    #[arg(long, default_value_t = 0.2)]
    pub margin: f64,
    #[arg(long, default_value_t = DEFAULT_TENSION)]
    pub tension: f64,
    #[command(flatten)]
    pub frame: FrameArg,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FrameArg {
    /// Lightlike vector k as comma-separated components; defaults to (1,1,0,…).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub frame: Option<Vec<f64>>,
}

impl FrameArg {
    fn resolve(&self, dim: usize) -> Result<LightlikeFrame, CliError> {
        let frame = match &self.frame {
            Some(k) => LightlikeFrame::new(k.clone())?,
            None => LightlikeFrame::standard(dim),
        };
        if frame.dim() != dim {
            return Err(CliError::Usage(format!(
                "frame has {} components, state has {dim}",
                frame.dim()
            )));
        }
        Ok(frame)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Field,
    Position,
    Density,
    R,
    RInverse,
    Reconstructed,
    ReconstructedDirect,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum, default_value = "field")]
    pub quantity: Quantity,
    #[arg(long, default_value = "minus", allow_hyphen_values = true)]
    pub chirality: String,
    #[arg(long, short = 'N', default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 512)]
    pub m_out: usize,
    #[command(flatten)]
    pub frame: FrameArg,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DdfArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value = "minus", allow_hyphen_values = true)]
    pub chirality: String,
    #[arg(long, short = 'N', default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 512)]
    pub m_out: usize,
    /// Remove the zero-mode phase `e^{-imφ₀}`.
    #[arg(long)]
    pub stripped: bool,
    #[command(flatten)]
    pub frame: FrameArg,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PohlmeyerArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Comma-separated spacetime indices.
    #[arg(long, value_delimiter = ',', conflicts_with = "request")]
    pub indices: Option<Vec<usize>>,
    #[arg(long, default_value = "minus", allow_hyphen_values = true)]
    pub chirality: String,
    #[arg(long)]
    pub symmetrized: bool,
    /// JSON file holding one request or a list of them.
    #[arg(long)]
    pub request: Option<PathBuf>,
    /// Also evaluate through the DDF-reconstructed field.
    #[arg(long)]
    pub via_ddf: bool,
    #[arg(long, short = 'N', default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 512)]
    pub m_out: usize,
    #[command(flatten)]
    pub frame: FrameArg,
}

#[derive(Debug, Args)]
pub struct BracketArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// First observable, e.g. `x:0`, `alpha:-:2:1`, `L:+:3`, `Z:-:1,2`,
    /// `Zsym:+:0,2,3`, `D:2@1:3@1`, `Dctl:2@1::1`.
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "invariance"
    )]
    pub g: Option<String>,
    /// Scan `{f, L_m}` and `{f, L̃_m}` for `|m| ≤ window`.
    #[arg(long)]
    pub invariance: bool,
    #[arg(long, default_value_t = 4)]
    pub window: usize,
    #[arg(long, default_value_t = INVARIANCE_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub frame: FrameArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// State files; may be repeated.
    #[arg(long)]
    pub state: Vec<PathBuf>,
    /// Random states for seeds `a..b` (half-open) or a single seed.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long = "modes", short = 'M', default_value_t = 8)]
    pub modes: usize,
    #[arg(long, default_value_t = 0.5)]
    pub decay: f64,
    #[arg(long, default_value_t = 0.2)]
    pub margin: f64,
    /// Suites to run; `all` runs every suite.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub suite: Vec<String>,
    /// `name=value` tolerance override; may be repeated.
    #[arg(long)]
    pub tolerance: Vec<String>,
    #[arg(long, short = 'N', default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 512)]
    pub m_out: usize,
    #[arg(long, default_value_t = 0)]
    pub aux_seed: u64,
    #[command(flatten)]
    pub frame: FrameArg,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| execute(cli.command)),
        Ok(None) => execute(cli.command),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Honors `STRINGINV_THREADS`.
fn thread_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    let Ok(v) = std::env::var("STRINGINV_THREADS") else {
        return Ok(None);
    };
    let n: usize = v
        .parse()
        .map_err(|_| CliError::Usage(format!("STRINGINV_THREADS='{v}' is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Eval(a) => eval(a),
        Command::Ddf(a) => ddf(a),
        Command::Pohlmeyer(a) => pohlmeyer(a),
        Command::Bracket(a) => bracket_cmd(a),
        Command::Verify(a) => verify(a),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_state(path: &PathBuf) -> Result<StringState<f64>, CliError> {
    state_from_json(&std::fs::read_to_string(path)?)
}

fn generate(a: GenerateArgs) -> Result<i32, CliError> {
    let frame = a.frame.resolve(a.dim)?;
    let params = RandomStateParams {
        dim: a.dim,
        modes: a.modes,
        seed: a.seed,
        decay: a.decay,
        margin: a.margin,
        tension: a.tension,
    };
    emit(
        a.out.as_ref(),
        &state_to_json(&random_state(&params, &frame)?),
    )?;
    Ok(EXIT_PASS)
}

fn eval(a: EvalArgs) -> Result<i32, CliError> {
    let state = load_state(&a.state)?;
    let ch = parse_chirality(&a.chirality)?;
    let frame = || a.frame.resolve(state.dim());
    let grid = match a.quantity {
        Quantity::Field => eval_field(&state, ch, a.n)?,
        Quantity::Position => eval_position(&state, a.n)?,
        Quantity::Density => virasoro_density(&state, ch, a.n)?,
        Quantity::R => {
            let r = compute_r(&state, &frame()?, ch, a.n)?;
            FieldGrid::new(vec![r.values(), r.derivative().to_vec()])?
        }
        Quantity::RInverse => {
            let inv = invert_monotone(&compute_r(&state, &frame()?, ch, a.n)?)?;
            FieldGrid::new(vec![inv.values(), inv.derivative().to_vec()])?
        }
        Quantity::Reconstructed => {
            reconstruct_field(&ddf_modes(&state, &frame()?, ch, a.m_out, a.n)?, a.n)?
        }
        Quantity::ReconstructedDirect => reconstruct_field_direct(&state, &frame()?, ch, a.n)?,
    };
    emit(a.out.as_ref(), &field_csv(&grid))?;
    Ok(EXIT_PASS)
}

fn ddf(a: DdfArgs) -> Result<i32, CliError> {
    let state = load_state(&a.state)?;
    let frame = a.frame.resolve(state.dim())?;
    let ch = parse_chirality(&a.chirality)?;
    let mut modes = ddf_modes(&state, &frame, ch, a.m_out, a.n)?;
    if a.stripped {
        modes = strip_zero_mode(&modes, &state, &frame)?;
    }
    let mut text =
        serde_json::to_string_pretty(&DdfModesFile::from_modes(&modes)).expect("modes serialize");
    text.push('\n');
    emit(a.out.as_ref(), &text)?;
    Ok(EXIT_PASS)
}

fn pohlmeyer(a: PohlmeyerArgs) -> Result<i32, CliError> {
    let state = load_state(&a.state)?;
    let specs: Vec<InvariantSpec> = match (&a.indices, &a.request) {
        (Some(idx), None) => vec![InvariantSpec::new(
            parse_chirality(&a.chirality)?,
            idx.clone(),
            a.symmetrized,
        )?],
        (None, Some(path)) => parse_requests(&std::fs::read_to_string(path)?)?
            .iter()
            .map(|r| r.to_spec())
            .collect::<Result<_, _>>()?,
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --indices or --request".into(),
            ))
        }
    };
    let frame = if a.via_ddf {
        Some(a.frame.resolve(state.dim())?)
    } else {
        None
    };
    let mut out = Vec::new();
    for spec in &specs {
        if let Some(&mu) = spec.indices.iter().find(|&&mu| mu >= state.dim()) {
            return Err(CliError::Usage(format!(
                "index {mu} out of range for dimension {}",
                state.dim()
            )));
        }
        let field = eval_field(&state, spec.chirality, a.n)?;
        let value = pohlmeyer_invariant(&field, spec)?;
        // substitution tolerance for this degree
        let tolerance = 1e-6 * (value.abs() + field_scale(&field).powi(spec.degree() as i32));
        let mut row = json!({
            "chirality": spec.chirality.symbol(),
            "indices": spec.indices,
            "symmetrized": spec.symmetrized,
            "value": value,
            "tolerance": tolerance,
        });
        if let Some(frame) = &frame {
            let via = pohlmeyer_via_ddf(&state, frame, spec, a.m_out, a.n)?;
            row["via_ddf"] = json!(via);
            row["difference"] = json!((via - value).abs());
        }
        out.push(row);
    }
    let text = if out.len() == 1 {
        out.pop().unwrap()
    } else {
        json!(out)
    };
    println!("{}", serde_json::to_string_pretty(&text).expect("json"));
    Ok(EXIT_PASS)
}

fn index_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad index '{t}'")))
        })
        .collect()
}

fn factor_list(s: &str) -> Result<Vec<(usize, i64)>, CliError> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (mu, m) = t
                .split_once('@')
                .ok_or_else(|| CliError::Usage(format!("factor '{t}' should read MU@M")))?;
            let bad = || CliError::Usage(format!("bad factor '{t}'"));
            Ok((
                mu.trim().parse().map_err(|_| bad())?,
                m.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

/// Parses the observable mini-language accepted by `bracket`.
pub fn parse_observable(
    s: &str,
    state: &StringState<f64>,
    frame: &FrameArg,
) -> Result<Observable, CliError> {
    let layout = ChartLayout::of(state);
    let d = state.dim();
    let parts: Vec<&str> = s.split(':').collect();
    let usage = || CliError::Usage(format!("cannot parse observable '{s}'"));
    let num = |t: &str| -> Result<i64, CliError> { t.trim().parse().map_err(|_| usage()) };
    let mu_of = |t: &str| -> Result<usize, CliError> {
        let mu = num(t)?;
        if mu < 0 || mu as usize >= d {
            return Err(CliError::Usage(format!("index {mu} out of range in '{s}'")));
        }
        Ok(mu as usize)
    };
    let obs = match parts.as_slice() {
        ["x", mu] => Observable::Coordinate(layout.x(mu_of(mu)?)),
        ["p", mu] => Observable::Coordinate(layout.p(mu_of(mu)?)),
        ["y", i] => {
            let i = num(i)?;
            if i < 0 || i as usize >= layout.len() {
                return Err(usage());
            }
            Observable::Coordinate(i as usize)
        }
        ["alpha", ch, m, mu] => Observable::Oscillator {
            chirality: parse_chirality(ch)?,
            m: num(m)?,
            mu: mu_of(mu)?,
        },
        ["L", ch, m] => Observable::virasoro(parse_chirality(ch)?, num(m)?, state.truncation()),
        [z @ ("Z" | "Zsym"), ch, idx] => {
            let indices = index_list(idx)?;
            for &mu in &indices {
                mu_of(&mu.to_string())?;
            }
            Observable::pohlmeyer(InvariantSpec::new(
                parse_chirality(ch)?,
                indices,
                *z == "Zsym",
            )?)
        }
        ["D", left, right] => Observable::ddf(
            frame.resolve(d)?,
            DdfInvariantSpec::new(factor_list(left)?, factor_list(right)?)?,
        ),
        ["Dctl", left, right, level] => Observable::ddf(
            frame.resolve(d)?,
            DdfInvariantSpec::negative_control(
                factor_list(left)?,
                factor_list(right)?,
                num(level)?,
            ),
        ),
        _ => return Err(usage()),
    };
    Ok(obs)
}

fn bracket_cmd(a: BracketArgs) -> Result<i32, CliError> {
    let state = load_state(&a.state)?;
    let f = parse_observable(&a.f, &state, &a.frame)?;
    if a.invariance {
        let rep = invariance_report(&f, &state, a.window, a.threshold)?;
        let rows: Vec<_> = rep
            .rows
            .iter()
            .map(|r| {
                json!({
                    "observable": r.observable,
                    "chirality": r.chirality.symbol(),
                    "m": r.m,
                    "residue": r.residue,
                    "pass": r.pass,
                })
            })
            .collect();
        let out = json!({ "rows": rows, "max_residue": rep.max_residue, "threshold": a.threshold, "pass": rep.pass });
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        return Ok(if rep.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        });
    }
    let g = parse_observable(a.g.as_deref().expect("clap enforces --g"), &state, &a.frame)?;
    let b = bracket(&f, &g, &state)?;
    let out = json!({ "f": f.id(), "g": g.id(), "re": b.re, "im": b.im });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(EXIT_PASS)
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("bad seed range '{s}' (use a..b or a single seed)"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if a >= b {
            return Err(bad());
        }
        Ok((a..b).collect())
    } else {
        Ok(vec![s.parse().map_err(|_| bad())?])
    }
}

fn verify(a: VerifyArgs) -> Result<i32, CliError> {
    let mut subjects = Vec::new();
    for path in &a.state {
        subjects.push(Subject::new(path.display().to_string(), load_state(path)?));
    }
    let seeds = match &a.seeds {
        Some(s) => parse_seeds(s)?,
        None if subjects.is_empty() => vec![0],
        None => Vec::new(),
    };
    let dim = subjects.first().map(|s| s.state.dim()).unwrap_or(a.dim);
    let frame = a.frame.resolve(dim)?;
    for &seed in &seeds {
        let params = RandomStateParams {
            dim: a.dim,
            modes: a.modes,
            seed,
            decay: a.decay,
            margin: a.margin,
            ..Default::default()
        };
        subjects.push(Subject::new(
            format!("seed:{seed}"),
            random_state(&params, &frame)?,
        ));
    }
    if subjects.iter().any(|s| s.state.dim() != dim) {
        return Err(CliError::Usage(
            "all states must share one dimension".into(),
        ));
    }

    let mut cfg = SuiteConfig {
        frame: frame.k().to_vec(),
        n: a.n,
        m_out: a.m_out,
        seed: a.aux_seed,
        ..Default::default()
    };
    for t in &a.tolerance {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("tolerance '{t}' should read name=value")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::Usage(format!("bad tolerance value in '{t}'")))?;
        cfg.set_tolerance(k, v)?;
    }
    let suites: Vec<String> = if a.suite.iter().any(|s| s == "all") {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        a.suite.clone()
    };
    if let Some(bad) = suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown suite '{bad}'; known: {}",
            SUITES.join(", ")
        )));
    }

    let mut rows = Vec::new();
    let mut timings = BTreeMap::new();
    for name in &suites {
        let start = Instant::now();
        rows.extend(run_suite(name, &subjects, &cfg)?);
        timings.insert(name.clone(), start.elapsed().as_secs_f64());
    }
    let states: Vec<_> = subjects
        .iter()
        .map(|s| json!({ "label": s.label, "digest": s.digest }))
        .collect();
    let config = json!({
        "suites": suites,
        "states": states,
        "seeds": seeds,
        "generator": { "dim": a.dim, "M": a.modes, "decay": a.decay, "margin": a.margin },
        "suite_config": cfg,
    });
    let report = Report::new(config, rows, timings);
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match &a.report {
        Some(p) => std::fs::write(p, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    for r in report.rows.iter().filter(|r| !r.pass) {
        eprintln!(
            "FAIL {} [{}] measured {:e} vs {:e}",
            r.name, r.inputs, r.measured, r.tolerance
        );
    }
    Ok(if report.pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert!(parse_seeds("5..2").is_err());
    }

    #[test]
    fn observable_syntax() {
        let s = random_state(&RandomStateParams::default(), &LightlikeFrame::standard(4)).unwrap();
        let fr = FrameArg { frame: None };
        assert_eq!(
            parse_observable("x:2", &s, &fr).unwrap(),
            Observable::Coordinate(2)
        );
        assert!(matches!(
            parse_observable("alpha:-:2:1", &s, &fr).unwrap(),
            Observable::Oscillator { m: 2, mu: 1, .. }
        ));
        assert!(matches!(
            parse_observable("Zsym:+:0,2", &s, &fr).unwrap(),
            Observable::Pohlmeyer { .. }
        ));
        assert!(matches!(
            parse_observable("D:2@1:3@1", &s, &fr).unwrap(),
            Observable::Ddf { .. }
        ));
        assert!(matches!(
            parse_observable("Dctl:2@1::2", &s, &fr).unwrap(),
            Observable::Ddf { .. }
        ));
        assert!(parse_observable("D:2@1:3@2", &s, &fr).is_err());
        assert!(parse_observable("x:9", &s, &fr).is_err());
        assert!(parse_observable("q:1", &s, &fr).is_err());
    }
}
