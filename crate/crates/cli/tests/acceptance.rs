//! One line per acceptance criterion; exits nonzero if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::process::ExitCode;
use std::time::Instant;

use stringinv::report::Row;
use stringinv::suites::{random_connection, run_suite, Subject, SuiteConfig};
use stringinv_core::{
    ddf_modes, eval_field, pohlmeyer_invariant, random_state, wilson_loop, Chirality,
    InvariantSpec, LightlikeFrame, RandomStateParams, WilsonConfig,
};

fn subjects(seeds: std::ops::Range<u64>) -> Vec<Subject> {
    let frame = LightlikeFrame::standard(4);
    seeds
        .map(|seed| {
            let s = random_state(
                &RandomStateParams {
                    seed,
                    ..Default::default()
                },
                &frame,
            )
            .unwrap();
            Subject::new(format!("seed:{seed}"), s)
        })
        .collect()
}

/// Worst row: largest `measured/tolerance` for upper bounds, smallest for
/// lower bounds.
struct Outcome {
    pass: bool,
    detail: String,
}

fn summarize(rows: &[Row]) -> Outcome {
    let pass = rows.iter().all(|r| r.pass);
    let worst = rows
        .iter()
        .max_by(|a, b| badness(a).total_cmp(&badness(b)))
        .map(|r| {
            format!(
                "worst {} = {:.3e} (tol {:.0e}, {})",
                r.name, r.measured, r.tolerance, r.inputs
            )
        })
        .unwrap_or_else(|| "no rows".into());
    Outcome {
        pass,
        detail: format!("{} rows, {worst}", rows.len()),
    }
}

fn badness(r: &Row) -> f64 {
    match r.bound {
        stringinv::report::Bound::Max => r.measured / r.tolerance,
        stringinv::report::Bound::Min => r.tolerance / r.measured.max(f64::MIN_POSITIVE),
    }
}

fn suite(name: &str, subjects: &[Subject], cfg: &SuiteConfig) -> Vec<Row> {
    run_suite(name, subjects, cfg).unwrap_or_else(|e| panic!("suite {name}: {e}"))
}

fn a1(cfg: &SuiteConfig, many: &[Subject]) -> Outcome {
    let frame = cfg.lightlike_frame().unwrap();
    let mut rows = Vec::new();
    for s in many {
        for ch in Chirality::BOTH {
            let m = ddf_modes(&s.state, &frame, ch, cfg.m_out, cfg.n).unwrap();
            rows.push(Row::max(
                format!("transversality[{}]", ch.symbol()),
                &s.label,
                m.transversality_defect(),
                1e-10,
            ));
        }
    }
    summarize(&rows)
}

fn a5(cfg: &SuiteConfig, few: &[Subject]) -> Outcome {
    let mut rows: Vec<Row> = suite("poisson", few, cfg)
        .into_iter()
        .filter(|r| r.name.starts_with("poisson.D"))
        .collect();
    rows.extend(suite("negative-controls", few, cfg));
    summarize(&rows)
}

fn a9(cfg: &SuiteConfig, few: &[Subject]) -> Outcome {
    let mut rows = suite("wilson", few, cfg);
    // independent enumeration and RK4 on the first state
    let s = &few[0];
    let n = 512;
    let mats = random_connection(4, 2, cfg.wilson_norm, 41);
    for ch in Chirality::BOTH {
        let field = eval_field(&s.state, ch, n).unwrap();
        let w = wilson_loop(
            &field,
            &WilsonConfig::new(mats.clone(), cfg.wilson_order).unwrap(),
        )
        .unwrap();
        let mut worst = 0.0f64;
        for order in 1..=4 {
            let e = support::wilson_order(4, order, &mats, |idx| {
                pohlmeyer_invariant(&field, &InvariantSpec::raw(ch, idx.to_vec())).unwrap()
            });
            worst = worst.max((w.orders[order] - e).norm() / e.norm().max(1.0));
        }
        rows.push(Row::max(
            format!("oracle.enumeration[{}]", ch.symbol()),
            &s.label,
            worst,
            1e-9,
        ));
        let reference = support::wilson_rk4(field.components(), &mats, 2048);
        let ratio = (w.value - reference).norm() / w.remainder_bound;
        rows.push(Row::max(
            format!("oracle.remainder[{}]", ch.symbol()),
            &s.label,
            ratio,
            1.0,
        ));
    }
    summarize(&rows)
}

fn a11(few: &[Subject]) -> Outcome {
    let triples = [[0, 1, 2], [1, 2, 3], [3, 3, 0], [2, 0, 2], [0, 0, 1]];
    let mut rows = Vec::new();
    for s in few.iter().take(3) {
        let field = eval_field(&s.state, Chirality::Minus, 256).unwrap();
        for t in &triples {
            let fast =
                pohlmeyer_invariant(&field, &InvariantSpec::raw(Chirality::Minus, t.to_vec()))
                    .unwrap();
            let factors: Vec<&[f64]> = t.iter().map(|&mu| field.component(mu)).collect();
            let slow = support::brute_force_simplex(&factors);
            rows.push(Row::max(
                format!("simplex{t:?}"),
                &s.label,
                (fast - slow).abs() / slow.abs(),
                1e-9,
            ));
        }
    }
    summarize(&rows)
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let many = subjects(0..20);
    let few = subjects(0..5);
    let keep = |rows: Vec<Row>, prefix: &str| -> Vec<Row> {
        rows.into_iter()
            .filter(|r| r.name.starts_with(prefix))
            .collect()
    };

    let criteria: Vec<(&str, &str, Box<dyn Fn() -> Outcome>)> = vec![
        ("A1", "transversality", Box::new(|| a1(&cfg, &many))),
        (
            "A2",
            "substitution identity",
            Box::new(|| summarize(&suite("substitution", &many, &cfg))),
        ),
        (
            "A3",
            "reparameterization invariance",
            Box::new(|| summarize(&suite("reparam", &few, &cfg))),
        ),
        (
            "A4",
            "Pohlmeyer Poisson invariance",
            Box::new(|| summarize(&keep(suite("poisson", &few, &cfg), "poisson.Z"))),
        ),
        (
            "A5",
            "DDF invariance and level matching",
            Box::new(|| a5(&cfg, &few)),
        ),
        (
            "A6",
            "Witt algebra",
            Box::new(|| summarize(&suite("witt", &few, &cfg))),
        ),
        (
            "A7",
            "canonical brackets",
            Box::new(|| summarize(&suite("canonical", &few, &cfg))),
        ),
        (
            "A8",
            "shuffle identities",
            Box::new(|| summarize(&suite("shuffle", &few, &cfg))),
        ),
        ("A9", "Wilson loop assembly", Box::new(|| a9(&cfg, &few))),
        (
            "A10",
            "reconstruction equivalence",
            Box::new(|| summarize(&suite("reconstruction", &few, &cfg))),
        ),
        ("A11", "brute-force simplex oracle", Box::new(|| a11(&few))),
        (
            "A12",
            "gradient cross-validation",
            Box::new(|| summarize(&suite("gradient", &few, &cfg))),
        ),
    ];

    let mut failed = 0;
    for (id, title, check) in &criteria {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{id:<4} {} {title}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
