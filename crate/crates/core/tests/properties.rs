use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use stringinv_core::numerics::modes::{
    grid_to_modes, modes_to_grid, sigma, spectral_derivative, ModeVector, Orientation,
};
use stringinv_core::numerics::{invert_monotone, periodic_antiderivative};
use stringinv_core::poisson::{bracket, chart, unchart, ChartLayout, Observable};
use stringinv_core::reparam::pull_back;
use stringinv_core::{
    compute_r, ddf_modes, eval_field, pohlmeyer_invariant, random_diffeo, random_state, Chirality,
    FieldGrid, InvariantSpec, LightlikeFrame, RandomStateParams, ReparamMap, StringState,
};

fn frame() -> LightlikeFrame {
    LightlikeFrame::standard(4)
}

fn state(seed: u64) -> StringState<f64> {
    random_state(
        &RandomStateParams {
            seed,
            ..Default::default()
        },
        &frame(),
    )
    .unwrap()
}

fn coeffs(k: usize) -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
    (
        -2.0..2.0f64,
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), k),
    )
}

fn real_modes(c0: f64, pos: &[(f64, f64)]) -> ModeVector<f64> {
    let pos: Vec<C> = pos.iter().map(|&(a, b)| C::new(a, b)).collect();
    ModeVector::real_from_positive(Orientation::Positive, c0, &pos)
}

fn band_limited_field(parts: &[(f64, Vec<(f64, f64)>)], n: usize) -> FieldGrid<f64> {
    FieldGrid::new(
        parts
            .iter()
            .map(|(c0, pos)| modes_to_grid(&real_modes(*c0, pos), n).unwrap())
            .collect(),
    )
    .unwrap()
}

fn harmonic_map() -> impl Strategy<Value = ReparamMap> {
    (
        prop::collection::vec((0.0..1.0f64, -PI..PI), 1..4),
        0.0..0.85f64,
    )
        .prop_map(|(raw, budget)| {
            let total: f64 = raw
                .iter()
                .enumerate()
                .map(|(i, (w, _))| (i + 1) as f64 * w)
                .sum::<f64>()
                .max(1e-9);
            let coeffs = raw.iter().map(|(w, _)| w * budget / total).collect();
            ReparamMap::new(coeffs, raw.iter().map(|(_, p)| *p).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval((c0, pos) in coeffs(6)) {
        let mv = real_modes(c0, &pos);
        let n = 64;
        let grid = modes_to_grid(&mv, n).unwrap();
        let lhs: f64 = grid.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let rhs: f64 = mv.coeffs().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.max(1.0));
        let back = grid_to_modes(&grid, 6, Orientation::Positive).unwrap();
        for (a, b) in back.coeffs().iter().zip(mv.coeffs()) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn antiderivative_differentiates_back((c0, pos) in coeffs(5)) {
        let grid = modes_to_grid(&real_modes(c0, &pos), 32).unwrap();
        let (g, mean) = periodic_antiderivative(&grid).unwrap();
        prop_assert!((mean - c0).abs() < 1e-14);
        let d = spectral_derivative(&g).unwrap();
        for (x, y) in d.iter().zip(&grid) {
            prop_assert!((x + mean - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shuffle_degree_two(parts in prop::collection::vec(coeffs(4), 2)) {
        let f = band_limited_field(&parts, 64);
        let z = |idx: Vec<usize>| pohlmeyer_invariant(&f, &InvariantSpec::raw(Chirality::Minus, idx)).unwrap();
        let (a, b) = (z(vec![0]), z(vec![1]));
        let (ab, ba) = (z(vec![0, 1]), z(vec![1, 0]));
        prop_assert!((a * b - ab - ba).abs() <= 1e-11 * (a * b).abs().max(ab.abs()).max(1.0));
    }

    #[test]
    fn inverse_round_trips(map in harmonic_map()) {
        let n = 256;
        let m = map.sample(n).unwrap();
        let inv = invert_monotone(&m).unwrap();
        for j in 0..n {
            let t = inv.value(j);
            prop_assert!((map.value(t) - sigma(j, n)).abs() < 1e-10);
            prop_assert!((inv.derivative()[j] * map.derivative(t) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pullback_preserves_integral(parts in prop::collection::vec(coeffs(4), 1), map in harmonic_map()) {
        let f = band_limited_field(&parts, 256);
        let g = pull_back(&f, &map.sample(256).unwrap()).unwrap();
        prop_assert!((f.mean()[0] - g.mean()[0]).abs() < 1e-10);
    }

    #[test]
    fn pullback_composes(parts in prop::collection::vec(coeffs(3), 1), a in harmonic_map(), b in harmonic_map()) {
        let n = 512;
        let f = band_limited_field(&parts, n);
        let twice = pull_back(&pull_back(&f, &a.sample(n).unwrap()).unwrap(), &b.sample(n).unwrap()).unwrap();
        let once = pull_back(&f, &a.compose_sampled(&b, n).unwrap()).unwrap();
        let err = twice.component(0).iter().zip(once.component(0)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn raw_invariants_survive_base_point_diffeos(seed in 0u64..1000, parts in prop::collection::vec(coeffs(3), 3)) {
        let n = 512;
        let f = band_limited_field(&parts, n);
        let map = random_diffeo(seed, 3, 0.5, true).unwrap();
        let g = pull_back(&f, &map.sample(n).unwrap()).unwrap();
        for idx in [vec![0, 1], vec![2, 0, 1]] {
            let spec = InvariantSpec::raw(Chirality::Plus, idx);
            let (a, b) = (pohlmeyer_invariant(&f, &spec).unwrap(), pohlmeyer_invariant(&g, &spec).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn symmetrized_invariants_survive_rotations(c in 0.0..(2.0 * PI), parts in prop::collection::vec(coeffs(3), 3)) {
        let n = 256;
        let f = band_limited_field(&parts, n);
        let rot = stringinv_core::numerics::CircleMap::rotation(n, c);
        let g = pull_back(&f, &rot).unwrap();
        let spec = InvariantSpec::new(Chirality::Minus, vec![0, 1, 2], true).unwrap();
        let (a, b) = (pohlmeyer_invariant(&f, &spec).unwrap(), pohlmeyer_invariant(&g, &spec).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generator_is_deterministic_and_monotone(seed in any::<u64>()) {
        let a = state(seed);
        prop_assert_eq!(&a, &state(seed));
        for ch in Chirality::BOTH {
            let r = compute_r(&a, &frame(), ch, 256).unwrap();
            prop_assert!(r.min_derivative() >= 0.2 - 1e-9);
        }
    }

    #[test]
    fn chart_round_trip_is_exact(seed in any::<u64>()) {
        let s = state(seed);
        let y = chart(&s);
        let back = unchart(ChartLayout::of(&s), s.tension(), &y).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(chart(&back), y);
    }

    #[test]
    fn field_is_real_and_modes_conjugate(seed in any::<u64>()) {
        let s = state(seed);
        for ch in Chirality::BOTH {
            let modes = ddf_modes(&s, &frame(), ch, 32, 512).unwrap();
            prop_assert!(modes.conjugation_defect() <= 1e-11);
            prop_assert!(modes.transversality_defect() <= 1e-10);
            let f = eval_field(&s, ch, 64).unwrap();
            prop_assert!(f.components().iter().flatten().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_leibniz(seed in 0u64..500) {
        let s = state(seed);
        let l = ChartLayout::of(&s);
        let f = Observable::Coordinate(l.oscillator(Chirality::Minus, 1, 2, false));
        let g = Observable::pohlmeyer(InvariantSpec::new(Chirality::Minus, vec![1, 2], true).unwrap());
        let h = Observable::virasoro(Chirality::Minus, 2, s.truncation());
        let fg = bracket(&f, &g, &s).unwrap();
        let gf = bracket(&g, &f, &s).unwrap();
        prop_assert!((fg + gf).norm() < 1e-12 * fg.norm().max(1.0));

        let lhs = bracket(&Observable::product(f.clone(), g.clone()), &h, &s).unwrap();
        let rhs = f.eval(&s).unwrap() * bracket(&g, &h, &s).unwrap() + g.eval(&s).unwrap() * bracket(&f, &h, &s).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }
}
