mod support;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stringinv_core::ddf::{
    ddf_invariant, ddf_modes, strip_zero_mode, zero_mode_phase, DdfInvariantSpec,
};
use stringinv_core::poisson::{bracket, ChartLayout, Observable};
use stringinv_core::{
    eval_field, pohlmeyer_invariant, pohlmeyer_via_ddf, random_state, wilson_loop, Chirality,
    InvariantSpec, LightlikeFrame, Metric, RandomStateParams, StringState, WilsonConfig,
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

fn connection(seed: u64, d: usize, norm: f64) -> Vec<DMatrix<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..4)
        .map(|_| {
            let g = DMatrix::from_fn(d, d, |_, _| {
                C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let a = &g - g.adjoint();
            let f = a.norm();
            a * C::new(norm / f, 0.0)
        })
        .collect()
}

#[test]
fn iterated_exponential_known_values() {
    let six = support::iterated_exponential(&[0, 0, 0]).re;
    assert!((six - (2.0 * std::f64::consts::PI).powi(3) / 6.0).abs() < 1e-12);
    // inner ∫ e^{is₁} = (e^{is₂} − 1)/i, so the pair integrates to 2π/i
    let v = support::iterated_exponential(&[1, -1]);
    assert!((v - C::new(0.0, -2.0 * std::f64::consts::PI)).norm() < 1e-13);
}

#[test]
fn iterated_integrals_match_mode_sum() {
    for seed in [1, 4] {
        let s = state(seed);
        for ch in Chirality::BOTH {
            let field = eval_field(&s, ch, 256).unwrap();
            for idx in [vec![2], vec![0, 3], vec![0, 1, 2], vec![3, 3, 1]] {
                let fast =
                    pohlmeyer_invariant(&field, &InvariantSpec::raw(ch, idx.clone())).unwrap();
                let factors: Vec<&[f64]> = idx.iter().map(|&mu| field.component(mu)).collect();
                let slow = support::brute_force_simplex(&factors);
                assert!(
                    (fast - slow).abs() <= 1e-9 * slow.abs().max(1e-3),
                    "{idx:?}: {fast} vs {slow}"
                );
            }
        }
    }
}

#[test]
fn wilson_loop_matches_rk4() {
    let s = state(2);
    let field = eval_field(&s, Chirality::Minus, 512).unwrap();
    let mats = connection(11, 2, 0.2);
    let w = wilson_loop(&field, &WilsonConfig::new(mats.clone(), 16).unwrap()).unwrap();
    let reference = support::wilson_rk4(field.components(), &mats, 2000);
    let err = (w.value - reference).norm();
    assert!(
        err <= w.remainder_bound + 1e-10,
        "{err} > {}",
        w.remainder_bound
    );
    assert!(err < 1e-9, "{err}");
}

#[test]
fn wilson_orders_match_enumeration() {
    let s = state(5);
    let field = eval_field(&s, Chirality::Plus, 256).unwrap();
    let mats = connection(3, 3, 0.5);
    let w = wilson_loop(&field, &WilsonConfig::new(mats.clone(), 4).unwrap()).unwrap();
    for order in 1..=4 {
        let e = support::wilson_order(4, order, &mats, |idx| {
            pohlmeyer_invariant(&field, &InvariantSpec::raw(Chirality::Plus, idx.to_vec())).unwrap()
        });
        assert!(
            (w.orders[order] - e).norm() <= 1e-9 * e.norm().max(1.0),
            "order {order}"
        );
    }
}

#[test]
fn oscillator_brackets_are_canonical() {
    let s = state(0);
    for mu in 0..4 {
        for nu in 0..4 {
            for m in -3i64..=3 {
                for n in -3i64..=3 {
                    for (c1, c2) in [
                        (Chirality::Minus, Chirality::Minus),
                        (Chirality::Minus, Chirality::Plus),
                    ] {
                        let b = bracket(
                            &Observable::Oscillator {
                                chirality: c1,
                                m,
                                mu,
                            },
                            &Observable::Oscillator {
                                chirality: c2,
                                m: n,
                                mu: nu,
                            },
                            &s,
                        )
                        .unwrap();
                        let expect = if c1 == c2 && mu == nu && m + n == 0 && m != 0 {
                            C::new(0.0, -(m as f64) * Metric::sign(mu))
                        } else {
                            C::new(0.0, 0.0)
                        };
                        assert!(
                            (b - expect).norm() < 1e-12,
                            "{c1:?}{m}^{mu} {c2:?}{n}^{nu}: {b}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn zero_mode_bracket() {
    let s = state(0);
    let l = ChartLayout::of(&s);
    for mu in 0..4 {
        for nu in 0..4 {
            let b = bracket(
                &Observable::Coordinate(l.x(mu)),
                &Observable::Coordinate(l.p(nu)),
                &s,
            )
            .unwrap();
            let expect = if mu == nu { Metric::sign(mu) } else { 0.0 };
            assert!((b.re - expect).abs() < 1e-14 && b.im.abs() < 1e-14);
        }
    }
}

fn shifted(s: &StringState<f64>, dx: &[f64]) -> StringState<f64> {
    let mut t = s.clone();
    for (x, d) in t.x_mut().iter_mut().zip(dx) {
        *x += d;
    }
    t
}

#[test]
fn invariants_ignore_position_shift() {
    let s = state(6);
    let t = shifted(&s, &[0.7, -1.3, 2.1, 0.4]);
    for ch in Chirality::BOTH {
        for idx in [vec![1, 2], vec![0, 2, 3]] {
            let spec = InvariantSpec::new(ch, idx, true).unwrap();
            let a = pohlmeyer_via_ddf(&s, &frame(), &spec, 64, 512).unwrap();
            let b = pohlmeyer_via_ddf(&t, &frame(), &spec, 64, 512).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
        let a =
            strip_zero_mode(&ddf_modes(&s, &frame(), ch, 16, 512).unwrap(), &s, &frame()).unwrap();
        let b =
            strip_zero_mode(&ddf_modes(&t, &frame(), ch, 16, 512).unwrap(), &t, &frame()).unwrap();
        for (u, v) in a.all().iter().zip(b.all()) {
            for (x, y) in u.iter().zip(v) {
                assert!((x - y).norm() < 1e-11);
            }
        }
    }
}

#[test]
fn invariant_phase_bookkeeping() {
    let s = state(7);
    let spec = DdfInvariantSpec::new(vec![(2, 1), (3, 2)], vec![(2, 3)]).unwrap();
    let d = ddf_invariant(&s, &frame(), &spec, 512).unwrap();
    let left = ddf_modes(&s, &frame(), Chirality::Minus, 8, 512).unwrap();
    let right = ddf_modes(&s, &frame(), Chirality::Plus, 8, 512).unwrap();
    let phi0 = zero_mode_phase(&s, &frame()).unwrap();
    let unstripped = left.get(1).unwrap()[2] * left.get(2).unwrap()[3] * right.get(3).unwrap()[2];
    let expect = unstripped * C::from_polar(1.0, -3.0 * phi0);
    assert!((d - expect).norm() <= 1e-12 * d.norm());

    // stripped factors carry no x; only the explicit level phase moves
    let t = shifted(&s, &[0.3, 0.9, -0.5, 1.1]);
    let dt = ddf_invariant(&t, &frame(), &spec, 512).unwrap();
    let dphi = zero_mode_phase(&t, &frame()).unwrap() - phi0;
    assert!((dt - d * C::from_polar(1.0, 3.0 * dphi)).norm() <= 1e-10 * d.norm());
}
