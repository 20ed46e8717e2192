//! Reference implementations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

/// Direct `O(N²)` DFT with `f(σ_j) = Σ_k c_k e^{ikσ_j}`, `|k| < N/2`.
pub fn dft(grid: &[f64]) -> Vec<(i64, C)> {
    let n = grid.len();
    let half = (n / 2) as i64;
    (-(half - 1)..half)
        .map(|k| {
            let c: C = grid
                .iter()
                .enumerate()
                .map(|(j, &v)| C::from_polar(v, -2.0 * PI * (k * j as i64) as f64 / n as f64))
                .sum();
            (k, c / n as f64)
        })
        .collect()
}

/// Fourier coefficients whose size exceeds `1e-15` of the largest.
pub fn significant_modes(grid: &[f64]) -> Vec<(i64, C)> {
    let all = dft(grid);
    let max = all.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    all.into_iter()
        .filter(|(_, c)| c.norm() > 1e-15 * max)
        .collect()
}

/// Evaluates a Fourier series at `s`.
pub fn fourier_eval(modes: &[(i64, C)], s: f64) -> f64 {
    modes
        .iter()
        .map(|&(k, c)| (c * C::from_polar(1.0, k as f64 * s)).re)
        .sum()
}

#[derive(Clone, Copy)]
struct Term {
    c: C,
    p: i32,
    q: i64,
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `∫₀^t` of `Σ c t^p e^{iqt}`, in closed form.
fn integrate(terms: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for t in terms {
        if t.q == 0 {
            out.push(Term {
                c: t.c / (t.p + 1) as f64,
                p: t.p + 1,
                q: 0,
            });
            continue;
        }
        let iq = C::new(0.0, t.q as f64);
        for j in 0..=t.p {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * factorial(t.p) / factorial(t.p - j);
            out.push(Term {
                c: t.c * w / iq.powi(j + 1),
                p: t.p - j,
                q: t.q,
            });
        }
        let sign = if t.p % 2 == 0 { 1.0 } else { -1.0 };
        out.push(Term {
            c: -t.c * sign * factorial(t.p) / iq.powi(t.p + 1),
            p: 0,
            q: 0,
        });
    }
    out
}

/// `∫_{0≤s₁≤…≤s_n≤2π} e^{i(k₁s₁+…+k_ns_n)}`.
pub fn iterated_exponential(ks: &[i64]) -> C {
    let mut terms = vec![Term {
        c: C::new(1.0, 0.0),
        p: 0,
        q: 0,
    }];
    for &k in ks {
        for t in terms.iter_mut() {
            t.q += k;
        }
        terms = integrate(&terms);
    }
    terms.iter().map(|t| t.c * (2.0 * PI).powi(t.p)).sum()
}

/// Iterated integral by explicit summation over every tuple of Fourier
/// modes, `f₁` innermost.
pub fn brute_force_simplex(factors: &[&[f64]]) -> f64 {
    let modes: Vec<Vec<(i64, C)>> = factors.iter().map(|f| significant_modes(f)).collect();
    let mut total = C::new(0.0, 0.0);
    let mut idx = vec![0usize; modes.len()];
    'outer: loop {
        let ks: Vec<i64> = idx.iter().zip(&modes).map(|(&i, m)| m[i].0).collect();
        let c: C = idx.iter().zip(&modes).map(|(&i, m)| m[i].1).product();
        total += c * iterated_exponential(&ks);
        for pos in (0..idx.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < modes[pos].len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }
    total.re
}

/// `Tr U(2π)` for `U′ = U·Σ_μ P^μ(s) A_μ`, `U(0) = 1`, by classical RK4 on
/// the Fourier series of each component.
pub fn wilson_rk4(components: &[Vec<f64>], matrices: &[DMatrix<C>], steps: usize) -> C {
    let series: Vec<Vec<(i64, C)>> = components.iter().map(|c| significant_modes(c)).collect();
    let d = matrices[0].nrows();
    let a = |s: f64| {
        series
            .iter()
            .zip(matrices)
            .fold(DMatrix::<C>::zeros(d, d), |acc, (m, am)| {
                acc + am * C::new(fourier_eval(m, s), 0.0)
            })
    };
    let h = 2.0 * PI / steps as f64;
    let mut u = DMatrix::<C>::identity(d, d);
    for i in 0..steps {
        let s = i as f64 * h;
        let (a0, a1, a2) = (a(s), a(s + 0.5 * h), a(s + h));
        let k1 = &u * &a0;
        let k2 = (&u + &k1 * C::new(0.5 * h, 0.0)) * &a1;
        let k3 = (&u + &k2 * C::new(0.5 * h, 0.0)) * &a1;
        let k4 = (&u + &k3 * C::new(h, 0.0)) * &a2;
        u += (k1 + k2 * C::new(2.0, 0.0) + k3 * C::new(2.0, 0.0) + k4) * C::new(h / 6.0, 0.0);
    }
    u.trace()
}

/// `Σ_{|μ|=n} Z^{μ} Tr(A_{μ₁}⋯A_{μ_n})` with `Z` supplied by the caller.
pub fn wilson_order(
    dim: usize,
    order: usize,
    matrices: &[DMatrix<C>],
    z: impl Fn(&[usize]) -> f64,
) -> C {
    let d = matrices[0].nrows();
    let mut total = C::new(0.0, 0.0);
    for code in 0..dim.pow(order as u32) {
        let idx: Vec<usize> = (0..order)
            .map(|i| code / dim.pow((order - 1 - i) as u32) % dim)
            .collect();
        let prod = idx
            .iter()
            .fold(DMatrix::<C>::identity(d, d), |acc, &mu| acc * &matrices[mu]);
        total += prod.trace() * z(&idx);
    }
    total
}
