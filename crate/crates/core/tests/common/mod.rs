//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use laxtop::lax::{eom_rhs, PhaseState};
use laxtop::rmatrix::RMatrix;
use laxtop::tensorops::{BlockMatrix, MatN};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn tau_i() -> Complex64 {
    c(0.0, 1.0)
}

/// Direct summation of the odd theta series over |k| ≤ cutoff.
pub fn theta_brute(z: Complex64, tau: Complex64, cutoff: i64) -> Complex64 {
    let i = Complex64::i();
    (-cutoff..=cutoff)
        .map(|k| {
            let h = k as f64 + 0.5;
            (i * PI * tau * h * h + 2.0 * PI * i * h * (z + 0.5)).exp()
        })
        .sum()
}

/// ϑ′(0) from the term-wise derivative of the brute-force series.
pub fn theta_brute_d1_zero(tau: Complex64) -> Complex64 {
    let i = Complex64::i();
    (-64_i64..=64)
        .map(|k| {
            let h = k as f64 + 0.5;
            2.0 * PI * i * h * (i * PI * tau * h * h + PI * i * h).exp()
        })
        .sum()
}

/// φ(z,q) = ϑ′(0)ϑ(z+q)/(ϑ(z)ϑ(q)) from the brute-force series.
pub fn phi_brute(z: Complex64, q: Complex64, tau: Complex64) -> Complex64 {
    theta_brute_d1_zero(tau) * theta_brute(z + q, tau, 64)
        / (theta_brute(z, tau, 64) * theta_brute(q, tau, 64))
}

pub fn central_diff<F: Fn(Complex64) -> Complex64>(f: F, x: Complex64, h: f64) -> Complex64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn matnorm(x: &MatN) -> f64 {
    x.iter().fold(0.0, |a, v| a.max(v.norm()))
}

/// Numerical rank from the singular values, relative to the largest one.
pub fn svd_rank(m: &MatN, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// (q, qdot, S) flattened to one complex vector.
pub fn flatten(s: &PhaseState) -> Vec<Complex64> {
    let mut v = s.q.clone();
    v.extend(&s.qdot);
    v.extend(s.spins.matrix().iter());
    v
}

pub fn unflatten(template: &PhaseState, v: &[Complex64]) -> PhaseState {
    let m = template.m;
    let d = template.n * template.m;
    let mut out = template.clone();
    out.q = v[..m].to_vec();
    out.qdot = v[m..2 * m].to_vec();
    out.spins = BlockMatrix::from_matrix(template.n, m, MatN::from_column_slice(d, d, &v[2 * m..]))
        .unwrap();
    out
}

fn rhs_flat(p: &dyn RMatrix, template: &PhaseState, v: &[Complex64]) -> Vec<Complex64> {
    let d = eom_rhs(p, &unflatten(template, v)).unwrap();
    let mut out = d.dq;
    out.extend(d.dqdot);
    out.extend(d.ds.matrix().iter());
    out
}

fn axpy(y: &[Complex64], terms: &[(f64, &Vec<Complex64>)]) -> Vec<Complex64> {
    let mut out = y.to_vec();
    for (a, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += v * *a;
        }
    }
    out
}

/// Adaptive Dormand–Prince 5(4) reference integrator with tight tolerance.
pub fn dopri5_reference(p: &dyn RMatrix, start: &PhaseState, t_end: f64, tol: f64) -> PhaseState {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let f = |v: &[Complex64]| rhs_flat(p, start, v);
    let mut y = flatten(start);
    let mut t: f64 = 0.0;
    let mut h: f64 = 1e-3;
    while t < t_end {
        h = h.min(t_end - t);
        let mut k: Vec<Vec<Complex64>> = vec![f(&y)];
        for row in A.iter().take(5) {
            let terms: Vec<(f64, &Vec<Complex64>)> =
                row.iter().zip(&k).map(|(a, kk)| (a * h, kk)).collect();
            k.push(f(&axpy(&y, &terms)));
        }
        let terms: Vec<(f64, &Vec<Complex64>)> =
            A[5].iter().zip(&k).map(|(a, kk)| (a * h, kk)).collect();
        let y5 = axpy(&y, &terms);
        k.push(f(&y5));
        let err_terms: Vec<(f64, &Vec<Complex64>)> =
            E.iter().zip(&k).map(|(e, kk)| (e * h, kk)).collect();
        let zero = vec![c(0.0, 0.0); y.len()];
        let err = axpy(&zero, &err_terms)
            .iter()
            .zip(&y)
            .map(|(e, v)| e.norm() / (1.0 + v.norm()))
            .fold(0.0, f64::max);
        if err <= tol {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    unflatten(start, &y)
}
