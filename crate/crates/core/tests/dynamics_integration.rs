mod common;

use common::*;
use laxtop::dynamics::*;
use laxtop::lax::PhaseState;
use laxtop::rmatrix::*;
use laxtop::specfun::EllipticContext;
use laxtop::tensorops::BlockMatrix;
use num_complex::Complex64;

fn eta() -> Complex64 {
    c(0.25, 0.15)
}

fn zs() -> Vec<Complex64> {
    vec![c(0.31, 0.17), c(0.22, -0.28), c(-0.36, 0.12)]
}

fn config(dt: f64, steps: usize, max_order: usize) -> TrajectoryConfig {
    TrajectoryConfig {
        dt,
        steps,
        z_samples: zs(),
        max_order,
        record_every: steps,
        resync_velocities: false,
    }
}

fn distance(a: &PhaseState, b: &PhaseState) -> f64 {
    flatten(a)
        .iter()
        .zip(flatten(b))
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

#[test]
fn zero_spin_is_stationary() {
    let p = scalar_provider(EllipticContext::trigonometric());
    let mut state = PhaseState::random(1, 3, eta(), 4).unwrap();
    state.spins = BlockMatrix::zeros(1, 3);
    state.qdot = vec![c(0.0, 0.0); 3];
    let (traj, report) = integrate(&p, &state, &config(1e-2, 50, 3)).unwrap();
    assert_eq!(traj.snapshots.last().unwrap().1, state);
    assert_eq!(report.max_abs_drift, 0.0);
}

#[test]
fn local_error_is_fifth_order() {
    let p = scalar_provider(EllipticContext::rational());
    let state = PhaseState::random(1, 2, eta(), 1).unwrap();
    let err = |dt: f64| {
        let exact = dopri5_reference(&p, &state, dt, 1e-14);
        distance(&rk4_step(&p, &state, 0.0, dt, false).unwrap(), &exact)
    };
    let ratio = err(0.04) / err(0.02);
    // ideal ratio 32
    assert!(ratio >= 16.0, "{ratio}");
}

#[test]
fn trajectory_matches_reference_integrator() {
    let p = scalar_provider(EllipticContext::rational());
    let state = PhaseState::random(1, 2, eta(), 1).unwrap();
    let (traj, _) = integrate(&p, &state, &config(1e-3, 1000, 2)).unwrap();
    let (t, end) = traj.snapshots.last().unwrap();
    assert!((t - 1.0).abs() < 1e-12);
    let reference = dopri5_reference(&p, &state, 1.0, 1e-12);
    let d = distance(end, &reference);
    assert!(d < 1e-7, "{d}");
}

#[test]
fn integration_is_deterministic() {
    let p = BelavinRMatrix::with_normalization(
        EllipticContext::elliptic(tau_i()).unwrap(),
        2,
        Normalization::standard(2),
    )
    .unwrap();
    let state = PhaseState::random(2, 2, eta(), 1).unwrap();
    let a = integrate(&p, &state, &config(1e-2, 20, 4)).unwrap();
    let b = integrate(&p, &state, &config(1e-2, 20, 4)).unwrap();
    assert_eq!(a.0.records, b.0.records);
    assert_eq!(
        serde_json::to_string(&a.1).unwrap(),
        serde_json::to_string(&b.1).unwrap()
    );
}

#[test]
fn first_invariant_is_constant() {
    // tr L = φ(z, η) Σ tr S^ii and Σ tr S^ii is a linear invariant
    let p = BelavinRMatrix::with_normalization(
        EllipticContext::elliptic(tau_i()).unwrap(),
        2,
        Normalization::standard(2),
    )
    .unwrap();
    let state = PhaseState::random(2, 2, eta(), 1).unwrap();
    let (traj, report) = integrate(&p, &state, &config(1e-2, 50, 1)).unwrap();
    assert!(report.max_abs_drift < 1e-12, "{}", report.max_abs_drift);
    assert!(constraint_drift(&traj) < 1e-12);
}

#[test]
fn higher_invariants_conserved_and_converge() {
    let p = BelavinRMatrix::with_normalization(
        EllipticContext::elliptic(tau_i()).unwrap(),
        2,
        Normalization::standard(2),
    )
    .unwrap();
    let state = PhaseState::random(2, 2, eta(), 1).unwrap();
    let drifts = drift_refinement(&p, &state, 0.4, &[0.04, 0.02, 0.01], &zs(), 4).unwrap();
    let orders = observed_orders(&drifts);
    assert!(orders.iter().all(|&o| o > 3.0), "{drifts:?} {orders:?}");
}

#[test]
fn rank_one_survives_the_flow() {
    let p = BelavinRMatrix::with_normalization(
        EllipticContext::elliptic(tau_i()).unwrap(),
        2,
        Normalization::standard(2),
    )
    .unwrap();
    let state = PhaseState::rank_one(2, 2, eta(), 3).unwrap();
    let (traj, report) = integrate(&p, &state, &config(1e-3, 200, 4)).unwrap();
    assert!(rank1_drift(&traj) < 1e-9, "{}", rank1_drift(&traj));
    assert!(report.max_relative_drift < 1e-6);
}

#[test]
fn singular_start_is_reported_with_time() {
    let p = scalar_provider(EllipticContext::rational());
    let mut state = PhaseState::random(1, 2, eta(), 1).unwrap();
    state.q[1] = state.q[0];
    match integrate(&p, &state, &config(1e-3, 10, 2)) {
        Err(laxtop::Error::SingularConfiguration { time, .. }) => assert_eq!(time, 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn csv_has_one_row_per_record_interval() {
    let p = scalar_provider(EllipticContext::trigonometric());
    let state = PhaseState::random(1, 2, eta(), 2).unwrap();
    let mut cfg = config(1e-2, 20, 2);
    cfg.record_every = 5;
    let (traj, _) = integrate(&p, &state, &cfg).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&traj, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    assert_eq!(header.len(), 1 + 2 * 2 + 2 * 3 * 2);
    let rows: Vec<csv::StringRecord> = rows.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    let t: f64 = rows[1][0].parse().unwrap();
    assert!((t - 0.05).abs() < 1e-15);
    let q0: f64 = rows[0][1].parse().unwrap();
    assert_eq!(q0, state.q[0].re);
}
