//! Fixed-step RK4 integration of the equations of motion with monitoring of
//! the spectral invariants tr ℒ(z)^k, the on-shell constraint and the rank-one
//! residual.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::{build_l, eom_rhs, rank1_check, PhaseState, StateDerivative};
use crate::rmatrix::RMatrix;
use crate::tensorops::MatN;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub steps: usize,
    pub z_samples: Vec<Complex64>,
    /// Invariants tr ℒ^k are tracked for k = 1..=max_order.
    pub max_order: usize,
    /// Snapshot and CSV row interval in steps.
    pub record_every: usize,
    /// Reset qdot to tr 𝒮^{ii} after each step. Off by default so that the
    /// constraint drift measures the flow itself.
    #[serde(default)]
    pub resync_velocities: bool,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.max_order == 0 {
            return Err(Error::InvalidConfig("max_order must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        if self.z_samples.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one spectral point is required".into(),
            ));
        }
        Ok(())
    }
}

fn singular(time: f64, err: Error) -> Error {
    match err {
        Error::NearPole { .. } | Error::NonFinite(_) => Error::SingularConfiguration {
            time,
            detail: err.to_string(),
        },
        other => other,
    }
}

/// state + h·d, without touching the constraint.
fn advance(state: &PhaseState, d: &StateDerivative, h: f64) -> Result<PhaseState> {
    let mut next = state.clone();
    for i in 0..state.m {
        next.q[i] += d.dq[i] * h;
        next.qdot[i] += d.dqdot[i] * h;
    }
    let spins = state.spins.matrix() + d.ds.matrix() * Complex64::new(h, 0.0);
    next.spins = crate::tensorops::BlockMatrix::from_matrix(state.n, state.m, spins)?;
    Ok(next)
}

/// One classical RK4 step of (q, qdot, 𝒮) starting at time `t`.
pub fn rk4_step(
    p: &dyn RMatrix,
    state: &PhaseState,
    t: f64,
    dt: f64,
    resync: bool,
) -> Result<PhaseState> {
    let rhs = |s: &PhaseState| eom_rhs(p, s);
    let step = || -> Result<PhaseState> {
        let k1 = rhs(state)?;
        let k2 = rhs(&advance(state, &k1, dt / 2.0)?)?;
        let k3 = rhs(&advance(state, &k2, dt / 2.0)?)?;
        let k4 = rhs(&advance(state, &k3, dt)?)?;
        let mut next = state.clone();
        let w = dt / 6.0;
        for i in 0..state.m {
            next.q[i] += (k1.dq[i] + (k2.dq[i] + k3.dq[i]) * 2.0 + k4.dq[i]) * w;
            next.qdot[i] += (k1.dqdot[i] + (k2.dqdot[i] + k3.dqdot[i]) * 2.0 + k4.dqdot[i]) * w;
        }
        let ds = k1.ds.matrix()
            + (k2.ds.matrix() + k3.ds.matrix()) * Complex64::new(2.0, 0.0)
            + k4.ds.matrix();
        let spins = state.spins.matrix() + ds * Complex64::new(w, 0.0);
        next.spins = crate::tensorops::BlockMatrix::from_matrix(state.n, state.m, spins)?;
        if resync {
            next.resync_velocities();
        }
        next.check_finite()
            .map_err(|_| Error::NonFinite("rk4_step"))?;
        Ok(next)
    };
    step().map_err(|e| singular(t, e))
}

/// tr ℒ(z)^k for k = 1..=max_order, indexed `[z][k-1]`.
pub fn invariants(
    p: &dyn RMatrix,
    state: &PhaseState,
    zs: &[Complex64],
    max_order: usize,
) -> Result<Vec<Vec<Complex64>>> {
    zs.iter()
        .map(|&z| {
            let l = build_l(p, state, z)?.into_matrix();
            let mut power: MatN = l.clone();
            let mut out = Vec::with_capacity(max_order);
            for k in 1..=max_order {
                if k > 1 {
                    power = &power * &l;
                }
                out.push(power.trace());
            }
            Ok(out)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub q: Vec<Complex64>,
    pub invariants: Vec<Vec<Complex64>>,
    pub max_mu: f64,
    pub rank1_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// One record per step, including t = 0.
    pub records: Vec<TrajectoryRecord>,
    /// Full states every `record_every` steps and at the end.
    pub snapshots: Vec<(f64, PhaseState)>,
    pub record_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantDrift {
    pub k: usize,
    pub z: [f64; 2],
    pub initial: [f64; 2],
    pub max_drift: f64,
    /// max_drift / |initial|, or max_drift when the initial value is zero.
    pub relative_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub entries: Vec<InvariantDrift>,
    pub max_relative_drift: f64,
    pub max_abs_drift: f64,
}

fn record(
    p: &dyn RMatrix,
    state: &PhaseState,
    t: f64,
    cfg: &TrajectoryConfig,
) -> Result<TrajectoryRecord> {
    Ok(TrajectoryRecord {
        t,
        q: state.q.clone(),
        invariants: invariants(p, state, &cfg.z_samples, cfg.max_order)
            .map_err(|e| singular(t, e))?,
        max_mu: state.max_mu(),
        rank1_residual: rank1_check(state)?,
    })
}

pub fn integrate(
    p: &dyn RMatrix,
    state: &PhaseState,
    cfg: &TrajectoryConfig,
) -> Result<(Trajectory, ConservationReport)> {
    cfg.validate()?;
    let mut current = state.clone();
    let mut records = vec![record(p, &current, 0.0, cfg)?];
    let mut snapshots = vec![(0.0, current.clone())];
    for step in 1..=cfg.steps {
        let t0 = (step - 1) as f64 * cfg.dt;
        current = rk4_step(p, &current, t0, cfg.dt, cfg.resync_velocities)?;
        let t = step as f64 * cfg.dt;
        records.push(record(p, &current, t, cfg)?);
        if step % cfg.record_every == 0 || step == cfg.steps {
            snapshots.push((t, current.clone()));
        }
    }
    let traj = Trajectory {
        records,
        snapshots,
        record_every: cfg.record_every,
    };
    let report = conservation_report(&traj, &cfg.z_samples);
    Ok((traj, report))
}

pub fn conservation_report(traj: &Trajectory, zs: &[Complex64]) -> ConservationReport {
    let first = &traj.records[0].invariants;
    let mut entries = Vec::new();
    for (zi, z) in zs.iter().enumerate() {
        for (ki, &initial) in first[zi].iter().enumerate() {
            let max_drift = traj.records.iter().fold(0.0_f64, |acc, r| {
                acc.max((r.invariants[zi][ki] - initial).norm())
            });
            let scale = initial.norm();
            entries.push(InvariantDrift {
                k: ki + 1,
                z: [z.re, z.im],
                initial: [initial.re, initial.im],
                max_drift,
                relative_drift: if scale > 0.0 {
                    max_drift / scale
                } else {
                    max_drift
                },
            });
        }
    }
    ConservationReport {
        max_relative_drift: entries.iter().fold(0.0, |a, e| a.max(e.relative_drift)),
        max_abs_drift: entries.iter().fold(0.0, |a, e| a.max(e.max_drift)),
        entries,
    }
}

/// max over the trajectory of max_i |μ^i_0|.
pub fn constraint_drift(traj: &Trajectory) -> f64 {
    traj.records.iter().fold(0.0, |a, r| a.max(r.max_mu))
}

/// max over the trajectory of the rank-one residual.
pub fn rank1_drift(traj: &Trajectory) -> f64 {
    traj.records
        .iter()
        .fold(0.0, |a, r| a.max(r.rank1_residual))
}

/// Writes `t, q_i (re, im), invariant values` every `record_every` steps.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let first = &traj.records[0];
    let mut header = vec!["t".to_string()];
    for i in 0..first.q.len() {
        header.push(format!("q{i}_re"));
        header.push(format!("q{i}_im"));
    }
    for (zi, row) in first.invariants.iter().enumerate() {
        for k in 1..=row.len() {
            header.push(format!("I{k}_z{zi}_re"));
            header.push(format!("I{k}_z{zi}_im"));
        }
    }
    w.write_record(&header)?;
    let last = traj.records.len() - 1;
    for (idx, r) in traj.records.iter().enumerate() {
        if idx % traj.record_every != 0 && idx != last {
            continue;
        }
        let mut row = vec![fmt17(r.t)];
        for v in &r.q {
            row.push(fmt17(v.re));
            row.push(fmt17(v.im));
        }
        for v in r.invariants.iter().flatten() {
            row.push(fmt17(v.re));
            row.push(fmt17(v.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Max absolute invariant drift over [0, T] for each step size; used to read
/// off the refinement order.
pub fn drift_refinement(
    p: &dyn RMatrix,
    state: &PhaseState,
    total_time: f64,
    dts: &[f64],
    zs: &[Complex64],
    max_order: usize,
) -> Result<Vec<f64>> {
    dts.iter()
        .map(|&dt| {
            let cfg = TrajectoryConfig {
                dt,
                steps: (total_time / dt).round() as usize,
                z_samples: zs.to_vec(),
                max_order,
                record_every: usize::MAX,
                resync_velocities: false,
            };
            Ok(integrate(p, state, &cfg)?.1.max_abs_drift)
        })
        .collect()
}

/// log2 of successive ratios of a sequence obtained by halving the step.
pub fn observed_orders(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::scalar_provider;
    use crate::specfun::EllipticContext;
    use crate::tensorops::BlockMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(steps: usize) -> TrajectoryConfig {
        TrajectoryConfig {
            dt: 1e-2,
            steps,
            z_samples: vec![c(0.3, 0.2)],
            max_order: 2,
            record_every: 5,
            resync_velocities: false,
        }
    }

    #[test]
    fn zero_spin_is_stationary() {
        let p = scalar_provider(EllipticContext::rational());
        let state = PhaseState::on_shell(
            c(0.3, 0.1),
            vec![c(-0.3, 0.0), c(0.3, 0.0)],
            BlockMatrix::zeros(1, 2),
        )
        .unwrap();
        let (traj, report) = integrate(&p, &state, &cfg(10)).unwrap();
        assert_eq!(traj.snapshots.last().unwrap().1, state);
        assert_eq!(report.max_abs_drift, 0.0);
        assert_eq!(constraint_drift(&traj), 0.0);
        assert_eq!(rank1_drift(&traj), 0.0);
    }

    #[test]
    fn collision_reports_time() {
        let p = scalar_provider(EllipticContext::rational());
        let eta = c(0.3, 0.0);
        let state = PhaseState::random(1, 2, eta, 1).unwrap();
        let mut bad = state.clone();
        bad.q = vec![c(0.0, 0.0), eta];
        let err = integrate(&p, &bad, &cfg(3)).unwrap_err();
        assert!(
            matches!(err, Error::SingularConfiguration { time, .. } if time == 0.0),
            "{err}"
        );
    }

    #[test]
    fn csv_has_expected_rows() {
        let p = scalar_provider(EllipticContext::rational());
        let state = PhaseState::random(1, 2, c(0.3, 0.1), 2).unwrap();
        let (traj, _) = integrate(&p, &state, &cfg(12)).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 4);
        assert_eq!(
            lines[0],
            "t,q0_re,q0_im,q1_re,q1_im,I1_z0_re,I1_z0_im,I2_z0_re,I2_z0_im"
        );
    }
}
