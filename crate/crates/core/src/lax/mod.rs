//! Block Lax pair of the GL(NM) system, the inertia functionals, the
//! equations of motion and the rank-one (interacting tops) reduction.
//!
//! All R-matrix quantities come from an [`RMatrix`] provider, with the
//! convention R^z_12(q) = `quantum(z, q)` and F^z_12(q) = `f_derivative(z, q)`.

mod reduction;
mod state;

pub use reduction::{
    check_rank_one_reduction, check_spin_rs, check_top, spin_rs_eom, spin_rs_lax, top_eom, top_lax,
    Comparison, ReductionReport,
};
pub use state::{PhaseState, Snapshot};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmatrix::RMatrix;
use crate::tensorops::{matnorm, BlockMatrix, MatN, TensorOp};

/// Tolerance on |μ| for [`eom_rhs_strict`].
pub const ON_SHELL_TOLERANCE: f64 = 1e-10;
/// Tolerance on [`rank1_check`] accepted by [`rank1_eom`].
pub const RANK_ONE_TOLERANCE: f64 = 1e-10;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Re-labels a pole-guard failure with the block pair that caused it.
fn at_pair<T>(res: Result<T>, i: usize, j: usize) -> Result<T> {
    res.map_err(|e| match e {
        Error::NearPole {
            arg,
            value,
            distance,
            guard,
        } => Error::NearPole {
            arg: format!("{arg} (blocks {i},{j})"),
            value,
            distance,
            guard,
        },
        other => other,
    })
}

fn check_state(p: &dyn RMatrix, state: &PhaseState) -> Result<()> {
    if p.dim() != state.n {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: state.n,
        });
    }
    Ok(())
}

/// tr_2(A_12 P_12 X_2).
fn tr2_with_swap(a: &TensorOp, x: &MatN) -> Result<MatN> {
    a.compose(&TensorOp::permutation(a.dim()))?.tr2_contract(x)
}

/// ℒ^{ij}(z) = tr_2(R^z_12(q_ij + η) P_12 𝒮^{ij}_2).
pub fn build_l(p: &dyn RMatrix, state: &PhaseState, z: Complex64) -> Result<BlockMatrix> {
    check_state(p, state)?;
    let mut out = BlockMatrix::zeros(state.n, state.m);
    for i in 0..state.m {
        for j in 0..state.m {
            let r = at_pair(p.quantum(z, state.q[i] - state.q[j] + state.eta), i, j)?;
            out.set_block(i, j, &tr2_with_swap(&r, &state.block(i, j))?)?;
        }
    }
    Ok(out)
}

/// ℳ^{ii}(z) = −tr_2(R^{(0),z}_12 P_12 𝒮^{ii}_2), ℳ^{ij}(z) = −tr_2(R^z_12(q_ij) P_12 𝒮^{ij}_2).
pub fn build_m(p: &dyn RMatrix, state: &PhaseState, z: Complex64) -> Result<BlockMatrix> {
    check_state(p, state)?;
    let mut out = BlockMatrix::zeros(state.n, state.m);
    let finite = p.finite_part_arg(z)?;
    let minus = Complex64::new(-1.0, 0.0);
    for i in 0..state.m {
        for j in 0..state.m {
            let block = if i == j {
                tr2_with_swap(&finite, &state.block(i, i))?
            } else {
                let r = at_pair(p.quantum(z, state.q[i] - state.q[j]), i, j)?;
                tr2_with_swap(&r, &state.block(i, j))?
            };
            out.set_block(i, j, &block.map(|v| v * minus))?;
        }
    }
    Ok(out)
}

/// J^η_12 = R^{(0),η}_12 − r^{(0)}_12.
pub fn j_eta_tensor(p: &dyn RMatrix, eta: Complex64) -> Result<TensorOp> {
    p.finite_part_arg(eta)?.sub(&p.classical_finite()?)
}

/// J^{η,q}_12 = R^{(0),q+η}_12 − R^{(0),q}_12.
pub fn j_eta_q_tensor(p: &dyn RMatrix, eta: Complex64, q: Complex64) -> Result<TensorOp> {
    p.finite_part_arg(q + eta)?.sub(&p.finite_part_arg(q)?)
}

pub fn j_eta(p: &dyn RMatrix, eta: Complex64, x: &MatN) -> Result<MatN> {
    j_eta_tensor(p, eta)?.tr2_contract(x)
}

pub fn j_eta_q(p: &dyn RMatrix, eta: Complex64, q: Complex64, x: &MatN) -> Result<MatN> {
    j_eta_q_tensor(p, eta, q)?.tr2_contract(x)
}

/// Time derivative of a phase state: (q̇, q̈, 𝒮̇).
#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub dq: Vec<Complex64>,
    pub dqdot: Vec<Complex64>,
    pub ds: BlockMatrix,
}

/// Spin equations of motion for every block, with q̇ taken from the state and
/// q̈_i = tr 𝒮̇^{ii}. The spin part does not depend on the velocities, so the
/// same expression serves off-shell states.
pub fn eom_rhs(p: &dyn RMatrix, state: &PhaseState) -> Result<StateDerivative> {
    check_state(p, state)?;
    let (n, m) = (state.n, state.m);
    let blocks = state.spins.blocks();
    let jd_tensor = j_eta_tensor(p, state.eta)?;
    let jd: Vec<MatN> = (0..m)
        .map(|i| jd_tensor.tr2_contract(&blocks[i][i]))
        .collect::<Result<_>>()?;
    // jp[a][b] = J^{η,q_ab}(𝒮^{ab}) for a ≠ b
    let mut jp = vec![vec![MatN::zeros(n, n); m]; m];
    for a in 0..m {
        for b in 0..m {
            if a != b {
                let t = at_pair(j_eta_q_tensor(p, state.eta, state.q[a] - state.q[b]), a, b)?;
                jp[a][b] = t.tr2_contract(&blocks[a][b])?;
            }
        }
    }
    let mut ds = BlockMatrix::zeros(n, m);
    for i in 0..m {
        for j in 0..m {
            let s = &blocks[i][j];
            let mut d = s * &jd[j] - &jd[i] * s;
            for k in 0..m {
                if k != j {
                    d += &blocks[i][k] * &jp[k][j];
                }
                if k != i {
                    d -= &jp[i][k] * &blocks[k][j];
                }
            }
            ds.set_block(i, j, &d)?;
        }
    }
    let dqdot = (0..m)
        .map(|i| ds.block(i, i).map(|b| b.trace()))
        .collect::<Result<_>>()?;
    Ok(StateDerivative {
        dq: state.qdot.clone(),
        dqdot,
        ds,
    })
}

/// [`eom_rhs`] that first rejects states with max |μ| above [`ON_SHELL_TOLERANCE`].
pub fn eom_rhs_strict(p: &dyn RMatrix, state: &PhaseState) -> Result<StateDerivative> {
    let mu = state.max_mu();
    if mu > ON_SHELL_TOLERANCE {
        return Err(Error::OffShell { mu });
    }
    eom_rhs(p, state)
}

/// ℒ̇(z) by the chain rule: tr_2(F^z_12(q_ij+η)P_12𝒮^{ij}_2)(q̇_i − q̇_j) + tr_2(R^z_12(q_ij+η)P_12𝒮̇^{ij}_2).
pub fn lax_dot(
    p: &dyn RMatrix,
    state: &PhaseState,
    deriv: &StateDerivative,
    z: Complex64,
) -> Result<BlockMatrix> {
    check_state(p, state)?;
    let mut out = BlockMatrix::zeros(state.n, state.m);
    for i in 0..state.m {
        for j in 0..state.m {
            let arg = state.q[i] - state.q[j] + state.eta;
            let r = at_pair(p.quantum(z, arg), i, j)?;
            let mut block = tr2_with_swap(&r, &deriv.ds.block(i, j)?)?;
            let v = deriv.dq[i] - deriv.dq[j];
            if i != j && v != zero() {
                let f = at_pair(p.f_derivative(z, arg), i, j)?;
                block += tr2_with_swap(&f, &state.block(i, j))? * v;
            }
            out.set_block(i, j, &block)?;
        }
    }
    Ok(out)
}

/// Σ_ij (μ_i − μ_j) E_ij ⊗ tr_2(F^z_12(q_ij+η) P_12 𝒮^{ij}_2).
pub fn extra_term(p: &dyn RMatrix, state: &PhaseState, z: Complex64) -> Result<BlockMatrix> {
    check_state(p, state)?;
    let mu = state.mu();
    let mut out = BlockMatrix::zeros(state.n, state.m);
    for i in 0..state.m {
        for j in 0..state.m {
            let w = mu[i] - mu[j];
            if i == j || w == zero() {
                continue;
            }
            let f = at_pair(p.f_derivative(z, state.q[i] - state.q[j] + state.eta), i, j)?;
            out.set_block(i, j, &(tr2_with_swap(&f, &state.block(i, j))? * w))?;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaxResidual {
    /// ‖ℒ̇ − [ℒ, ℳ] − extra‖.
    pub with_extra: f64,
    /// ‖ℒ̇ − [ℒ, ℳ]‖.
    pub without_extra: f64,
}

pub fn lax_residual(p: &dyn RMatrix, state: &PhaseState, z: Complex64) -> Result<LaxResidual> {
    let deriv = eom_rhs(p, state)?;
    let ldot = lax_dot(p, state, &deriv, z)?;
    let comm = build_l(p, state, z)?.commutator(&build_m(p, state, z)?)?;
    let bare = ldot.matrix() - comm.matrix();
    let extra = extra_term(p, state, z)?;
    Ok(LaxResidual {
        with_extra: matnorm(&(&bare - extra.matrix())),
        without_extra: matnorm(&bare),
    })
}

/// max over i ≠ k of ‖𝒮^{ik}_1 P_12 𝒮^{ki}_1 − 𝒮^{ii}_1 𝒮^{kk}_2‖, using
/// 𝒮^{ik}_1 P_12 𝒮^{ki}_1 = (𝒮^{ik} ⊗ 𝒮^{ki}) P_12.
pub fn rank1_check(state: &PhaseState) -> Result<f64> {
    let perm = TensorOp::permutation(state.n);
    let mut worst = 0.0_f64;
    for i in 0..state.m {
        for k in 0..state.m {
            if i == k {
                continue;
            }
            let lhs = TensorOp::kron(&state.block(i, k), &state.block(k, i))?.compose(&perm)?;
            let rhs = TensorOp::kron(&state.block(i, i), &state.block(k, k))?;
            worst = worst.max(lhs.sub(&rhs)?.norm());
        }
    }
    Ok(worst)
}

/// Diagonal-block dynamics of a rank-one state.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneDerivative {
    pub dq: Vec<Complex64>,
    pub dqdot: Vec<Complex64>,
    pub ds_diag: Vec<MatN>,
}

/// 𝒮̇^{ii} = [𝒮^{ii}, J^η(𝒮^{ii})] + Σ_{k≠i}(𝒮^{ii} J̃^{η,q_ki}(𝒮^{kk}) − J̆^{η,q_ik}(𝒮^{kk}) 𝒮^{ii})
/// with J̃(X) = tr_2(P_12 J_12 X_2) and J̆(X) = tr_2(J_12 P_12 X_2). Only the
/// diagonal blocks are read.
pub fn rank1_eom(p: &dyn RMatrix, state: &PhaseState) -> Result<RankOneDerivative> {
    check_state(p, state)?;
    let residual = rank1_check(state)?;
    if residual > RANK_ONE_TOLERANCE {
        return Err(Error::NotRankOne { residual });
    }
    let m = state.m;
    let perm = TensorOp::permutation(state.n);
    let diag: Vec<MatN> = (0..m).map(|i| state.block(i, i)).collect();
    let jd = j_eta_tensor(p, state.eta)?;
    let mut ds_diag = Vec::with_capacity(m);
    for i in 0..m {
        let s = &diag[i];
        let j_self = jd.tr2_contract(s)?;
        let mut d = s * &j_self - &j_self * s;
        for (k, s_k) in diag.iter().enumerate() {
            if k == i {
                continue;
            }
            let j_ki = at_pair(j_eta_q_tensor(p, state.eta, state.q[k] - state.q[i]), k, i)?;
            let j_ik = at_pair(j_eta_q_tensor(p, state.eta, state.q[i] - state.q[k]), i, k)?;
            let tilde = perm.compose(&j_ki)?.tr2_contract(s_k)?;
            let breve = j_ik.compose(&perm)?.tr2_contract(s_k)?;
            d += s * tilde - breve * s;
        }
        ds_diag.push(d);
    }
    Ok(RankOneDerivative {
        dq: state.qdot.clone(),
        dqdot: ds_diag.iter().map(|d| d.trace()).collect(),
        ds_diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::scalar_provider;
    use crate::specfun::EllipticContext;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_spin_gives_zero_flow() {
        let p = scalar_provider(EllipticContext::trigonometric());
        let state = PhaseState::on_shell(
            c(0.3, 0.1),
            vec![c(-0.2, 0.0), c(0.25, 0.05)],
            BlockMatrix::zeros(1, 2),
        )
        .unwrap();
        let d = eom_rhs(&p, &state).unwrap();
        assert_eq!(d.ds.norm(), 0.0);
        assert!(d.dq.iter().chain(&d.dqdot).all(|v| v.norm() == 0.0));
        assert_eq!(build_m(&p, &state, c(0.3, 0.2)).unwrap().norm(), 0.0);
    }

    #[test]
    fn rational_j_eta_is_division_by_eta() {
        let p = scalar_provider(EllipticContext::rational());
        let x = MatN::from_element(1, 1, c(0.7, -0.2));
        let eta = c(0.4, 0.3);
        let j = j_eta(&p, eta, &x).unwrap();
        assert!((j[(0, 0)] - x[(0, 0)] / eta).norm() < 1e-15);
    }

    #[test]
    fn on_shell_lax_equation_holds() {
        let p = scalar_provider(EllipticContext::rational());
        let state = PhaseState::random(1, 3, c(0.3, 0.1), 5).unwrap();
        let r = lax_residual(&p, &state, c(0.2, 0.35)).unwrap();
        assert!(r.with_extra < 1e-10 && r.without_extra < 1e-10, "{r:?}");
    }

    #[test]
    fn strict_mode_rejects_off_shell() {
        let p = scalar_provider(EllipticContext::rational());
        let mut state = PhaseState::random(1, 2, c(0.3, 0.1), 5).unwrap();
        state.qdot[0] += c(0.5, 0.0);
        assert!(matches!(
            eom_rhs_strict(&p, &state),
            Err(Error::OffShell { .. })
        ));
    }

    #[test]
    fn rank_one_gate() {
        let p = scalar_provider(EllipticContext::rational());
        let full = PhaseState::random(2, 2, c(0.3, 0.1), 2).unwrap();
        assert!(matches!(
            rank1_eom(&p, &full),
            Err(Error::DimensionMismatch { .. })
        ));
        let p2 = crate::rmatrix::BelavinRMatrix::with_normalization(
            EllipticContext::elliptic(c(0.0, 1.0)).unwrap(),
            2,
            crate::rmatrix::Normalization::standard(2),
        )
        .unwrap();
        assert!(matches!(
            rank1_eom(&p2, &full),
            Err(Error::NotRankOne { .. })
        ));
        let single = PhaseState::random(2, 1, c(0.3, 0.1), 2).unwrap();
        assert_eq!(rank1_check(&single).unwrap(), 0.0);
    }
}
