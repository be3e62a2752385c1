//! Falsification-style numeric checks of the functional identities behind the
//! Lax construction: scalar Fay-type identities and their R-matrix analogues on
//! C^n⊗C^n⊗C^n.
//!
//! Each check draws a deterministic set of complex sample points, keeps the
//! ones that stay `pole_guard` away from every singular combination the
//! identity involves, and reports the largest max-abs residual.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rmatrix::RMatrix;
use crate::specfun::{EllipticContext, Regime};
use crate::tensorops::{SpacePair, TensorOp, ThreeOp};

pub const SAMPLING_POLE_GUARD: f64 = 5e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    /// Each complex variable is drawn from [−w, w] × [−w, w].
    pub half_width: f64,
    pub pole_guard: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 0,
            count: 200,
            half_width: 0.5,
            pole_guard: SAMPLING_POLE_GUARD,
        }
    }
}

impl SamplePlan {
    pub fn new(seed: u64, count: usize) -> Self {
        SamplePlan {
            seed,
            count,
            ..Default::default()
        }
    }

    /// Draws `count` accepted points of `vars` complex variables. `critical`
    /// lists the combinations that must stay away from the singular set.
    pub fn draw<G>(&self, ctx: &EllipticContext, vars: usize, critical: G) -> Vec<Vec<Complex64>>
    where
        G: Fn(&[Complex64]) -> Vec<Complex64>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let w = self.half_width;
        let mut out = Vec::with_capacity(self.count);
        let max_attempts = self.count.saturating_mul(1000).max(1000);
        for _ in 0..max_attempts {
            if out.len() == self.count {
                break;
            }
            let point: Vec<Complex64> = (0..vars)
                .map(|_| Complex64::new(rng.random_range(-w..=w), rng.random_range(-w..=w)))
                .collect();
            if critical(&point)
                .iter()
                .all(|&c| ctx.pole_distance(c) >= self.pole_guard)
            {
                out.push(point);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub samples: usize,
    /// Accepted points whose evaluation still hit a pole guard.
    pub skipped: usize,
    pub max_residual: f64,
    /// Sample at which the max residual occurred, as [re, im] pairs.
    pub worst_point: Vec<[f64; 2]>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates `residual` at every sample point and max-reduces the results in
/// sample order, so the report does not depend on the thread schedule.
pub fn run_identity<G, F>(
    name: &str,
    ctx: &EllipticContext,
    plan: &SamplePlan,
    tolerance: f64,
    vars: usize,
    critical: G,
    residual: F,
) -> IdentityReport
where
    G: Fn(&[Complex64]) -> Vec<Complex64>,
    F: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    let points = plan.draw(ctx, vars, critical);
    let values: Vec<Result<f64>> = points.par_iter().map(|p| residual(p)).collect();
    let mut skipped = 0;
    let mut max_residual = 0.0_f64;
    let mut worst = None;
    for (idx, value) in values.iter().enumerate() {
        match value {
            Ok(r) if r.is_nan() || *r > max_residual || (worst.is_none() && *r >= max_residual) => {
                max_residual = if r.is_nan() { f64::INFINITY } else { *r };
                worst = Some(idx);
            }
            Ok(_) => {}
            Err(_) => skipped += 1,
        }
    }
    let evaluated = points.len() - skipped;
    IdentityReport {
        identity: name.to_string(),
        samples: points.len(),
        skipped,
        max_residual,
        worst_point: worst
            .map(|i| points[i].iter().map(|v| [v.re, v.im]).collect())
            .unwrap_or_default(),
        tolerance,
        pass: evaluated > 0 && points.len() == plan.count && max_residual < tolerance,
    }
}

// ---------------------------------------------------------------------------
// Scalar identities

pub fn fay_residual(
    ctx: &EllipticContext,
    z1: Complex64,
    q1: Complex64,
    z2: Complex64,
    q2: Complex64,
) -> Result<f64> {
    let phi = |a, b| ctx.kronecker_phi(a, b);
    let lhs = phi(z1, q1)? * phi(z2, q2)?;
    let rhs = phi(z1 - z2, q1)? * phi(z2, q1 + q2)? + phi(z2 - z1, q2)? * phi(z1, q1 + q2)?;
    Ok((lhs - rhs).norm())
}

/// φ(z,q1)φ(z,q2) = φ(z,q1+q2)(E1(z)+E1(q1)+E1(q2)−E1(q1+q2+z)).
pub fn degeneration_residual(
    ctx: &EllipticContext,
    z: Complex64,
    q1: Complex64,
    q2: Complex64,
) -> Result<f64> {
    let lhs = ctx.kronecker_phi(z, q1)? * ctx.kronecker_phi(z, q2)?;
    let bracket = ctx.e1(z)? + ctx.e1(q1)? + ctx.e1(q2)? - ctx.e1(q1 + q2 + z)?;
    Ok((lhs - ctx.kronecker_phi(z, q1 + q2)? * bracket).norm())
}

/// φ(z,q)φ(z,−q) = ℘(z) − ℘(q).
pub fn scalar_unitarity_residual(ctx: &EllipticContext, z: Complex64, q: Complex64) -> Result<f64> {
    let lhs = ctx.kronecker_phi(z, q)? * ctx.kronecker_phi(z, -q)?;
    Ok((lhs - (ctx.wp(z)? - ctx.wp(q)?)).norm())
}

/// φ(z,q1)φ(z,q2) = φ(z,q1+q2)(E1(q1)+E1(q2)) − ∂_zφ(z,q1+q2).
pub fn rewritten_degeneration_residual(
    ctx: &EllipticContext,
    z: Complex64,
    q1: Complex64,
    q2: Complex64,
) -> Result<f64> {
    let lhs = ctx.kronecker_phi(z, q1)? * ctx.kronecker_phi(z, q2)?;
    let s = q1 + q2;
    let rhs = ctx.kronecker_phi(z, s)? * (ctx.e1(q1)? + ctx.e1(q2)?) - ctx.phi_dz(z, s)?;
    Ok((lhs - rhs).norm())
}

/// φ(z+1,q) = φ(z,q) and φ(z+τ,q) = exp(−2πiq)φ(z,q); returns the larger residual.
pub fn quasi_periodicity_residual(
    ctx: &EllipticContext,
    z: Complex64,
    q: Complex64,
) -> Result<f64> {
    let base = ctx.kronecker_phi(z, q)?;
    let a = (ctx.kronecker_phi(z + 1.0, q)? - base).norm();
    let factor = (Complex64::new(0.0, -2.0 * std::f64::consts::PI) * q).exp();
    let b = (ctx.kronecker_phi(z + ctx.tau(), q)? - factor * base).norm();
    Ok(a.max(b))
}

/// Fay identity, both equal-argument degenerations and the rewritten form;
/// quasi-periodicity is added in the elliptic regime.
pub fn check_scalar_suite(
    ctx: &EllipticContext,
    plan: &SamplePlan,
    tolerance: f64,
) -> Vec<IdentityReport> {
    let mut out = vec![
        run_identity(
            "fay",
            ctx,
            plan,
            tolerance,
            4,
            |v| vec![v[0], v[1], v[2], v[3], v[0] - v[2], v[1] + v[3]],
            |v| fay_residual(ctx, v[0], v[1], v[2], v[3]),
        ),
        run_identity(
            "fay_degeneration",
            ctx,
            plan,
            tolerance,
            3,
            |v| vec![v[0], v[1], v[2], v[1] + v[2], v[0] + v[1] + v[2]],
            |v| degeneration_residual(ctx, v[0], v[1], v[2]),
        ),
        run_identity(
            "scalar_unitarity",
            ctx,
            plan,
            tolerance,
            2,
            |v| vec![v[0], v[1]],
            |v| scalar_unitarity_residual(ctx, v[0], v[1]),
        ),
        run_identity(
            "rewritten_degeneration",
            ctx,
            plan,
            tolerance,
            3,
            |v| vec![v[0], v[1], v[2], v[1] + v[2], v[0] + v[1] + v[2]],
            |v| rewritten_degeneration_residual(ctx, v[0], v[1], v[2]),
        ),
    ];
    if ctx.regime() == Regime::Elliptic {
        out.push(run_identity(
            "quasi_periodicity",
            ctx,
            plan,
            tolerance,
            2,
            |v| vec![v[0], v[1], v[0] + v[1]],
            |v| quasi_periodicity_residual(ctx, v[0], v[1]),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// R-matrix identities

fn three(op: &TensorOp, pair: SpacePair) -> ThreeOp {
    op.embed(pair)
}

/// R^z_12(q12) R^w_23(q23) − R^w_13(q13) R^{z−w}_12(q12) − R^{w−z}_23(q23) R^z_13(q13).
pub fn aybe_residual(
    p: &dyn RMatrix,
    z: Complex64,
    w: Complex64,
    q1: Complex64,
    q2: Complex64,
    q3: Complex64,
) -> Result<f64> {
    let (q12, q23, q13) = (q1 - q2, q2 - q3, q1 - q3);
    let lhs =
        &three(&p.quantum(z, q12)?, SpacePair::S12) * &three(&p.quantum(w, q23)?, SpacePair::S23);
    let first = &three(&p.quantum(w, q13)?, SpacePair::S13)
        * &three(&p.quantum(z - w, q12)?, SpacePair::S12);
    let second = &three(&p.quantum(w - z, q23)?, SpacePair::S23)
        * &three(&p.quantum(z, q13)?, SpacePair::S13);
    Ok((&(&lhs - &first) - &second).norm())
}

/// R^z_12(q) R^z_21(−q) − (℘(z) − ℘(q))·1.
pub fn unitarity_residual(p: &dyn RMatrix, z: Complex64, q: Complex64) -> Result<f64> {
    let prod = p.quantum(z, q)?.compose(&p.quantum(z, -q)?.swap_spaces())?;
    let rhs = TensorOp::identity(p.dim()).scale(p.wp(z)? - p.wp(q)?);
    Ok(prod.sub(&rhs)?.norm())
}

/// R^z_12(q) + R^{−z}_21(−q).
pub fn skew_residual(p: &dyn RMatrix, z: Complex64, q: Complex64) -> Result<f64> {
    Ok(p.quantum(z, q)?
        .add(&p.quantum(-z, -q)?.swap_spaces())?
        .norm())
}

pub fn qybe_residual(
    p: &dyn RMatrix,
    h: Complex64,
    z1: Complex64,
    z2: Complex64,
    z3: Complex64,
) -> Result<f64> {
    let r12 = three(&p.quantum(h, z1 - z2)?, SpacePair::S12);
    let r13 = three(&p.quantum(h, z1 - z3)?, SpacePair::S13);
    let r23 = three(&p.quantum(h, z2 - z3)?, SpacePair::S23);
    let lhs = &(&r12 * &r13) * &r23;
    let rhs = &(&r23 * &r13) * &r12;
    Ok((&lhs - &rhs).norm())
}

/// R^z(q) − R^q(z) P.
pub fn swap_residual(p: &dyn RMatrix, z: Complex64, q: Complex64) -> Result<f64> {
    let rhs = p.quantum(q, z)?.compose(&TensorOp::permutation(p.dim()))?;
    Ok(p.quantum(z, q)?.sub(&rhs)?.norm())
}

/// R1(z) − (r(z)² − ℘(z)·1)/2 with R1 the ℏ¹ coefficient.
pub fn classical_limit_residual(p: &dyn RMatrix, z: Complex64) -> Result<f64> {
    let r = p.classical_r(z)?;
    let rhs = r
        .compose(&r)?
        .sub(&TensorOp::identity(p.dim()).scale(p.wp(z)?))?
        .scale(Complex64::new(0.5, 0.0));
    Ok(p.hbar_first_order(z)?.sub(&rhs)?.norm())
}

/// r(z) − R^{z,(0)} P.
pub fn classical_swap_residual(p: &dyn RMatrix, z: Complex64) -> Result<f64> {
    let rebuilt = crate::rmatrix::classical_from_swap(p, z)?;
    Ok(p.classical_r(z)?.sub(&rebuilt)?.norm())
}

/// r_12(z) + r_21(−z).
pub fn classical_skew_residual(p: &dyn RMatrix, z: Complex64) -> Result<f64> {
    Ok(p.classical_r(z)?
        .add(&p.classical_r(-z)?.swap_spaces())?
        .norm())
}

/// R^z_12(x)R^z_23(y) = R^z_13(x+y) r_12(x) + r_23(y) R^z_13(x+y) − ∂_z R^z_13(x+y).
pub fn master_residual(p: &dyn RMatrix, z: Complex64, x: Complex64, y: Complex64) -> Result<f64> {
    let lhs = &three(&p.quantum(z, x)?, SpacePair::S12) * &three(&p.quantum(z, y)?, SpacePair::S23);
    let r13 = three(&p.quantum(z, x + y)?, SpacePair::S13);
    let rhs = &(&(&r13 * &three(&p.classical_r(x)?, SpacePair::S12))
        + &(&three(&p.classical_r(y)?, SpacePair::S23) * &r13))
        - &three(&p.hbar_derivative(z, x + y)?, SpacePair::S13);
    Ok((&lhs - &rhs).norm())
}

/// x → 0 degeneration:
/// R^{(0),z}_12 R^z_23(y) = F^z_13(y)P_12 + R^z_13(y) r^(0)_12 + r_23(y) R^z_13(y) − ∂_z R^z_13(y).
pub fn degeneration_x_residual(p: &dyn RMatrix, z: Complex64, y: Complex64) -> Result<f64> {
    let n = p.dim();
    let lhs =
        &three(&p.finite_part_arg(z)?, SpacePair::S12) * &three(&p.quantum(z, y)?, SpacePair::S23);
    let r13 = three(&p.quantum(z, y)?, SpacePair::S13);
    let p12 = three(&TensorOp::permutation(n), SpacePair::S12);
    let rhs = &(&(&(&three(&p.f_derivative(z, y)?, SpacePair::S13) * &p12)
        + &(&r13 * &three(&p.classical_finite()?, SpacePair::S12)))
        + &(&three(&p.classical_r(y)?, SpacePair::S23) * &r13))
        - &three(&p.hbar_derivative(z, y)?, SpacePair::S13);
    Ok((&lhs - &rhs).norm())
}

/// y → 0 degeneration:
/// R^z_12(x) R^{(0),z}_23 = R^z_13(x) r_12(x) + r^(0)_23 R^z_13(x) + P_23 F^z_13(x) − ∂_z R^z_13(x).
pub fn degeneration_y_residual(p: &dyn RMatrix, z: Complex64, x: Complex64) -> Result<f64> {
    let n = p.dim();
    let lhs =
        &three(&p.quantum(z, x)?, SpacePair::S12) * &three(&p.finite_part_arg(z)?, SpacePair::S23);
    let r13 = three(&p.quantum(z, x)?, SpacePair::S13);
    let p23 = three(&TensorOp::permutation(n), SpacePair::S23);
    let rhs = &(&(&(&r13 * &three(&p.classical_r(x)?, SpacePair::S12))
        + &(&three(&p.classical_finite()?, SpacePair::S23) * &r13))
        + &(&p23 * &three(&p.f_derivative(z, x)?, SpacePair::S13)))
        - &three(&p.hbar_derivative(z, x)?, SpacePair::S13);
    Ok((&lhs - &rhs).norm())
}

/// R^{(0),z}_12 R^z_23(q+η) − R^z_12(η) R^z_23(q)
///   = F^z_13(q+η)P_12 + R^z_13(q+η)(r^(0)_12 − r_12(η)) + (r_23(q+η) − r_23(q)) R^z_13(q+η).
pub fn combined_degeneration_residual(
    p: &dyn RMatrix,
    z: Complex64,
    eta: Complex64,
    q: Complex64,
) -> Result<f64> {
    let n = p.dim();
    let lhs = &(&three(&p.finite_part_arg(z)?, SpacePair::S12)
        * &three(&p.quantum(z, q + eta)?, SpacePair::S23))
        - &(&three(&p.quantum(z, eta)?, SpacePair::S12)
            * &three(&p.quantum(z, q)?, SpacePair::S23));
    let r13 = three(&p.quantum(z, q + eta)?, SpacePair::S13);
    let p12 = three(&TensorOp::permutation(n), SpacePair::S12);
    let r0_minus = p.classical_finite()?.sub(&p.classical_r(eta)?)?;
    let r_diff = p.classical_r(q + eta)?.sub(&p.classical_r(q)?)?;
    let rhs = &(&(&three(&p.f_derivative(z, q + eta)?, SpacePair::S13) * &p12)
        + &(&r13 * &three(&r0_minus, SpacePair::S12)))
        + &(&three(&r_diff, SpacePair::S23) * &r13);
    Ok((&lhs - &rhs).norm())
}

/// R^z_12(a)R^z_23(b+η) − R^z_12(a+η)R^z_23(b)
///   = R^z_13(a+b+η)(r_12(a) − r_12(a+η)) + (r_23(b+η) − r_23(b)) R^z_13(a+b+η).
pub fn shifted_corollary_residual(
    p: &dyn RMatrix,
    z: Complex64,
    eta: Complex64,
    a: Complex64,
    b: Complex64,
) -> Result<f64> {
    let lhs = &(&three(&p.quantum(z, a)?, SpacePair::S12)
        * &three(&p.quantum(z, b + eta)?, SpacePair::S23))
        - &(&three(&p.quantum(z, a + eta)?, SpacePair::S12)
            * &three(&p.quantum(z, b)?, SpacePair::S23));
    let r13 = three(&p.quantum(z, a + b + eta)?, SpacePair::S13);
    let left = p.classical_r(a)?.sub(&p.classical_r(a + eta)?)?;
    let right = p.classical_r(b + eta)?.sub(&p.classical_r(b)?)?;
    let rhs = &(&r13 * &three(&left, SpacePair::S12)) + &(&three(&right, SpacePair::S23) * &r13);
    Ok((&lhs - &rhs).norm())
}

pub fn check_aybe(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> IdentityReport {
    run_identity(
        "aybe",
        p.context(),
        plan,
        tol,
        5,
        |v| {
            vec![
                v[0],
                v[1],
                v[0] - v[1],
                v[2] - v[3],
                v[3] - v[4],
                v[2] - v[4],
            ]
        },
        |v| aybe_residual(p, v[0], v[1], v[2], v[3], v[4]),
    )
}

/// Unitarity and skew-symmetry reports, in that order.
pub fn check_unitarity_skew(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> [IdentityReport; 2] {
    let guard = |v: &[Complex64]| vec![v[0], v[1]];
    [
        run_identity("unitarity", p.context(), plan, tol, 2, guard, |v| {
            unitarity_residual(p, v[0], v[1])
        }),
        run_identity("skew_symmetry", p.context(), plan, tol, 2, guard, |v| {
            skew_residual(p, v[0], v[1])
        }),
    ]
}

pub fn check_qybe(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> IdentityReport {
    run_identity(
        "qybe",
        p.context(),
        plan,
        tol,
        4,
        |v| vec![v[0], v[1] - v[2], v[1] - v[3], v[2] - v[3]],
        |v| qybe_residual(p, v[0], v[1], v[2], v[3]),
    )
}

pub fn check_swap(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> IdentityReport {
    run_identity(
        "swap",
        p.context(),
        plan,
        tol,
        2,
        |v| vec![v[0], v[1]],
        |v| swap_residual(p, v[0], v[1]),
    )
}

/// ℏ-expansion coefficient, r = R^{(0)}P, and r_12(z) = −r_21(−z).
pub fn check_classical(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> [IdentityReport; 3] {
    let guard = |v: &[Complex64]| vec![v[0]];
    [
        run_identity("classical_limit", p.context(), plan, tol, 1, guard, |v| {
            classical_limit_residual(p, v[0])
        }),
        run_identity(
            "classical_from_swap",
            p.context(),
            plan,
            tol,
            1,
            guard,
            |v| classical_swap_residual(p, v[0]),
        ),
        run_identity("classical_skew", p.context(), plan, tol, 1, guard, |v| {
            classical_skew_residual(p, v[0])
        }),
    ]
}

pub fn check_master(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> IdentityReport {
    run_identity(
        "master_identity",
        p.context(),
        plan,
        tol,
        3,
        |v| vec![v[0], v[1], v[2], v[1] + v[2]],
        |v| master_residual(p, v[0], v[1], v[2]),
    )
}

/// The x → 0 and y → 0 degenerations, the combined corollary and the shifted corollary.
pub fn check_degenerations(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> Vec<IdentityReport> {
    let ctx = p.context();
    vec![
        run_identity(
            "degeneration_x",
            ctx,
            plan,
            tol,
            2,
            |v| vec![v[0], v[1]],
            |v| degeneration_x_residual(p, v[0], v[1]),
        ),
        run_identity(
            "degeneration_y",
            ctx,
            plan,
            tol,
            2,
            |v| vec![v[0], v[1]],
            |v| degeneration_y_residual(p, v[0], v[1]),
        ),
        run_identity(
            "combined_degeneration",
            ctx,
            plan,
            tol,
            3,
            |v| vec![v[0], v[1], v[2], v[1] + v[2]],
            |v| combined_degeneration_residual(p, v[0], v[1], v[2]),
        ),
        run_identity(
            "shifted_corollary",
            ctx,
            plan,
            tol,
            4,
            |v| {
                vec![
                    v[0],
                    v[1],
                    v[2],
                    v[3],
                    v[2] + v[1],
                    v[3] + v[1],
                    v[2] + v[3] + v[1],
                ]
            },
            |v| shifted_corollary_residual(p, v[0], v[1], v[2], v[3]),
        ),
    ]
}

/// Every R-matrix identity in a fixed order.
pub fn run_axiom_suite(p: &dyn RMatrix, plan: &SamplePlan, tol: f64) -> Vec<IdentityReport> {
    let mut out = vec![check_aybe(p, plan, tol)];
    out.extend(check_unitarity_skew(p, plan, tol));
    out.push(check_qybe(p, plan, tol));
    out.push(check_swap(p, plan, tol));
    out.extend(check_classical(p, plan, tol));
    out.push(check_master(p, plan, tol));
    out.extend(check_degenerations(p, plan, tol));
    out
}

pub fn all_pass(reports: &[IdentityReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::scalar_provider;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn draws_are_deterministic_and_guarded() {
        let ctx = EllipticContext::rational();
        let plan = SamplePlan::new(7, 50);
        let a = plan.draw(&ctx, 2, |v| vec![v[0], v[0] - v[1]]);
        let b = plan.draw(&ctx, 2, |v| vec![v[0], v[0] - v[1]]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a
            .iter()
            .all(|v| v[0].norm() >= 5e-2 && (v[0] - v[1]).norm() >= 5e-2));
        let other = SamplePlan::new(8, 50).draw(&ctx, 2, |v| vec![v[0]]);
        assert_ne!(a, other);
    }

    #[test]
    fn coincident_superscripts_are_skipped() {
        let p = scalar_provider(EllipticContext::rational());
        let z = c(0.2, 0.1);
        let err = aybe_residual(&p, z, z, c(0.3, 0.0), c(-0.1, 0.2), c(0.05, -0.3)).unwrap_err();
        assert!(err.is_near_pole());
    }

    #[test]
    fn scalar_three_space_matches_fay() {
        for ctx in [
            EllipticContext::rational(),
            EllipticContext::trigonometric(),
            EllipticContext::elliptic(c(0.0, 1.0)).unwrap(),
        ] {
            let p = scalar_provider(ctx.clone());
            let (z, w, q1, q2, q3) = (
                c(0.31, -0.12),
                c(-0.22, 0.27),
                c(0.4, 0.1),
                c(-0.15, -0.33),
                c(0.08, 0.41),
            );
            let aybe = aybe_residual(&p, z, w, q1, q2, q3).unwrap();
            let fay = fay_residual(&ctx, z, q1 - q2, w, q2 - q3).unwrap();
            assert!((aybe - fay).abs() < 1e-12);
            assert!(qybe_residual(&p, z, q1, q2, q3).unwrap() < 1e-13);
        }
    }

    #[test]
    fn failing_identity_is_reported() {
        let ctx = EllipticContext::rational();
        let plan = SamplePlan::new(1, 20);
        let report = run_identity(
            "constant",
            &ctx,
            &plan,
            1e-3,
            1,
            |v| vec![v[0]],
            |_| Ok(1.0),
        );
        assert!(!report.pass);
        assert_eq!(report.max_residual, 1.0);
        assert_eq!(report.worst_point.len(), 1);
    }
}
