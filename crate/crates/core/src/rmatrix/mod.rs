//! Quantum R-matrices R^ℏ_12(z) and the objects derived from their expansions:
//!
//! ```text
//! R^ℏ(z) = 1⊗1/ℏ + r(z) + ℏ·R1(z) + O(ℏ²)        (superscript expansion)
//! R^x(q) = P/q + R^{x,(0)} + O(q)                  (argument expansion)
//! r(z)   = P/z + r^(0) + O(z)
//! F^x(q) = ∂_q R^x(q)
//! ```
//!
//! Throughout, `quantum(h, z)` is R^h_12(z): `h` is the superscript
//! ("Planck") slot and `z` the spectral argument.

pub mod calibration;

pub use calibration::{calibrate_belavin, CalibrationCandidate, CalibrationReport};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{EllipticContext, Regime};
use crate::tensorops::{MatN, TensorOp};

/// Contract shared by all R-matrix providers.
pub trait RMatrix: Send + Sync {
    fn dim(&self) -> usize;

    fn context(&self) -> &EllipticContext;

    /// R^h_12(z).
    fn quantum(&self, h: Complex64, z: Complex64) -> Result<TensorOp>;

    /// Classical r-matrix r_12(z), the ℏ⁰ coefficient.
    fn classical_r(&self, z: Complex64) -> Result<TensorOp>;

    /// R^{x,(0)}_12, the constant term of R^x(q) at q = 0.
    fn finite_part_arg(&self, x: Complex64) -> Result<TensorOp>;

    /// r^(0)_12, the constant term of r(z) at z = 0.
    fn classical_finite(&self) -> Result<TensorOp>;

    /// F^h_12(z) = ∂_z R^h_12(z).
    fn f_derivative(&self, h: Complex64, z: Complex64) -> Result<TensorOp>;

    /// ∂_h R^h_12(z).
    fn hbar_derivative(&self, h: Complex64, z: Complex64) -> Result<TensorOp>;

    /// The ℏ¹ coefficient R1(z) of the superscript expansion.
    fn hbar_first_order(&self, z: Complex64) -> Result<TensorOp>;

    fn wp(&self, z: Complex64) -> Result<Complex64> {
        self.context().wp(z)
    }
}

fn scalar_op(v: Complex64) -> TensorOp {
    TensorOp::identity(1).scale(v)
}

/// The N = 1 provider: every object is a scalar function.
#[derive(Clone, Debug)]
pub struct ScalarRMatrix {
    ctx: EllipticContext,
}

/// Scalar provider for any regime: R^h(z) = φ(h, z).
pub fn scalar_provider(ctx: EllipticContext) -> ScalarRMatrix {
    ScalarRMatrix { ctx }
}

impl RMatrix for ScalarRMatrix {
    fn dim(&self) -> usize {
        1
    }

    fn context(&self) -> &EllipticContext {
        &self.ctx
    }

    fn quantum(&self, h: Complex64, z: Complex64) -> Result<TensorOp> {
        Ok(scalar_op(self.ctx.kronecker_phi(h, z)?))
    }

    fn classical_r(&self, z: Complex64) -> Result<TensorOp> {
        Ok(scalar_op(self.ctx.e1(z)?))
    }

    fn finite_part_arg(&self, x: Complex64) -> Result<TensorOp> {
        Ok(scalar_op(self.ctx.e1(x)?))
    }

    fn classical_finite(&self) -> Result<TensorOp> {
        // E1 is odd in every regime, so E1(z) − 1/z vanishes at z = 0
        Ok(TensorOp::zeros(1))
    }

    fn f_derivative(&self, h: Complex64, z: Complex64) -> Result<TensorOp> {
        Ok(scalar_op(self.ctx.phi_dq(h, z)?))
    }

    fn hbar_derivative(&self, h: Complex64, z: Complex64) -> Result<TensorOp> {
        Ok(scalar_op(self.ctx.phi_dz(h, z)?))
    }

    fn hbar_first_order(&self, z: Complex64) -> Result<TensorOp> {
        Ok(scalar_op(self.ctx.phi_finite_parts(z)?.1))
    }
}

/// Clock/shift basis of Mat(n): T_a = exp(πi a1 a2/n) Q^a1 Λ^a2.
#[derive(Clone, Debug)]
pub struct WeylBasis {
    n: usize,
    clock: MatN,
    shift: MatN,
}

impl WeylBasis {
    pub fn new(n: usize) -> Self {
        let clock = MatN::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let shift = MatN::from_fn(n, n, |i, j| {
            if j == (i + 1) % n {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        WeylBasis { n, clock, shift }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn clock(&self) -> &MatN {
        &self.clock
    }

    pub fn shift(&self) -> &MatN {
        &self.shift
    }

    /// T_a for integer (possibly negative) a = (a1, a2).
    pub fn element(&self, a1: i64, a2: i64) -> MatN {
        let n = self.n as i64;
        // Q^n = Λ^n = 1, so powers reduce mod n; the phase keeps the raw indices
        let q = self.clock.pow(a1.rem_euclid(n) as u32);
        let l = self.shift.pow(a2.rem_euclid(n) as u32);
        let phase = Complex64::from_polar(1.0, PI * (a1 * a2) as f64 / self.n as f64);
        (q * l) * phase
    }

    /// T_a ⊗ T_{−a}.
    pub fn pair(&self, a1: i64, a2: i64) -> TensorOp {
        TensorOp::kron(&self.element(a1, a2), &self.element(-a1, -a2))
            .expect("square blocks of equal size")
    }

    /// Index set Z_n × Z_n with representatives in 0..n.
    pub fn indices(&self) -> impl Iterator<Item = (i64, i64)> {
        let n = self.n as i64;
        (0..n).flat_map(move |a1| (0..n).map(move |a2| (a1, a2)))
    }

    /// Half-period ω_a = (a1 + a2 τ)/n.
    pub fn half_period(&self, a: (i64, i64), tau: Complex64) -> Complex64 {
        (tau * a.1 as f64 + a.0 as f64) / self.n as f64
    }
}

/// Constants of the Belavin family
/// R^h(z) = c Σ_a exp(2πi a2 κ_z z/n) φ(κ_z z, κ_h h + ω_a) T_a ⊗ T_{−a}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub scale: f64,
    pub arg_scale: f64,
    pub hbar_scale: f64,
}

impl Normalization {
    /// The member that satisfies the residue conditions together with
    /// unitarity against the ℘ of the context lattice.
    pub fn standard(n: usize) -> Self {
        let inv = 1.0 / n as f64;
        Normalization {
            scale: inv,
            arg_scale: 1.0,
            hbar_scale: inv,
        }
    }
}

#[derive(Clone, Debug)]
struct BelavinTerm {
    a2: f64,
    omega: Complex64,
    is_origin: bool,
    pair: TensorOp,
}

/// Elliptic Baxter–Belavin R-matrix in the fundamental representation of GL(n).
#[derive(Clone, Debug)]
pub struct BelavinRMatrix {
    ctx: EllipticContext,
    n: usize,
    norm: Normalization,
    terms: Vec<BelavinTerm>,
}

impl BelavinRMatrix {
    /// Builds the provider for a fixed normalization (no calibration).
    pub fn with_normalization(ctx: EllipticContext, n: usize, norm: Normalization) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidContext(
                "R-matrix dimension must be positive".into(),
            ));
        }
        if n > 1 && ctx.regime() != Regime::Elliptic {
            return Err(Error::WrongRegime);
        }
        let basis = WeylBasis::new(n);
        let terms = basis
            .indices()
            .map(|a| BelavinTerm {
                a2: a.1 as f64,
                omega: basis.half_period(a, ctx.tau()),
                is_origin: a == (0, 0),
                pair: basis.pair(a.0, a.1),
            })
            .collect();
        Ok(BelavinRMatrix {
            ctx,
            n,
            norm,
            terms,
        })
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    fn exp_factor(&self, term: &BelavinTerm, z: Complex64) -> Complex64 {
        (Complex64::new(
            0.0,
            2.0 * PI * term.a2 * self.norm.arg_scale / self.n as f64,
        ) * z)
            .exp()
    }

    /// 2πi a2/n: constant produced by the exponential prefactor against a simple pole.
    fn exp_constant(&self, term: &BelavinTerm) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI * term.a2 / self.n as f64)
    }

    fn sum_terms<F>(&self, mut coefficient: F) -> Result<TensorOp>
    where
        F: FnMut(&BelavinTerm) -> Result<Complex64>,
    {
        let mut out = TensorOp::zeros(self.n);
        for term in &self.terms {
            let c = coefficient(term)?;
            out.add_scaled(c * self.norm.scale, &term.pair)?;
        }
        Ok(out)
    }
}

/// Belavin provider at the standard normalization, checked against the
/// residue and axiom gates (see [`calibrate_belavin`] for the full report).
pub fn belavin_provider(ctx: EllipticContext, n: usize) -> Result<BelavinRMatrix> {
    if ctx.regime() != Regime::Elliptic {
        return Err(Error::WrongRegime);
    }
    if n < 2 {
        return Err(Error::InvalidContext(
            "belavin_provider needs n >= 2".into(),
        ));
    }
    let (provider, _) = calibrate_belavin(ctx, n, &calibration::default_plan())?;
    Ok(provider)
}

impl RMatrix for BelavinRMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn context(&self) -> &EllipticContext {
        &self.ctx
    }

    fn quantum(&self, h: Complex64, z: Complex64) -> Result<TensorOp> {
        self.ctx.check_regular("h", h)?;
        self.ctx.check_regular("z", z)?;
        let (kz, kh) = (self.norm.arg_scale, self.norm.hbar_scale);
        self.sum_terms(|t| {
            Ok(self.exp_factor(t, z) * self.ctx.kronecker_phi(z * kz, h * kh + t.omega)?)
        })
    }

    fn classical_r(&self, z: Complex64) -> Result<TensorOp> {
        let kz = self.norm.arg_scale;
        self.sum_terms(|t| {
            if t.is_origin {
                self.ctx.e1(z * kz)
            } else {
                Ok(self.exp_factor(t, z) * self.ctx.kronecker_phi(z * kz, t.omega)?)
            }
        })
    }

    fn finite_part_arg(&self, x: Complex64) -> Result<TensorOp> {
        let kh = self.norm.hbar_scale;
        self.sum_terms(|t| Ok(self.ctx.e1(x * kh + t.omega)? + self.exp_constant(t)))
    }

    fn classical_finite(&self) -> Result<TensorOp> {
        self.sum_terms(|t| {
            if t.is_origin {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                Ok(self.ctx.e1(t.omega)? + self.exp_constant(t))
            }
        })
    }

    fn f_derivative(&self, h: Complex64, z: Complex64) -> Result<TensorOp> {
        let (kz, kh) = (self.norm.arg_scale, self.norm.hbar_scale);
        self.sum_terms(|t| {
            let u = h * kh + t.omega;
            let s = z * kz;
            let inner =
                self.exp_constant(t) * self.ctx.kronecker_phi(s, u)? + self.ctx.phi_dz(s, u)?;
            Ok(self.exp_factor(t, z) * inner * kz)
        })
    }

    fn hbar_derivative(&self, h: Complex64, z: Complex64) -> Result<TensorOp> {
        let (kz, kh) = (self.norm.arg_scale, self.norm.hbar_scale);
        self.sum_terms(|t| {
            Ok(self.exp_factor(t, z) * self.ctx.phi_dq(z * kz, h * kh + t.omega)? * kh)
        })
    }

    fn hbar_first_order(&self, z: Complex64) -> Result<TensorOp> {
        let (kz, kh) = (self.norm.arg_scale, self.norm.hbar_scale);
        let s = z * kz;
        self.sum_terms(|t| {
            let c = if t.is_origin {
                self.ctx.phi_finite_parts(s)?.1
            } else {
                self.exp_factor(t, z) * self.ctx.phi_dq(s, t.omega)?
            };
            Ok(c * kh)
        })
    }
}

/// r_12(z) rebuilt from the swap property as R^{z,(0)}_12 P_12.
pub fn classical_from_swap(provider: &dyn RMatrix, z: Complex64) -> Result<TensorOp> {
    provider
        .finite_part_arg(z)?
        .compose(&TensorOp::permutation(provider.dim()))
}

/// Residue of a simple pole at 0 from the symmetric pair
/// (ε f(ε) − ε f(−ε))/2 = A + O(ε²).
pub fn residue_fit<F>(eps: f64, mut f: F) -> Result<TensorOp>
where
    F: FnMut(Complex64) -> Result<TensorOp>,
{
    let e = Complex64::new(eps, 0.0);
    let plus = f(e)?;
    let minus = f(-e)?;
    Ok(plus.sub(&minus)?.scale(e * 0.5))
}

/// Max-abs deviation of the two residues from 1⊗1 (superscript) and P (argument).
pub fn residue_deviation(
    provider: &dyn RMatrix,
    h: Complex64,
    z: Complex64,
    eps: f64,
) -> Result<(f64, f64)> {
    let n = provider.dim();
    let in_hbar = residue_fit(eps, |e| provider.quantum(e, z))?;
    let in_arg = residue_fit(eps, |e| provider.quantum(h, e))?;
    Ok((
        in_hbar.sub(&TensorOp::identity(n))?.norm(),
        in_arg.sub(&TensorOp::permutation(n))?.norm(),
    ))
}
