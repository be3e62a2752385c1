//! Kronecker function, first Eisenstein function and Weierstrass ℘ in the
//! rational, trigonometric and elliptic regimes.
//!
//! | regime        | φ(z, q)                      | E1(z)    | ℘(z)                         |
//! |---------------|------------------------------|----------|------------------------------|
//! | rational      | 1/z + 1/q                    | 1/z      | 1/z²                         |
//! | trigonometric | coth z + coth q              | coth z   | 1/sinh² z + 1/3              |
//! | elliptic      | ϑ′(0)ϑ(z+q) / (ϑ(z)ϑ(q))      | ϑ′(z)/ϑ(z) | −E1′(z) + ϑ‴(0)/(3ϑ′(0))   |
//!
//! The elliptic regime uses the odd theta function
//!
//! ```text
//! ϑ(z|τ) = Σ_k exp(πiτ(k+½)² + 2πi(k+½)(z+½)),   |k| ≤ cutoff
//! ```
//!
//! whose derivatives are obtained by differentiating the series term by term.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible ratio between the first omitted theta term and the
/// largest retained one.
pub const THETA_TAIL_TOLERANCE: f64 = 1e-15;
pub const DEFAULT_SERIES_CUTOFF: usize = 32;
pub const MIN_SERIES_CUTOFF: usize = 8;
pub const DEFAULT_POLE_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Rational,
    Trigonometric,
    Elliptic,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Rational => "rational",
            Regime::Trigonometric => "trigonometric",
            Regime::Elliptic => "elliptic",
        };
        f.write_str(s)
    }
}

/// Precomputed theta-series coefficients for a fixed τ.
#[derive(Clone, Debug)]
struct ThetaSeries {
    /// πiτ(k+½)² for k = −cutoff..=cutoff.
    quadratic: Vec<Complex64>,
    /// 2πi(k+½), the factor picked up by each derivative.
    frequency: Vec<Complex64>,
    d1_at_zero: Complex64,
    d3_at_zero: Complex64,
}

/// Regime selector plus the numerical policy shared by all special functions.
#[derive(Clone, Debug)]
pub struct EllipticContext {
    regime: Regime,
    tau: Complex64,
    series_cutoff: usize,
    pole_guard: f64,
    theta: Option<ThetaSeries>,
}

impl EllipticContext {
    pub fn new(
        regime: Regime,
        tau: Complex64,
        series_cutoff: usize,
        pole_guard: f64,
    ) -> Result<Self> {
        if series_cutoff < MIN_SERIES_CUTOFF {
            return Err(Error::InvalidContext(format!(
                "series_cutoff must be at least {MIN_SERIES_CUTOFF}, got {series_cutoff}"
            )));
        }
        if !(pole_guard > 0.0 && pole_guard.is_finite()) {
            return Err(Error::InvalidContext(format!(
                "pole_guard must be positive, got {pole_guard}"
            )));
        }
        let mut ctx = EllipticContext {
            regime,
            tau,
            series_cutoff,
            pole_guard,
            theta: None,
        };
        if regime == Regime::Elliptic {
            if !tau.is_finite() || tau.im <= 0.0 {
                return Err(Error::InvalidContext(format!(
                    "Im(tau) must be positive, got tau = {tau}"
                )));
            }
            let cutoff = series_cutoff as i64;
            let (quadratic, frequency) = (-cutoff..=cutoff)
                .map(|k| {
                    let m = k as f64 + 0.5;
                    (
                        Complex64::i() * PI * tau * m * m,
                        Complex64::new(0.0, 2.0 * PI * m),
                    )
                })
                .unzip();
            ctx.theta = Some(ThetaSeries {
                quadratic,
                frequency,
                d1_at_zero: Complex64::new(0.0, 0.0),
                d3_at_zero: Complex64::new(0.0, 0.0),
            });
            let at_zero = ctx.theta_derivatives(Complex64::new(0.0, 0.0))?;
            let series = ctx.theta.as_mut().expect("theta series initialised above");
            series.d1_at_zero = at_zero[1];
            series.d3_at_zero = at_zero[3];
        }
        Ok(ctx)
    }

    pub fn rational() -> Self {
        Self::new(
            Regime::Rational,
            Complex64::new(0.0, 0.0),
            DEFAULT_SERIES_CUTOFF,
            DEFAULT_POLE_GUARD,
        )
        .expect("default rational context is valid")
    }

    pub fn trigonometric() -> Self {
        Self::new(
            Regime::Trigonometric,
            Complex64::new(0.0, 0.0),
            DEFAULT_SERIES_CUTOFF,
            DEFAULT_POLE_GUARD,
        )
        .expect("default trigonometric context is valid")
    }

    pub fn elliptic(tau: Complex64) -> Result<Self> {
        Self::new(
            Regime::Elliptic,
            tau,
            DEFAULT_SERIES_CUTOFF,
            DEFAULT_POLE_GUARD,
        )
    }

    /// Default context for a regime; `tau` is ignored outside the elliptic case.
    pub fn for_regime(regime: Regime, tau: Complex64) -> Result<Self> {
        Self::new(regime, tau, DEFAULT_SERIES_CUTOFF, DEFAULT_POLE_GUARD)
    }

    pub fn with_pole_guard(self, pole_guard: f64) -> Result<Self> {
        Self::new(self.regime, self.tau, self.series_cutoff, pole_guard)
    }

    pub fn with_series_cutoff(self, series_cutoff: usize) -> Result<Self> {
        Self::new(self.regime, self.tau, series_cutoff, self.pole_guard)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn series_cutoff(&self) -> usize {
        self.series_cutoff
    }

    pub fn pole_guard(&self) -> f64 {
        self.pole_guard
    }

    /// Distance from `z` to the nearest point of the regime's singular set:
    /// {0}, iπZ, or the lattice Z + τZ.
    pub fn pole_distance(&self, z: Complex64) -> f64 {
        match self.regime {
            Regime::Rational => z.norm(),
            Regime::Trigonometric => {
                let k = (z.im / PI).round();
                (z - Complex64::new(0.0, k * PI)).norm()
            }
            Regime::Elliptic => {
                let b = z.im / self.tau.im;
                let a = z.re - b * self.tau.re;
                let (a0, b0) = (a.round(), b.round());
                let mut best = f64::INFINITY;
                for da in -1..=1 {
                    for db in -1..=1 {
                        let node = self.tau * (b0 + db as f64) + (a0 + da as f64);
                        best = best.min((z - node).norm());
                    }
                }
                best
            }
        }
    }

    /// Fails with `NearPole` when `z` is within the pole guard of the singular set.
    pub fn check_regular(&self, arg: &str, z: Complex64) -> Result<()> {
        if !z.is_finite() {
            return Err(Error::near_pole(arg, z, f64::NAN, self.pole_guard));
        }
        let distance = self.pole_distance(z);
        if distance < self.pole_guard {
            return Err(Error::near_pole(arg, z, distance, self.pole_guard));
        }
        Ok(())
    }

    fn series(&self) -> Result<&ThetaSeries> {
        self.theta.as_ref().ok_or(Error::WrongRegime)
    }

    /// ϑ and its first three derivatives at `z`.
    pub fn theta_derivatives(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let series = self.series()?;
        let shift = z + 0.5;
        let mut out = [Complex64::new(0.0, 0.0); 4];
        let mut largest = 0.0_f64;
        for (quad, freq) in series.quadratic.iter().zip(&series.frequency) {
            let term = (quad + freq * shift).exp();
            largest = largest.max(term.norm() * freq.norm().powi(3).max(1.0));
            let mut weighted = term;
            for slot in out.iter_mut() {
                *slot += weighted;
                weighted *= freq;
            }
        }
        // first omitted terms on either side, weighted like the third derivative
        let outer = self.series_cutoff as f64 + 1.5;
        let tail = [outer, -outer]
            .iter()
            .map(|&m| {
                let exponent = -PI * self.tau.im * m * m - 2.0 * PI * m * shift.im;
                exponent.exp() * (2.0 * PI * m.abs()).powi(3)
            })
            .fold(0.0, f64::max);
        if tail.is_nan() || tail > THETA_TAIL_TOLERANCE * largest {
            return Err(Error::NonConvergent {
                im_tau: self.tau.im,
                cutoff: self.series_cutoff,
                tail: tail / largest,
            });
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta"));
        }
        Ok(out)
    }

    pub fn theta(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.theta_derivatives(z)?[0])
    }

    /// ϑ′(0) and ϑ‴(0).
    pub fn theta_derivatives_at_zero(&self) -> Result<(Complex64, Complex64)> {
        let s = self.series()?;
        Ok((s.d1_at_zero, s.d3_at_zero))
    }

    /// Kronecker function φ(z, q).
    pub fn kronecker_phi(&self, z: Complex64, q: Complex64) -> Result<Complex64> {
        self.check_regular("z", z)?;
        self.check_regular("q", q)?;
        self.check_regular("z+q", z + q)?;
        let value = match self.regime {
            Regime::Rational => z.inv() + q.inv(),
            Regime::Trigonometric => coth(z) + coth(q),
            Regime::Elliptic => {
                let d1 = self.series()?.d1_at_zero;
                d1 * self.theta(z + q)? / (self.theta(z)? * self.theta(q)?)
            }
        };
        finite("kronecker_phi", value)
    }

    /// First Eisenstein function E1(z).
    pub fn e1(&self, z: Complex64) -> Result<Complex64> {
        self.check_regular("z", z)?;
        let value = match self.regime {
            Regime::Rational => z.inv(),
            Regime::Trigonometric => coth(z),
            Regime::Elliptic => {
                let t = self.theta_derivatives(z)?;
                t[1] / t[0]
            }
        };
        finite("e1", value)
    }

    /// Weierstrass ℘(z) in the normalisation of the regime table.
    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        self.check_regular("z", z)?;
        let value = match self.regime {
            Regime::Rational => (z * z).inv(),
            Regime::Trigonometric => {
                let s = z.sinh();
                (s * s).inv() + 1.0 / 3.0
            }
            Regime::Elliptic => {
                let t = self.theta_derivatives(z)?;
                let s = self.series()?;
                let log_d1 = t[1] / t[0];
                let e1_prime = t[2] / t[0] - log_d1 * log_d1;
                -e1_prime + s.d3_at_zero / (3.0 * s.d1_at_zero)
            }
        };
        finite("wp", value)
    }

    /// f(z, q) = ∂_q φ(z, q) = φ(z, q)(E1(z+q) − E1(q)).
    pub fn phi_dq(&self, z: Complex64, q: Complex64) -> Result<Complex64> {
        let phi = self.kronecker_phi(z, q)?;
        finite("phi_dq", phi * (self.e1(z + q)? - self.e1(q)?))
    }

    /// ∂_z φ(z, q) = φ(z, q)(E1(z+q) − E1(z)).
    pub fn phi_dz(&self, z: Complex64, q: Complex64) -> Result<Complex64> {
        self.phi_dq(q, z)
    }

    /// Coefficients of φ(z, q) = 1/q + c0 + c1·q + O(q²): c0 = E1(z), c1 = (E1(z)² − ℘(z))/2.
    pub fn phi_finite_parts(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let e1 = self.e1(z)?;
        let wp = self.wp(z)?;
        Ok((e1, (e1 * e1 - wp) * 0.5))
    }
}

fn coth(z: Complex64) -> Complex64 {
    z.tanh().inv()
}

fn finite(name: &'static str, value: Complex64) -> Result<Complex64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}
