//! Selection of the Belavin normalization constants by residue and axiom gates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{residue_deviation, BelavinRMatrix, Normalization};
use crate::axioms::{all_pass, run_axiom_suite, IdentityReport, SamplePlan};
use crate::error::{Error, Result};
use crate::specfun::EllipticContext;

pub const RESIDUE_EPS: f64 = 1e-5;
pub const RESIDUE_TOLERANCE: f64 = 1e-6;
pub const AXIOM_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationCandidate {
    pub norm: Normalization,
    pub residue_hbar: f64,
    pub residue_arg: f64,
    pub residues_pass: bool,
    /// Empty when the residue gate already failed.
    pub axiom_reports: Vec<IdentityReport>,
    pub axioms_pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub n: usize,
    pub tau: [f64; 2],
    pub candidates: Vec<CalibrationCandidate>,
    pub chosen: Option<Normalization>,
    /// Set when more than one candidate passes every gate.
    pub ambiguous: bool,
}

pub fn default_plan() -> SamplePlan {
    SamplePlan::new(0x5eed_ca1b, 16)
}

fn candidate_values(n: usize) -> [f64; 3] {
    let n = n as f64;
    [1.0, 1.0 / n, n]
}

/// Tries every (c, κ_z, κ_h) with entries in {1, 1/n, n}. Among candidates
/// passing both gates the standard one is preferred, otherwise the first in
/// enumeration order.
pub fn calibrate_belavin(
    ctx: EllipticContext,
    n: usize,
    plan: &SamplePlan,
) -> Result<(BelavinRMatrix, CalibrationReport)> {
    let h = Complex64::new(0.231, 0.117);
    let z = Complex64::new(-0.193, 0.309);
    let values = candidate_values(n);
    let mut candidates = Vec::with_capacity(27);
    for &scale in &values {
        for &arg_scale in &values {
            for &hbar_scale in &values {
                let norm = Normalization {
                    scale,
                    arg_scale,
                    hbar_scale,
                };
                let provider = BelavinRMatrix::with_normalization(ctx.clone(), n, norm)?;
                let (residue_hbar, residue_arg) = residue_deviation(&provider, h, z, RESIDUE_EPS)?;
                let residues_pass =
                    residue_hbar < RESIDUE_TOLERANCE && residue_arg < RESIDUE_TOLERANCE;
                let axiom_reports = if residues_pass {
                    run_axiom_suite(&provider, plan, AXIOM_TOLERANCE)
                } else {
                    Vec::new()
                };
                let axioms_pass = residues_pass && all_pass(&axiom_reports);
                candidates.push(CalibrationCandidate {
                    norm,
                    residue_hbar,
                    residue_arg,
                    residues_pass,
                    axiom_reports,
                    axioms_pass,
                });
            }
        }
    }
    let passing: Vec<Normalization> = candidates
        .iter()
        .filter(|c| c.axioms_pass)
        .map(|c| c.norm)
        .collect();
    let standard = Normalization::standard(n);
    let chosen = if passing.contains(&standard) {
        Some(standard)
    } else {
        passing.first().copied()
    };
    let report = CalibrationReport {
        n,
        tau: [ctx.tau().re, ctx.tau().im],
        ambiguous: passing.len() > 1,
        candidates,
        chosen,
    };
    match chosen {
        Some(norm) => Ok((BelavinRMatrix::with_normalization(ctx, n, norm)?, report)),
        None => Err(Error::CalibrationFailed(format!(
            "no normalization among {} candidates passed the residue and axiom gates for n = {n}",
            report.candidates.len()
        ))),
    }
}
