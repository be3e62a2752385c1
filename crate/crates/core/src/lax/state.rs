use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorops::{BlockMatrix, MatN};

/// Positions, velocities and spin blocks of the GL(NM) system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Snapshot", try_from = "Snapshot")]
pub struct PhaseState {
    pub n: usize,
    pub m: usize,
    pub eta: Complex64,
    pub q: Vec<Complex64>,
    /// Velocities; on shell they coincide with tr 𝒮^{ii}.
    pub qdot: Vec<Complex64>,
    pub spins: BlockMatrix,
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn scale_to_unit(mat: &mut MatN) {
    let max = mat.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()));
    if max > 0.0 {
        mat.iter_mut().for_each(|v| *v /= max);
    }
}

/// Positions spread along the real axis with a small seeded jitter so that no
/// q_i − q_j sits near a lattice point.
fn spread_positions(m: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let spacing = 0.9 / m as f64;
    let centre = (m as f64 - 1.0) / 2.0;
    (0..m)
        .map(|i| {
            Complex64::new(
                (i as f64 - centre) * spacing + rng.random_range(-0.05..0.05) * spacing,
                rng.random_range(-0.05..0.05),
            )
        })
        .collect()
}

impl PhaseState {
    pub fn new(
        eta: Complex64,
        q: Vec<Complex64>,
        qdot: Vec<Complex64>,
        spins: BlockMatrix,
    ) -> Result<Self> {
        let m = spins.grid_dim();
        if q.len() != m || qdot.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: if q.len() != m { q.len() } else { qdot.len() },
            });
        }
        let state = PhaseState {
            n: spins.block_dim(),
            m,
            eta,
            q,
            qdot,
            spins,
        };
        state.check_finite()?;
        Ok(state)
    }

    /// On-shell state with qdot_i = tr 𝒮^{ii}.
    pub fn on_shell(eta: Complex64, q: Vec<Complex64>, spins: BlockMatrix) -> Result<Self> {
        let m = spins.grid_dim();
        let mut state = PhaseState::new(eta, q, vec![Complex64::new(0.0, 0.0); m], spins)?;
        state.resync_velocities();
        Ok(state)
    }

    /// Generic on-shell state: Gaussian spin entries scaled to max-abs 1.
    pub fn random(n: usize, m: usize, eta: Complex64, seed: u64) -> Result<Self> {
        check_dims(n, m)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = spread_positions(m, &mut rng);
        let mut s = MatN::from_fn(n * m, n * m, |_, _| gaussian(&mut rng));
        scale_to_unit(&mut s);
        PhaseState::on_shell(eta, q, BlockMatrix::from_matrix(n, m, s)?)
    }

    /// On-shell state whose full NM×NM spin matrix is the outer product ξψᵀ.
    pub fn rank_one(n: usize, m: usize, eta: Complex64, seed: u64) -> Result<Self> {
        check_dims(n, m)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = spread_positions(m, &mut rng);
        let dim = n * m;
        let xi = MatN::from_fn(dim, 1, |_, _| gaussian(&mut rng));
        let psi = MatN::from_fn(1, dim, |_, _| gaussian(&mut rng));
        let mut s = xi * psi;
        scale_to_unit(&mut s);
        PhaseState::on_shell(eta, q, BlockMatrix::from_matrix(n, m, s)?)
    }

    pub fn block(&self, i: usize, j: usize) -> MatN {
        self.spins.block(i, j).expect("block index in range")
    }

    pub fn traces(&self) -> Vec<Complex64> {
        (0..self.m).map(|i| self.block(i, i).trace()).collect()
    }

    /// μ_i = qdot_i − tr 𝒮^{ii}.
    pub fn mu(&self) -> Vec<Complex64> {
        self.qdot
            .iter()
            .zip(self.traces())
            .map(|(v, t)| v - t)
            .collect()
    }

    pub fn max_mu(&self) -> f64 {
        self.mu().iter().fold(0.0, |acc, v| acc.max(v.norm()))
    }

    pub fn resync_velocities(&mut self) {
        self.qdot = self.traces();
    }

    pub fn is_on_shell(&self, tol: f64) -> bool {
        self.max_mu() <= tol
    }

    pub fn check_finite(&self) -> Result<()> {
        let finite = self.eta.is_finite()
            && self.q.iter().chain(&self.qdot).all(|v| v.is_finite())
            && self.spins.matrix().iter().all(|v| v.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidState(
                "non-finite entry in phase state".into(),
            ))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        PhaseState::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidState(format!(
            "dimensions must be positive, got N = {n}, M = {m}"
        )));
    }
    Ok(())
}

type Pair = [f64; 2];

fn pair(v: Complex64) -> Pair {
    [v.re, v.im]
}

fn unpair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// On-disk layout: `S[i][j][a][b]` is entry (a, b) of block 𝒮^{ij}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub eta: Pair,
    pub q: Vec<Pair>,
    pub qdot: Vec<Pair>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<Vec<Vec<Pair>>>>,
}

impl From<PhaseState> for Snapshot {
    fn from(state: PhaseState) -> Self {
        let s = state
            .spins
            .blocks()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|b| {
                        (0..state.n)
                            .map(|a| (0..state.n).map(|c| pair(b[(a, c)])).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Snapshot {
            n: state.n,
            m: state.m,
            eta: pair(state.eta),
            q: state.q.iter().copied().map(pair).collect(),
            qdot: state.qdot.iter().copied().map(pair).collect(),
            s,
        }
    }
}

impl TryFrom<Snapshot> for PhaseState {
    type Error = Error;

    fn try_from(snap: Snapshot) -> Result<Self> {
        let (n, m) = (snap.n, snap.m);
        check_dims(n, m)?;
        let shape_ok = snap.s.len() == m
            && snap.s.iter().all(|row| {
                row.len() == m
                    && row
                        .iter()
                        .all(|b| b.len() == n && b.iter().all(|r| r.len() == n))
            });
        if !shape_ok {
            return Err(Error::InvalidState(format!(
                "spin array does not have shape {m}x{m}x{n}x{n}"
            )));
        }
        let blocks: Vec<Vec<MatN>> = snap
            .s
            .iter()
            .map(|row| {
                row.iter()
                    .map(|b| MatN::from_fn(n, n, |a, c| unpair(b[a][c])))
                    .collect()
            })
            .collect();
        PhaseState::new(
            unpair(snap.eta),
            snap.q.into_iter().map(unpair).collect(),
            snap.qdot.into_iter().map(unpair).collect(),
            BlockMatrix::assemble(&blocks)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut state = PhaseState::random(2, 3, Complex64::new(0.25, 0.15), 11).unwrap();
        state.qdot[1] += Complex64::new(1.0 / 3.0, -0.1);
        let back = PhaseState::from_json(&state.to_json().unwrap()).unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn generators_are_on_shell_and_scaled() {
        let s = PhaseState::random(3, 2, Complex64::new(0.2, 0.1), 4).unwrap();
        assert!(s.is_on_shell(0.0));
        let max = s
            .spins
            .matrix()
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.norm()));
        assert!((max - 1.0).abs() < 1e-15);
        let r = PhaseState::rank_one(2, 2, Complex64::new(0.2, 0.1), 4).unwrap();
        assert_eq!(r.spins.matrix().rank(1e-10), 1);
    }

    #[test]
    fn malformed_snapshot_rejected() {
        let text = r#"{"N":2,"M":1,"eta":[0.1,0],"q":[[0,0]],"qdot":[[0,0]],"S":[[[[1,0]]]]}"#;
        assert!(PhaseState::from_json(text).is_err());
    }
}
