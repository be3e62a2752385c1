use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::PhaseState;
use crate::specfun::{EllipticContext, Regime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialMode {
    Random,
    Rank1,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub mode: InitialMode,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            mode: InitialMode::Random,
            path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity: f64,
    pub lax: f64,
    pub conservation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            lax: 1e-9,
            conservation: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub regime: Regime,
    pub tau: [f64; 2],
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub eta: [f64; 2],
    pub seed: u64,
    pub initial: InitialSpec,
    pub dt: f64,
    pub steps: usize,
    pub z_samples: Vec<[f64; 2]>,
    /// Highest k in tr ℒ^k; defaults to N·M.
    pub max_order: Option<usize>,
    pub record_every: usize,
    pub resync_velocities: bool,
    /// Sample points per identity in `verify`.
    pub samples: usize,
    pub series_cutoff: Option<usize>,
    pub pole_guard: Option<f64>,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            regime: Regime::Elliptic,
            tau: [0.0, 1.0],
            n: 2,
            m: 2,
            eta: [0.25, 0.15],
            seed: 1,
            initial: InitialSpec::default(),
            dt: 1e-3,
            steps: 1000,
            z_samples: vec![
                [0.31, 0.17],
                [0.22, -0.28],
                [-0.36, 0.12],
                [0.13, 0.41],
                [-0.18, -0.33],
            ],
            max_order: None,
            record_every: 100,
            resync_velocities: false,
            samples: 200,
            series_cutoff: None,
            pole_guard: None,
            tolerances: Tolerances::default(),
            out_dir: PathBuf::from("laxtop-out"),
        }
    }
}

fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 || self.m == 0 {
            return bad(format!(
                "N and M must be positive, got N = {}, M = {}",
                self.n, self.m
            ));
        }
        if self.n > 1 && self.regime != Regime::Elliptic {
            return bad(format!("N = {} needs the elliptic regime", self.n));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.record_every == 0 || self.samples == 0 {
            return bad("record_every and samples must be positive".into());
        }
        if self.max_order == Some(0) {
            return bad("max_order must be at least 1".into());
        }
        if self.z_samples.is_empty() {
            return bad("z_samples must not be empty".into());
        }
        let t = &self.tolerances;
        if [t.identity, t.lax, t.conservation]
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return bad("all tolerances must be positive".into());
        }
        let finite = self
            .tau
            .iter()
            .chain(&self.eta)
            .chain(self.z_samples.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite number in config".into());
        }
        if self.initial.mode == InitialMode::File && self.initial.path.is_none() {
            return bad("initial.mode = file needs initial.path".into());
        }
        let ctx = self.context()?;
        for &z in &self.z_samples {
            if ctx.pole_distance(c(z)) < ctx.pole_guard() {
                return bad(format!("spectral point {z:?} is on a pole"));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> Result<EllipticContext> {
        let mut ctx = EllipticContext::for_regime(self.regime, c(self.tau))
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if let Some(cut) = self.series_cutoff {
            ctx = ctx
                .with_series_cutoff(cut)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        if let Some(g) = self.pole_guard {
            ctx = ctx
                .with_pole_guard(g)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        Ok(ctx)
    }

    pub fn eta(&self) -> Complex64 {
        c(self.eta)
    }

    pub fn spectral_points(&self) -> Vec<Complex64> {
        self.z_samples.iter().copied().map(c).collect()
    }

    pub fn max_order(&self) -> usize {
        self.max_order.unwrap_or(self.n * self.m)
    }

    /// Initial state for `simulate`. A file state must match N and M.
    pub fn initial_state(&self) -> Result<PhaseState> {
        match self.initial.mode {
            InitialMode::Random => PhaseState::random(self.n, self.m, self.eta(), self.seed),
            InitialMode::Rank1 => PhaseState::rank_one(self.n, self.m, self.eta(), self.seed),
            InitialMode::File => {
                let path = self.initial.path.as_ref().expect("validated");
                let state = PhaseState::load(path).map_err(|e| {
                    Error::InvalidConfig(format!("cannot load state {}: {e}", path.display()))
                })?;
                if state.n != self.n || state.m != self.m {
                    return Err(Error::InvalidConfig(format!(
                        "state file has N = {}, M = {} but config has N = {}, M = {}",
                        state.n, state.m, self.n, self.m
                    )));
                }
                Ok(state)
            }
        }
    }
}
