use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::Cadence;
use crate::lattice::ChainParams;

/// Which observables a run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    pub energy: bool,
    /// Half-chain entropy at every sample, plus the obstacle-partition
    /// entropy under per-step cadence.
    pub entropy: bool,
    /// Time-averaged clean-chain mode occupations.
    pub occupations: bool,
    /// Time-averaged entropy profile.
    pub profile: bool,
    pub floquet: bool,
    /// Entanglement links of the final state.
    pub links: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Analyses {
            energy: true,
            entropy: true,
            occupations: false,
            profile: false,
            floquet: false,
            links: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub tau: f64,
    pub n_cycles: usize,
    pub burn_in_fraction: f64,
    pub cadence: Cadence,
    pub seed: u64,
    /// Re-orthonormalization cadence in cycles; `0` disables it.
    pub reorthonormalize_every: usize,
    pub histogram_bins: usize,
    pub output_dir: Option<PathBuf>,
    pub analyses: Analyses,
    /// Write the final state as a checkpoint.
    pub checkpoint: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 64,
            tau: 1.0,
            n_cycles: 1000,
            burn_in_fraction: 0.1,
            cadence: Cadence::CycleStart,
            seed: 0,
            reorthonormalize_every: 1,
            histogram_bins: 40,
            output_dir: None,
            analyses: Analyses::default(),
            checkpoint: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.tau <= 0.0 {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if self.n_cycles == 0 {
            return Err(Error::Config("n_cycles must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::Config(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        if self.histogram_bins == 0 {
            return Err(Error::Config("histogram_bins must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ChainParams> {
        ChainParams::new(self.n, self.tau).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }
}
