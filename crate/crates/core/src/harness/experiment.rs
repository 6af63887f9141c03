//! Configuration files and experiment descriptions.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Resolution, SystemConfig};
use crate::downlink::Precoder;
use crate::energy::PowerParams;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NmseSweep,
    Maxmin,
    EeSweep,
    ValidateAqnm,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::NmseSweep => "nmse-sweep",
            ExperimentKind::Maxmin => "maxmin",
            ExperimentKind::EeSweep => "ee-sweep",
            ExperimentKind::ValidateAqnm => "validate-aqnm",
        }
    }
}

/// Which precoders a run evaluates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderChoice {
    Mrt,
    Zf,
    #[default]
    Both,
}

impl PrecoderChoice {
    pub fn precoders(self) -> Vec<Precoder> {
        match self {
            PrecoderChoice::Mrt => vec![Precoder::Mrt],
            PrecoderChoice::Zf => vec![Precoder::Zf],
            PrecoderChoice::Both => vec![Precoder::Mrt, Precoder::Zf],
        }
    }
}

impl fmt::Display for PrecoderChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecoderChoice::Mrt => "mrt",
            PrecoderChoice::Zf => "zf",
            PrecoderChoice::Both => "both",
        })
    }
}

impl FromStr for PrecoderChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrt" => Ok(PrecoderChoice::Mrt),
            "zf" => Ok(PrecoderChoice::Zf),
            "both" => Ok(PrecoderChoice::Both),
            other => Err(Error::Domain(format!("precoder must be mrt, zf or both, got {other:?}"))),
        }
    }
}

/// The `[experiment]` table. Grids left empty fall back to per-experiment
/// defaults (see [`ExperimentSpec::capacity_grid`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    /// Fronthaul capacities (bits/s/Hz), applied to uplink and downlink.
    pub capacities: Vec<f64>,
    /// Converter resolutions, applied to ADCs and DACs.
    pub bits: Vec<Resolution>,
    pub drops: u64,
    pub blocks: u64,
    pub precoder: PrecoderChoice,
    /// Samples per resolution for the quantization-noise validation.
    pub samples: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self { capacities: vec![], bits: vec![], drops: 50, blocks: 20, precoder: PrecoderChoice::Both, samples: 1_000_000 }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.drops == 0 {
            return Err(Error::Config { field: "experiment.drops", reason: "must be at least 1".into() });
        }
        if self.blocks == 0 {
            return Err(Error::Config { field: "experiment.blocks", reason: "must be at least 1".into() });
        }
        if self.samples == 0 {
            return Err(Error::Config { field: "experiment.samples", reason: "must be at least 1".into() });
        }
        if self.capacities.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::Config { field: "experiment.capacities", reason: "capacities must be positive".into() });
        }
        if self.bits.contains(&Resolution::Bits(0)) {
            return Err(Error::Config { field: "experiment.bits", reason: "resolutions must be at least 1 bit".into() });
        }
        Ok(())
    }

    pub fn capacity_grid(&self, kind: ExperimentKind, cfg: &SystemConfig) -> Vec<f64> {
        if !self.capacities.is_empty() {
            return self.capacities.clone();
        }
        let per_chain = 2.0 * cfg.rf_chains as f64;
        match kind {
            ExperimentKind::NmseSweep => [2.0, 4.0, 6.0, 8.0].iter().map(|x| x * per_chain).chain([f64::INFINITY]).collect(),
            ExperimentKind::EeSweep => vec![8.0, 32.0],
            ExperimentKind::Maxmin | ExperimentKind::ValidateAqnm => vec![cfg.downlink_capacity],
        }
    }

    pub fn bits_grid(&self, kind: ExperimentKind, cfg: &SystemConfig) -> Vec<Resolution> {
        if !self.bits.is_empty() {
            return self.bits.clone();
        }
        match kind {
            ExperimentKind::NmseSweep => (1..=8).map(Resolution::Bits).chain([Resolution::Infinite]).collect(),
            ExperimentKind::EeSweep => (1..=8).map(Resolution::Bits).collect(),
            ExperimentKind::ValidateAqnm => (1..=4).map(Resolution::Bits).collect(),
            ExperimentKind::Maxmin => vec![cfg.dac_bits],
        }
    }
}

/// Whole configuration file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub power: PowerParams,
    pub experiment: ExperimentSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.power.validate()?;
        self.experiment.validate()
    }

    /// 64-bit digest of the canonical serialization, as 16 hex digits.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("configuration serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads and validates a configuration file; an empty file gives defaults.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse(&text)
}
