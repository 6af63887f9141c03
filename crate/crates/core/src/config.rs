//! Scalar system parameters shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converter resolution in bits; `Infinite` turns the quantizer off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Resolution {
    Bits(u32),
    Infinite,
}

impl Resolution {
    pub fn is_infinite(self) -> bool {
        matches!(self, Resolution::Infinite)
    }

    pub fn bits(self) -> Option<u32> {
        match self {
            Resolution::Bits(b) => Some(b),
            Resolution::Infinite => None,
        }
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Resolution::Bits(b) => write!(f, "{b}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ResolutionRepr {
    Bits(u32),
    Text(String),
}

impl Serialize for Resolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Resolution::Bits(b) => ResolutionRepr::Bits(*b),
            Resolution::Infinite => ResolutionRepr::Text("inf".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Resolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ResolutionRepr::deserialize(d)? {
            ResolutionRepr::Bits(b) => Ok(Resolution::Bits(b)),
            ResolutionRepr::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(Resolution::Infinite),
            ResolutionRepr::Text(t) => Err(serde::de::Error::custom(format!("expected bits or \"inf\", got {t:?}"))),
        }
    }
}

/// Uniform planar array geometry, rows × columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpaDims {
    pub rows: usize,
    pub cols: usize,
}

impl UpaDims {
    pub fn antennas(self) -> usize {
        self.rows * self.cols
    }
}

/// Parametric multipath model: log-distance pathloss and an exponential
/// per-path power profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    pub min_paths: usize,
    pub max_paths: usize,
    pub pathloss_exponent: f64,
    pub reference_distance: f64,
    pub reference_loss_db: f64,
    /// Power ratio between consecutive paths.
    pub path_decay: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            min_paths: 2,
            max_paths: 6,
            pathloss_exponent: 3.2,
            reference_distance: 1.0,
            reference_loss_db: 61.34,
            path_decay: 0.5,
        }
    }
}

impl ChannelParams {
    /// Linear pathloss gain at distance `d` meters. Distances under the
    /// reference distance are clamped to it.
    pub fn pathloss_gain(&self, d: f64) -> f64 {
        let d = d.max(self.reference_distance);
        let loss_db = self.reference_loss_db + 10.0 * self.pathloss_exponent * (d / self.reference_distance).log10();
        10f64.powf(-loss_db / 10.0)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

/// Thermal noise power `W · N0 · NF` with `N0 = -174 dBm/Hz`.
pub fn thermal_noise(bandwidth: f64, noise_figure_db: f64) -> f64 {
    bandwidth * dbm_to_watts(-174.0) * 10f64.powf(noise_figure_db / 10.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// Base stations (M).
    pub stations: usize,
    /// Single-antenna users (K).
    pub users: usize,
    pub array: UpaDims,
    /// RF chains per station (R).
    pub rf_chains: usize,
    /// Training length in channel uses (T).
    pub training_length: usize,
    pub adc_bits: Resolution,
    pub dac_bits: Resolution,
    /// Fronthaul capacities in bits/s/Hz; `inf` disables compression.
    pub uplink_capacity: f64,
    pub downlink_capacity: f64,
    pub uplink_power: f64,
    pub downlink_power: f64,
    pub uplink_noise: f64,
    pub downlink_noise: f64,
    pub bandwidth: f64,
    pub coherence_bandwidth: f64,
    pub coherence_time: f64,
    pub area_side: f64,
    pub seed: u64,
    pub channel: ChannelParams,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let bandwidth = 80e6;
        Self {
            stations: 4,
            users: 8,
            array: UpaDims { rows: 4, cols: 2 },
            rf_chains: 2,
            training_length: 8,
            adc_bits: Resolution::Bits(4),
            dac_bits: Resolution::Bits(4),
            uplink_capacity: 16.0,
            downlink_capacity: 16.0,
            uplink_power: dbm_to_watts(23.0),
            downlink_power: dbm_to_watts(33.0),
            uplink_noise: thermal_noise(bandwidth, 7.0),
            downlink_noise: thermal_noise(bandwidth, 10.0),
            bandwidth,
            coherence_bandwidth: 180e3,
            coherence_time: 10e-3,
            area_side: 250.0,
            seed: 1,
            channel: ChannelParams::default(),
        }
    }
}

/// Largest observation dimension R·T accepted by the estimator.
pub const MAX_OBSERVATION_DIM: usize = 4096;

fn reject(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config { field, reason: reason.into() }
}

impl SystemConfig {
    pub fn antennas(&self) -> usize {
        self.array.antennas()
    }

    /// Channel uses per coherence block, `W_c · T_c`.
    pub fn block_length(&self) -> f64 {
        self.coherence_bandwidth * self.coherence_time
    }

    /// Fraction of the coherence block left for data, `(W_c T_c - T) / (W_c T_c)`.
    pub fn data_prelog(&self) -> f64 {
        let l = self.block_length();
        (l - self.training_length as f64) / l
    }

    pub fn validate(&self) -> Result<()> {
        if self.stations == 0 {
            return Err(reject("stations", "must be at least 1"));
        }
        if self.users == 0 {
            return Err(reject("users", "must be at least 1"));
        }
        if self.users % self.stations != 0 {
            return Err(reject(
                "users",
                format!("stations ({}) must divide users ({}) for the nearest-user combiner rule", self.stations, self.users),
            ));
        }
        if self.array.rows == 0 || self.array.cols == 0 {
            return Err(reject("array", "rows and cols must be positive"));
        }
        if self.rf_chains == 0 || self.rf_chains > self.antennas() {
            return Err(reject("rf_chains", format!("must lie in 1..={}", self.antennas())));
        }
        if self.training_length < self.users {
            return Err(reject(
                "training_length",
                format!("training length {} is shorter than the number of users {}", self.training_length, self.users),
            ));
        }
        if self.rf_chains * self.training_length > MAX_OBSERVATION_DIM {
            return Err(reject(
                "training_length",
                format!("observation dimension R*T = {} exceeds {MAX_OBSERVATION_DIM}", self.rf_chains * self.training_length),
            ));
        }
        for (field, b) in [("adc_bits", self.adc_bits), ("dac_bits", self.dac_bits)] {
            if b == Resolution::Bits(0) {
                return Err(reject(field, "resolution must be at least 1 bit"));
            }
        }
        let positives = [
            ("uplink_capacity", self.uplink_capacity),
            ("downlink_capacity", self.downlink_capacity),
            ("uplink_power", self.uplink_power),
            ("downlink_power", self.downlink_power),
            ("uplink_noise", self.uplink_noise),
            ("downlink_noise", self.downlink_noise),
            ("bandwidth", self.bandwidth),
            ("coherence_bandwidth", self.coherence_bandwidth),
            ("coherence_time", self.coherence_time),
            ("area_side", self.area_side),
        ];
        for (field, v) in positives {
            if !(v > 0.0) {
                return Err(reject(field, format!("must be strictly positive, got {v}")));
            }
        }
        for (field, v) in [
            ("uplink_power", self.uplink_power),
            ("downlink_power", self.downlink_power),
            ("uplink_noise", self.uplink_noise),
            ("downlink_noise", self.downlink_noise),
            ("bandwidth", self.bandwidth),
            ("area_side", self.area_side),
        ] {
            if !v.is_finite() {
                return Err(reject(field, "must be finite"));
            }
        }
        if self.block_length() <= self.training_length as f64 {
            return Err(reject("training_length", "coherence block W_c*T_c must exceed the training length"));
        }
        let ch = &self.channel;
        if ch.min_paths == 0 || ch.max_paths < ch.min_paths {
            return Err(reject("channel.min_paths", "need 1 <= min_paths <= max_paths"));
        }
        if !(ch.reference_distance > 0.0) || !(ch.path_decay > 0.0) || !(ch.pathloss_exponent >= 0.0) {
            return Err(reject("channel", "reference_distance and path_decay must be positive, exponent nonnegative"));
        }
        Ok(())
    }

    /// Additional constraint for zero-forcing precoding.
    pub fn validate_zf(&self) -> Result<()> {
        if self.users > self.stations * self.rf_chains {
            return Err(reject(
                "users",
                format!("zero-forcing needs K <= M*R, got K = {} and M*R = {}", self.users, self.stations * self.rf_chains),
            ));
        }
        Ok(())
    }
}
