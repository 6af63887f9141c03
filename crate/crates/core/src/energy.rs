//! Station power consumption and the minimum energy-efficiency bound.

use serde::{Deserialize, Serialize};

use crate::config::{Resolution, SystemConfig};
use crate::error::{Error, Result};

/// Hardware power figures. Defaults are the optimistic values of recent
/// converter, mixer and fronthaul implementations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerParams {
    /// Converter figure of merit, J per conversion step.
    pub fom: f64,
    /// Converter sampling rate, Hz.
    pub sample_rate: f64,
    /// Fronthaul power per bit/s, W.
    pub fronthaul: f64,
    /// Power-added efficiency of the amplifiers.
    pub pae: f64,
    pub local_oscillator: f64,
    pub low_pass_filter: f64,
    pub mixer: f64,
    pub phase_shifter: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            fom: 1432.1e-15,
            sample_rate: 1e9,
            fronthaul: 2.0 / 1e9,
            pae: 0.46,
            local_oscillator: 22.5e-3,
            low_pass_filter: 14e-3,
            mixer: 0.3e-3,
            phase_shifter: 3e-3,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("power.fom", self.fom),
            ("power.sample_rate", self.sample_rate),
            ("power.fronthaul", self.fronthaul),
            ("power.pae", self.pae),
            ("power.local_oscillator", self.local_oscillator),
            ("power.low_pass_filter", self.low_pass_filter),
            ("power.mixer", self.mixer),
            ("power.phase_shifter", self.phase_shifter),
        ];
        for (field, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config { field, reason: format!("must be positive and finite, got {v}") });
            }
        }
        Ok(())
    }

    /// Power of one RF chain, `2 P_LPF + 2 P_M + P_PS`.
    pub fn rf_chain(&self) -> f64 {
        2.0 * self.low_pass_filter + 2.0 * self.mixer + self.phase_shifter
    }
}

/// `(P_ADC, P_RF)` for `B`-bit converters.
pub fn component_powers(params: &PowerParams, bits: Resolution) -> Result<(f64, f64)> {
    let b = bits
        .bits()
        .ok_or_else(|| Error::Domain("energy accounting needs a finite converter resolution".into()))?;
    Ok((params.fom * params.sample_rate * 2f64.powi(b as i32), params.rf_chain()))
}

/// Amplifier power over a coherence period for a given mean transmit power.
pub fn pa_power(params: &PowerParams, cfg: &SystemConfig, expected_tx_power: f64) -> Result<f64> {
    if cfg.block_length() <= cfg.training_length as f64 {
        return Err(Error::Domain("coherence block must exceed the training length".into()));
    }
    Ok(cfg.data_prelog() * expected_tx_power / params.pae)
}

/// `P_BS = P_PA + P_LO + R (2 P_ADC + P_RF)`.
pub fn bs_power(params: &PowerParams, bits: Resolution, rf_chains: usize, pa: f64) -> Result<f64> {
    let (adc, rf) = component_powers(params, bits)?;
    Ok(pa + params.local_oscillator + rf_chains as f64 * (2.0 * adc + rf))
}

/// Per-station breakdown and the resulting efficiency.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerReport {
    pub adc: f64,
    pub rf: f64,
    pub pa: Vec<f64>,
    pub bs: Vec<f64>,
    pub fronthaul: f64,
    pub total: f64,
    /// bits/J.
    pub ee: f64,
}

/// Builds the report from per-station mean transmit powers and the mean
/// min-rate (bits/s/Hz).
pub fn power_report(
    params: &PowerParams,
    cfg: &SystemConfig,
    bits: Resolution,
    capacity: f64,
    tx_power: &[f64],
    min_rate: f64,
) -> Result<PowerReport> {
    let (adc, rf) = component_powers(params, bits)?;
    let pa = tx_power.iter().map(|&p| pa_power(params, cfg, p)).collect::<Result<Vec<_>>>()?;
    let bs = pa.iter().map(|&p| bs_power(params, bits, cfg.rf_chains, p)).collect::<Result<Vec<_>>>()?;
    let fronthaul = fronthaul_power(params, cfg, capacity)?;
    let total = bs.iter().sum::<f64>() + fronthaul;
    let ee = energy_efficiency(min_rate, bs.iter().sum(), fronthaul, cfg)?;
    Ok(PowerReport { adc, rf, pa, bs, fronthaul, total, ee })
}

/// `M · W · C · P_FH`.
pub fn fronthaul_power(params: &PowerParams, cfg: &SystemConfig, capacity: f64) -> Result<f64> {
    if !capacity.is_finite() {
        return Err(Error::Domain("energy efficiency is undefined for infinite fronthaul capacity".into()));
    }
    Ok(cfg.stations as f64 * cfg.bandwidth * capacity * params.fronthaul)
}

/// `prelog · W · rate / (Σ P_BS + P_fronthaul)` in bits/J.
pub fn energy_efficiency(min_rate: f64, station_power: f64, fronthaul_power: f64, cfg: &SystemConfig) -> Result<f64> {
    let den = station_power + fronthaul_power;
    if !(den > 0.0) {
        return Err(Error::Domain("total power must be positive".into()));
    }
    Ok(cfg.data_prelog() * cfg.bandwidth * min_rate / den)
}
