//! One drop and one coherence block of the end-to-end chain.

use crate::bisect::{FairnessResult, Termination};
use crate::config::SystemConfig;
use crate::downlink::{sinr_per_user, transmit_power, Precoder, SinrReport};
use crate::error::{Error, Result};
use crate::maxmin_mrt::algorithm1;
use crate::maxmin_zf::algorithm2;
use crate::netgen::{channel_covariance, drop_topology, sample_channel, sample_paths, ChannelStats, PathSet, Topology};
use crate::rf::{design_combiners, distortion_factor, CombinerSet};
use crate::rng::{child_stream, Stage};
use crate::uplink::{effective_channel, EffectiveChannel, UplinkStatistics};

/// Everything fixed for the lifetime of a user drop.
#[derive(Clone, Debug)]
pub struct DropState {
    pub index: u64,
    pub topology: Topology,
    pub paths: PathSet,
    pub stats: ChannelStats,
    pub combiners: CombinerSet,
}

impl DropState {
    pub fn new(cfg: &SystemConfig, master: u64, index: u64) -> Result<Self> {
        let topology = drop_topology(cfg, &mut child_stream(master, index, 0, Stage::Topology));
        let paths = sample_paths(cfg, &topology, &mut child_stream(master, index, 0, Stage::Paths));
        let stats = channel_covariance(&paths);
        let combiners = design_combiners(&stats, &topology, cfg).map_err(|e| e.at("combiner"))?;
        Ok(Self { index, topology, paths, stats, combiners })
    }

    /// Uplink compression and estimation statistics at the capacities and
    /// resolutions of `cfg`.
    pub fn uplink(&self, cfg: &SystemConfig) -> Result<UplinkStatistics> {
        UplinkStatistics::new(cfg, &self.stats, &self.combiners).map_err(|e| e.at("uplink"))
    }
}

/// Channel knowledge handed to the precoders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Csi {
    #[default]
    Estimated,
    /// True effective channel with zero estimation error.
    Perfect,
}

#[derive(Debug)]
pub struct PrecoderOutcome {
    pub precoder: Precoder,
    pub result: Result<Solved>,
}

/// Optimized state and what it delivers.
#[derive(Clone, Debug)]
pub struct Solved {
    pub fairness: FairnessResult,
    pub report: SinrReport,
    /// Expected transmit power per station, W.
    pub tx_power: Vec<f64>,
}

#[derive(Debug)]
pub struct BlockOutcome {
    pub block: u64,
    pub effective: EffectiveChannel,
    pub outcomes: Vec<PrecoderOutcome>,
}

/// Samples a channel, estimates it, and runs each requested precoder on the
/// same draw. Per-precoder failures are reported inside the outcome; only
/// failures shared by every precoder abort the block.
pub fn run_coherence_block(
    cfg: &SystemConfig,
    drop: &DropState,
    uplink: &UplinkStatistics,
    master: u64,
    block: u64,
    precoders: &[Precoder],
    csi: Csi,
) -> Result<BlockOutcome> {
    let draw = sample_channel(&drop.paths, &mut child_stream(master, drop.index, block, Stage::Channel));
    let effective = match csi {
        Csi::Perfect => EffectiveChannel::perfect(&draw, &drop.combiners),
        Csi::Estimated => {
            let mut rng = child_stream(master, drop.index, block, Stage::UplinkNoise);
            let h_hat = uplink.estimate(cfg, &drop.combiners, &draw, &mut rng);
            effective_channel(&h_hat, &uplink.filters, &drop.combiners)
        }
    };
    let rho = distortion_factor(cfg.dac_bits).map_err(|e| e.at("downlink"))?;
    let w = &drop.combiners.w;
    let outcomes = precoders
        .iter()
        .map(|&precoder| {
            let result = solve(precoder, &effective, w, cfg, rho);
            PrecoderOutcome { precoder, result }
        })
        .collect();
    Ok(BlockOutcome { block, effective, outcomes })
}

fn solve(precoder: Precoder, eff: &EffectiveChannel, w: &[crate::linalg::CMat], cfg: &SystemConfig, rho: f64) -> Result<Solved> {
    let fairness = match precoder {
        Precoder::Mrt => algorithm1(eff, w, cfg, Termination::default()).map_err(|e| e.at("maxmin_mrt"))?,
        Precoder::Zf => algorithm2(eff, w, cfg, Termination::default()).map_err(|e| e.at("maxmin_zf"))?,
    };
    let state = &fairness.state;
    let report = sinr_per_user(state, eff, rho, cfg.downlink_noise);
    let tx_power = (0..state.f.len())
        .map(|m| transmit_power(&state.f[m], &state.p[m], state.sigma[m], &w[m], rho))
        .collect();
    Ok(Solved { fairness, report, tx_power })
}

/// Stage label of a failure, for the `status` column.
pub fn stage_of(err: &Error) -> &'static str {
    match err {
        Error::Stage { stage, .. } => stage,
        _ => "unknown",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig {
        SystemConfig { users: 4, training_length: 4, ..Default::default() }
    }

    #[test]
    fn block_shares_draw_across_precoders() {
        let cfg = small();
        let drop = DropState::new(&cfg, 7, 0).unwrap();
        let uplink = drop.uplink(&cfg).unwrap();
        let both = run_coherence_block(&cfg, &drop, &uplink, 7, 3, &[Precoder::Mrt, Precoder::Zf], Csi::Estimated).unwrap();
        let zf = run_coherence_block(&cfg, &drop, &uplink, 7, 3, &[Precoder::Zf], Csi::Estimated).unwrap();
        assert_eq!(both.effective.g_hat, zf.effective.g_hat);
        let a = both.outcomes[1].result.as_ref().unwrap();
        let b = zf.outcomes[0].result.as_ref().unwrap();
        assert_eq!(a.report.min_rate(), b.report.min_rate());
        for o in &both.outcomes {
            let s = o.result.as_ref().unwrap();
            assert!(s.report.min_sinr() > 0.0);
            assert!(s.tx_power.iter().all(|&p| p <= cfg.downlink_power * (1.0 + 1e-7)));
        }
    }

    #[test]
    fn perfect_csi_has_no_estimation_error() {
        let cfg = small();
        let drop = DropState::new(&cfg, 7, 1).unwrap();
        let uplink = drop.uplink(&cfg).unwrap();
        let out = run_coherence_block(&cfg, &drop, &uplink, 7, 0, &[Precoder::Zf], Csi::Perfect).unwrap();
        assert!(out.effective.c_gtilde.iter().flatten().all(|c| c.norm() == 0.0));
    }
}
