// MRT against ZF on the same channel draws, in the default scenario and in
// denser, higher-SNR variants.
//
//   cargo run --release --example precoder_comparison

use cellfree::config::UpaDims;
use cellfree::downlink::Precoder;
use cellfree::harness::{run_coherence_block, Csi, DropState};
use cellfree::SystemConfig;

fn compare(label: &str, cfg: &SystemConfig, csi: Csi, drops: u64) -> cellfree::Result<()> {
    let (mut wins, mut mrt, mut zf) = (0, 0.0, 0.0);
    for d in 0..drops {
        let drop = DropState::new(cfg, cfg.seed, d)?;
        let uplink = drop.uplink(cfg)?;
        let out = run_coherence_block(cfg, &drop, &uplink, cfg.seed, 0, &[Precoder::Mrt, Precoder::Zf], csi)?;
        let rate = |i: usize| out.outcomes[i].result.as_ref().map_or(0.0, |s| s.report.min_rate());
        mrt += rate(0);
        zf += rate(1);
        if rate(1) >= rate(0) {
            wins += 1;
        }
    }
    let n = drops as f64;
    println!("{label:<34} {csi:?}: ZF ahead on {wins}/{drops} drops, mean min-rate MRT {:.3} ZF {:.3}", mrt / n, zf / n);
    Ok(())
}

fn main() -> cellfree::Result<()> {
    let base = SystemConfig::default();
    let dense = SystemConfig { area_side: 125.0, ..base.clone() };
    let wide = SystemConfig {
        area_side: 125.0,
        array: UpaDims { rows: 4, cols: 4 },
        rf_chains: 4,
        uplink_capacity: 32.0,
        downlink_capacity: 32.0,
        ..base.clone()
    };
    let light = SystemConfig { users: 4, training_length: 4, area_side: 60.0, ..base.clone() };
    for (label, cfg) in [("default", &base), ("125 m side", &dense), ("125 m side, N=16, R=4", &wide), ("60 m side, K=4", &light)] {
        compare(label, cfg, Csi::Estimated, 10)?;
    }
    compare("default", &base, Csi::Perfect, 10)?;
    Ok(())
}
