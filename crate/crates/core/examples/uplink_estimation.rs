// Uplink channel estimation under fronthaul compression and ADC
// quantization: analytic NMSE over a (C, B) grid and a Monte Carlo check.
//
//   cargo run --release --example uplink_estimation

use cellfree::config::Resolution;
use cellfree::harness::DropState;
use cellfree::rng::{child_stream, Stage};
use cellfree::netgen::sample_channel;
use cellfree::SystemConfig;

fn main() -> cellfree::Result<()> {
    let base = SystemConfig::default();
    let drop = DropState::new(&base, base.seed, 0)?;
    let caps = [4.0, 8.0, 16.0, 32.0, f64::INFINITY];
    let bits: Vec<Resolution> = (1..=6).map(Resolution::Bits).chain([Resolution::Infinite]).collect();

    print!("{:>8}", "C \\ B");
    for b in &bits {
        print!("{:>8}", b.to_string());
    }
    println!();
    for &c in &caps {
        print!("{c:>8}");
        for &b in &bits {
            let cfg = SystemConfig { uplink_capacity: c, adc_bits: b, ..base.clone() };
            print!("{:>8.4}", drop.uplink(&cfg)?.nmse(&drop.stats)?);
        }
        println!();
    }

    // Sample-path estimates at the default operating point.
    let uplink = drop.uplink(&base)?;
    let blocks = 500;
    let (mut err, mut energy) = (0.0, 0.0);
    for b in 0..blocks {
        let draw = sample_channel(&drop.paths, &mut child_stream(base.seed, 0, b, Stage::Channel));
        let h_hat = uplink.estimate(&base, &drop.combiners, &draw, &mut child_stream(base.seed, 0, b, Stage::UplinkNoise));
        for (m, row) in h_hat.iter().enumerate() {
            for (k, est) in row.iter().enumerate() {
                err += (draw.link(m, k) - est).norm_squared();
                energy += draw.link(m, k).norm_squared();
            }
        }
    }
    println!("C={} B={}: analytic NMSE {:.4}, empirical {:.4} over {blocks} blocks", base.uplink_capacity, base.adc_bits, uplink.nmse(&drop.stats)?, err / energy);
    println!("compression noise per station: {:?}", uplink.sigma);
    Ok(())
}
