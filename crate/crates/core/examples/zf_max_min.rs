// Max-min fairness with zero-forcing: alternate a bisection over shared user
// powers with the compression-noise step, on estimated channels.
//
//   cargo run --release --example zf_max_min

use cellfree::bisect::Termination;
use cellfree::downlink::{fronthaul_rate, transmit_power};
use cellfree::harness::DropState;
use cellfree::maxmin_zf::algorithm2;
use cellfree::netgen::sample_channel;
use cellfree::rf::distortion_factor;
use cellfree::rng::{child_stream, Stage};
use cellfree::uplink::effective_channel;
use cellfree::SystemConfig;

fn main() -> cellfree::Result<()> {
    let cfg = SystemConfig::default();
    let drop = DropState::new(&cfg, cfg.seed, 0)?;
    let uplink = drop.uplink(&cfg)?;
    let draw = sample_channel(&drop.paths, &mut child_stream(cfg.seed, 0, 0, Stage::Channel));
    let h_hat = uplink.estimate(&cfg, &drop.combiners, &draw, &mut child_stream(cfg.seed, 0, 0, Stage::UplinkNoise));
    let eff = effective_channel(&h_hat, &uplink.filters, &drop.combiners);

    let out = algorithm2(&eff, &drop.combiners.w, &cfg, Termination::default())?;
    println!("status {} after {} rounds", out.status, out.rounds);
    println!("min-SINR trace {:?}", out.trace);
    println!("t* = {:.6e}, min rate {:.4} bits/s/Hz", out.t_star, (1.0 + out.t_star).log2());

    let rho = distortion_factor(cfg.dac_bits)?;
    let s = &out.state;
    for m in 0..cfg.stations {
        println!(
            "station {m}: power {:.4} / {:.4} W, fronthaul {:.6} / {} bits/s/Hz",
            transmit_power(&s.f[m], &s.p[m], s.sigma[m], &drop.combiners.w[m], rho),
            cfg.downlink_power,
            fronthaul_rate(&s.f[m], &s.p[m], s.sigma[m]),
            cfg.downlink_capacity
        );
    }
    Ok(())
}
