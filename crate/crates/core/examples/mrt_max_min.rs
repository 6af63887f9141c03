// Max-min fairness with maximum-ratio transmission: SOCP feasibility
// bisection over per-link powers, then compression noise and power
// projection, repeated until the min-SINR settles.
//
//   cargo run --release --example mrt_max_min

use cellfree::bisect::Termination;
use cellfree::downlink::{fronthaul_rate, sinr_per_user, transmit_power};
use cellfree::harness::DropState;
use cellfree::maxmin_mrt::{algorithm1, mrt_coefficients, single_user_bound, ClarabelOracle, SocpOracle};
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
    let w = &drop.combiners.w;

    let out = algorithm1(&eff, w, &cfg, Termination::default())?;
    println!("status {} after {} rounds, trace {:?}", out.status, out.rounds, out.trace);

    let rho = distortion_factor(cfg.dac_bits)?;
    let s = &out.state;
    let report = sinr_per_user(s, &eff, rho, cfg.downlink_noise);
    println!("per-user SINR {:?}", report.sinr.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>());
    for m in 0..cfg.stations {
        println!(
            "station {m}: power {:.4} W, fronthaul {:.6} bits/s/Hz",
            transmit_power(&s.f[m], &s.p[m], s.sigma[m], &w[m], rho),
            fronthaul_rate(&s.f[m], &s.p[m], s.sigma[m])
        );
    }

    // One raw oracle call at the final noise level, slightly above t*.
    let coef = mrt_coefficients(&eff, &s.sigma, rho, w);
    let oracle = ClarabelOracle::default();
    println!("single-user bound {:.4e}", single_user_bound(&coef, cfg.downlink_noise, cfg.downlink_power));
    for scale in [0.9, 1.0, 1.1] {
        let wit = oracle.feasibility(scale * out.t_star, &coef, cfg.downlink_noise, cfg.downlink_power);
        println!("t = {:.3e}: {:?} ({} interior-point iterations)", scale * out.t_star, wit.status, wit.iterations);
    }
    Ok(())
}
