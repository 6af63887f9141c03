// Drops stations and users on the wrapped square, builds the per-link
// covariances and checks one channel draw against them.
//
//   cargo run --release --example channel_statistics

use cellfree::linalg::real_trace;
use cellfree::netgen::{channel_covariance, drop_topology, sample_channel, sample_paths};
use cellfree::rng::{child_stream, Stage};
use cellfree::SystemConfig;

fn main() {
    let cfg = SystemConfig::default();
    let topology = drop_topology(&cfg, &mut child_stream(cfg.seed, 0, 0, Stage::Topology));
    let paths = sample_paths(&cfg, &topology, &mut child_stream(cfg.seed, 0, 0, Stage::Paths));
    let stats = channel_covariance(&paths);

    println!("{} stations, {} users, {} antennas each", cfg.stations, cfg.users, cfg.antennas());
    println!("link gain tr(C_h)/noise, dB (rows: stations)");
    for m in 0..cfg.stations {
        let row: Vec<String> = (0..cfg.users)
            .map(|k| format!("{:6.1}", 10.0 * (real_trace(stats.link(m, k)) / cfg.uplink_noise).log10()))
            .collect();
        println!("  {}", row.join(" "));
    }

    // Empirical energy over many blocks should approach the covariance trace.
    let blocks = 2000;
    let (m, k) = (0, 0);
    let mean: f64 = (0..blocks)
        .map(|b| sample_channel(&paths, &mut child_stream(cfg.seed, 0, b, Stage::Channel)).link(m, k).norm_squared())
        .sum::<f64>()
        / blocks as f64;
    let expected = real_trace(stats.link(m, k));
    println!("link (0,0): mean |h|^2 = {mean:.4e}, tr(C_h) = {expected:.4e}, ratio {:.3}", mean / expected);
    println!("nearest users of station 0: {:?}", topology.nearest_users(0, cfg.users / cfg.stations));
}
