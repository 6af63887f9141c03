// Statistical RF combiners: top eigenvectors of the nearest users'
// covariance sum, pushed onto unit-modulus entries by alternating projection.
//
//   cargo run --release --example rf_combiners

use cellfree::linalg::{real_trace, CMat};
use cellfree::netgen::{channel_covariance, drop_topology, sample_paths};
use cellfree::rf::combiner::nearest_covariance_sum;
use cellfree::rf::{alternating_projection_trace, top_eigenvectors};
use cellfree::rng::{child_stream, Stage};
use cellfree::SystemConfig;

fn captured(w: &CMat, cov: &CMat) -> f64 {
    // Share of the covariance energy inside span(w).
    let q = w.clone().qr().q();
    real_trace(&(q.adjoint() * cov * &q)) / real_trace(cov)
}

fn main() {
    let cfg = SystemConfig::default();
    let topology = drop_topology(&cfg, &mut child_stream(cfg.seed, 0, 0, Stage::Topology));
    let paths = sample_paths(&cfg, &topology, &mut child_stream(cfg.seed, 0, 0, Stage::Paths));
    let stats = channel_covariance(&paths);

    for m in 0..cfg.stations {
        let sum = nearest_covariance_sum(&stats, &topology, &cfg, m);
        let u = top_eigenvectors(&sum, cfg.rf_chains);
        let (w, steps) = alternating_projection_trace(&u);
        let modulus_err = w.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
        println!(
            "station {m}: {} steps, energy captured {:.3} (eigvecs) vs {:.3} (unit modulus), max | |w|-1 | = {modulus_err:.1e}",
            steps.len(),
            captured(&u, &sum),
            captured(&w, &sum),
        );
    }
}
