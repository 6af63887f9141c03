//! Statistical RF combiners with unit-modulus phase shifters.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eigen_desc, polar_factor, CMat, C64, ONE};
use crate::netgen::{ChannelStats, Topology};

const PROJECTION_MAX_ITERATIONS: usize = 100;
const PROJECTION_TOLERANCE: f64 = 1e-8;

/// Per-station `N × R` combiners; the same matrices serve as RF precoders.
#[derive(Clone, Debug)]
pub struct CombinerSet {
    pub w: Vec<CMat>,
}

/// Top-`r` eigenvectors of a Hermitian matrix, descending eigenvalue.
pub fn top_eigenvectors(cov: &CMat, r: usize) -> CMat {
    let (_, vecs) = hermitian_eigen_desc(cov);
    vecs.columns(0, r).into_owned()
}

fn phase_projection(u: &CMat) -> CMat {
    u.map(|z| if z.norm() < 1e-14 { ONE } else { z / z.norm() })
}

/// Alternates between the unit-modulus set and the scaled semi-unitary set.
/// Returns the final unit-modulus iterate and the Frobenius distances between
/// consecutive unit-modulus iterates.
pub fn alternating_projection_trace(u: &CMat) -> (CMat, Vec<f64>) {
    let mut w = phase_projection(u);
    let mut steps = Vec::new();
    for _ in 0..PROJECTION_MAX_ITERATIONS {
        let next = phase_projection(&polar_factor(&w));
        let step = frobenius(&(&next - &w));
        w = next;
        steps.push(step);
        if step < PROJECTION_TOLERANCE {
            break;
        }
    }
    (w, steps)
}

pub fn alternating_projection(u: &CMat) -> CMat {
    alternating_projection_trace(u).0
}

/// Sum of the covariances of the `K/M` users nearest to `station`.
pub fn nearest_covariance_sum(stats: &ChannelStats, topology: &Topology, cfg: &SystemConfig, station: usize) -> CMat {
    let n = cfg.antennas();
    topology
        .nearest_users(station, cfg.users / cfg.stations)
        .into_iter()
        .fold(CMat::zeros(n, n), |acc, k| acc + stats.link(station, k))
}

pub fn design_combiners(stats: &ChannelStats, topology: &Topology, cfg: &SystemConfig) -> Result<CombinerSet> {
    if cfg.users % cfg.stations != 0 {
        return Err(Error::Config { field: "users", reason: "stations must divide users".into() });
    }
    let mut w = Vec::with_capacity(cfg.stations);
    for m in 0..cfg.stations {
        let sum = nearest_covariance_sum(stats, topology, cfg, m);
        if sum.iter().any(|z: &C64| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Eigen { station: m });
        }
        let u = top_eigenvectors(&sum, cfg.rf_chains);
        w.push(alternating_projection(&u));
    }
    Ok(CombinerSet { w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CVec};
    use crate::netgen::{channel_covariance, drop_topology, sample_paths};
    use crate::rng::{child_stream, Stage};
    use std::f64::consts::PI;

    fn dft_columns(n: usize, r: usize) -> CMat {
        CMat::from_fn(n, r, |i, j| {
            let ph = -2.0 * PI * (i * j) as f64 / n as f64;
            c(ph.cos(), ph.sin()) / (n as f64).sqrt()
        })
    }

    #[test]
    fn diagonal_covariance_selects_canonical_vectors() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(5.0, 0.0), c(3.0, 0.0), c(2.0, 0.0)]));
        let u = top_eigenvectors(&d, 2);
        assert!((u[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((u[(2, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dft_columns_are_a_fixed_point() {
        let u = dft_columns(8, 3);
        let (w, steps) = alternating_projection_trace(&u);
        assert_eq!(steps.len(), 1);
        assert!((w - u.scale(8f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn phase_projection_conventions() {
        let u = CMat::from_row_slice(2, 1, &[c(0.0, 0.0), C64::from_polar(0.3, 1.2)]);
        let p = phase_projection(&u);
        assert_eq!(p[(0, 0)], ONE);
        assert!((p[(1, 0)] - C64::from_polar(1.0, 1.2)).norm() < 1e-15);
    }

    #[test]
    fn identity_covariance_full_rank_is_unit_modulus() {
        let u = top_eigenvectors(&CMat::identity(4, 4), 4);
        let w = alternating_projection(&u);
        assert!(w.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn designed_combiners_are_unit_modulus() {
        let cfg = SystemConfig::default();
        let mut rng = child_stream(11, 0, 0, Stage::Topology);
        let topo = drop_topology(&cfg, &mut rng);
        let stats = channel_covariance(&sample_paths(&cfg, &topo, &mut rng));
        let set = design_combiners(&stats, &topo, &cfg).unwrap();
        assert_eq!(set.w.len(), cfg.stations);
        for w in &set.w {
            assert_eq!(w.shape(), (8, 2));
            assert!(w.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
        let sum = nearest_covariance_sum(&stats, &topo, &cfg, 0);
        let u = top_eigenvectors(&sum, 2);
        assert!((u.adjoint() * &u - CMat::identity(2, 2)).norm() < 1e-10);
    }
}
