//! Network topology, multipath parameters, long-term covariances and
//! per-block channel realizations.
//!
//! Each link `(m, k)` is a sum of `L` plane waves impinging on a
//! half-wavelength uniform planar array; path gains are redrawn every
//! coherence block while the angles are held for the whole drop.

use std::f64::consts::PI;

use rand::Rng;

use crate::config::{SystemConfig, UpaDims};
use crate::linalg::{c, hermitian_part, CMat, CVec, C64};
use crate::rng::complex_gaussian;

/// Station and user positions on a torus of side `side`.
#[derive(Clone, Debug)]
pub struct Topology {
    pub side: f64,
    pub stations: Vec<[f64; 2]>,
    pub users: Vec<[f64; 2]>,
}

/// Minimum-image distance on a square torus.
pub fn toroidal_distance(a: [f64; 2], b: [f64; 2], side: f64) -> f64 {
    let axis = |u: f64, v: f64| {
        let d = (u - v).abs();
        d.min(side - d)
    };
    axis(a[0], b[0]).hypot(axis(a[1], b[1]))
}

impl Topology {
    pub fn distance(&self, station: usize, user: usize) -> f64 {
        toroidal_distance(self.stations[station], self.users[user], self.side)
    }

    /// The `count` users nearest to `station`, ties broken by user index.
    pub fn nearest_users(&self, station: usize, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.users.len()).collect();
        idx.sort_by(|&a, &b| self.distance(station, a).total_cmp(&self.distance(station, b)).then(a.cmp(&b)));
        idx.truncate(count);
        idx
    }
}

pub fn drop_topology<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Topology {
    let side = cfg.area_side;
    let point = |rng: &mut R| [rng.random::<f64>() * side, rng.random::<f64>() * side];
    let stations = (0..cfg.stations).map(|_| point(rng)).collect();
    let users = (0..cfg.users).map(|_| point(rng)).collect();
    Topology { side, stations, users }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Path {
    /// Gain variance (linear power).
    pub power: f64,
    /// Azimuth angle of arrival in `[-π, π]`.
    pub azimuth: f64,
    /// Zenith angle of arrival in `[0, π]`.
    pub zenith: f64,
}

/// Multipath parameters of every link, stored station-major (`m * K + k`).
#[derive(Clone, Debug)]
pub struct PathSet {
    pub stations: usize,
    pub users: usize,
    pub array: UpaDims,
    pub links: Vec<Vec<Path>>,
}

impl PathSet {
    pub fn link(&self, station: usize, user: usize) -> &[Path] {
        &self.links[station * self.users + user]
    }
}

pub fn sample_paths<R: Rng + ?Sized>(cfg: &SystemConfig, topology: &Topology, rng: &mut R) -> PathSet {
    let ch = &cfg.channel;
    let mut links = Vec::with_capacity(cfg.stations * cfg.users);
    for m in 0..cfg.stations {
        for k in 0..cfg.users {
            let total = ch.pathloss_gain(topology.distance(m, k));
            let count = rng.random_range(ch.min_paths..=ch.max_paths);
            let weights: Vec<f64> = (0..count).map(|l| ch.path_decay.powi(l as i32)).collect();
            let norm: f64 = weights.iter().sum();
            let paths = weights
                .iter()
                .map(|w| Path {
                    power: total * w / norm,
                    azimuth: rng.random_range(-PI..=PI),
                    zenith: rng.random_range(0.0..=PI),
                })
                .collect();
            links.push(paths);
        }
    }
    PathSet { stations: cfg.stations, users: cfg.users, array: cfg.array, links }
}

/// Half-wavelength UPA response, row-major, phase reference at element (0, 0):
/// entry `(r, c)` is `exp(jπ(r·sinφ·sinθ + c·cosφ))`.
pub fn array_response(azimuth: f64, zenith: f64, dims: UpaDims) -> CVec {
    let (su, cu) = (zenith.sin() * azimuth.sin(), zenith.cos());
    CVec::from_fn(dims.antennas(), |i, _| {
        let (r, col) = ((i / dims.cols) as f64, (i % dims.cols) as f64);
        let phase = PI * (r * su + col * cu);
        c(phase.cos(), phase.sin())
    })
}

/// Long-term covariances `C_h[m,k] = Σ σ² a aᴴ`, station-major.
#[derive(Clone, Debug)]
pub struct ChannelStats {
    pub stations: usize,
    pub users: usize,
    pub cov: Vec<CMat>,
}

impl ChannelStats {
    pub fn link(&self, station: usize, user: usize) -> &CMat {
        &self.cov[station * self.users + user]
    }

    pub fn station_blocks(&self, station: usize) -> &[CMat] {
        &self.cov[station * self.users..(station + 1) * self.users]
    }
}

pub fn link_covariance(paths: &[Path], dims: UpaDims) -> CMat {
    let n = dims.antennas();
    let mut cov = CMat::zeros(n, n);
    for p in paths {
        if p.power == 0.0 {
            continue;
        }
        let a = array_response(p.azimuth, p.zenith, dims);
        cov += (&a * a.adjoint()).scale(p.power);
    }
    hermitian_part(&cov)
}

pub fn channel_covariance(paths: &PathSet) -> ChannelStats {
    ChannelStats {
        stations: paths.stations,
        users: paths.users,
        cov: paths.links.iter().map(|l| link_covariance(l, paths.array)).collect(),
    }
}

/// One coherence-block realization, station-major.
#[derive(Clone, Debug)]
pub struct ChannelDraw {
    pub users: usize,
    pub h: Vec<CVec>,
    pub gains: Vec<Vec<C64>>,
}

impl ChannelDraw {
    pub fn link(&self, station: usize, user: usize) -> &CVec {
        &self.h[station * self.users + user]
    }
}

/// Rebuilds `h = Σ α a(θ, φ)` from stored gains and angles.
pub fn assemble_channel(paths: &[Path], gains: &[C64], dims: UpaDims) -> CVec {
    let mut h = CVec::zeros(dims.antennas());
    for (p, &g) in paths.iter().zip(gains) {
        h += array_response(p.azimuth, p.zenith, dims) * g;
    }
    h
}

pub fn sample_channel<R: Rng + ?Sized>(paths: &PathSet, rng: &mut R) -> ChannelDraw {
    let mut h = Vec::with_capacity(paths.links.len());
    let mut gains = Vec::with_capacity(paths.links.len());
    for link in &paths.links {
        let g: Vec<C64> = link.iter().map(|p| complex_gaussian(rng, p.power)).collect();
        h.push(assemble_channel(link, &g, paths.array));
        gains.push(g);
    }
    ChannelDraw { users: paths.users, h, gains }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_defect, hermitian_eigenvalues, real_trace};
    use crate::rng::{child_stream, Stage};

    fn dims(rows: usize, cols: usize) -> UpaDims {
        UpaDims { rows, cols }
    }

    #[test]
    fn toroidal_distance_examples() {
        assert!((toroidal_distance([0.0, 0.0], [249.0, 0.0], 250.0) - 1.0).abs() < 1e-12);
        assert_eq!(toroidal_distance([3.0, 4.0], [3.0, 4.0], 250.0), 0.0);
        let d = toroidal_distance([0.0, 0.0], [125.0, 125.0], 250.0);
        assert!((d - 125.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((d - 176.78).abs() < 1e-2);
    }

    #[test]
    fn broadside_response_is_all_ones() {
        let a = array_response(0.0, PI / 2.0, dims(4, 2));
        for z in a.iter() {
            assert!((z - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn response_phase_hand_evaluation() {
        let a = array_response(PI / 6.0, PI / 2.0, dims(2, 1));
        assert_eq!(a[0], c(1.0, 0.0));
        assert!((a[1] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn response_entries_are_unit_modulus() {
        for (th, ph) in [(0.3, 1.1), (-2.9, 0.1), (3.1, 3.0)] {
            for z in array_response(th, ph, dims(4, 4)).iter() {
                assert!((z.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_path_covariance_is_rank_one() {
        let p = [Path { power: 1.0, azimuth: 0.4, zenith: 1.2 }];
        let cov = link_covariance(&p, dims(4, 2));
        let ev = hermitian_eigenvalues(&cov);
        assert!((ev[7] - 8.0).abs() < 1e-12);
        assert!(ev[..7].iter().all(|v| v.abs() < 1e-12));
        assert!((real_trace(&cov) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn zero_power_paths_give_zero_covariance() {
        let p = [Path { power: 0.0, azimuth: 0.4, zenith: 1.2 }];
        assert!(link_covariance(&p, dims(2, 2)).iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn orthogonal_paths_eigenvalues() {
        // a(0, π/2) = (1, 1) and a(π/2, π/2) = (1, -1) on a 2×1 array.
        let p = [
            Path { power: 1.0, azimuth: 0.0, zenith: PI / 2.0 },
            Path { power: 2.0, azimuth: PI / 2.0, zenith: PI / 2.0 },
        ];
        let ev = hermitian_eigenvalues(&link_covariance(&p, dims(2, 1)));
        assert!((ev[0] - 2.0).abs() < 1e-12);
        assert!((ev[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn generated_statistics_invariants() {
        let cfg = SystemConfig::default();
        let mut rng = child_stream(3, 0, 0, Stage::Topology);
        let topo = drop_topology(&cfg, &mut rng);
        let paths = sample_paths(&cfg, &topo, &mut rng);
        let stats = channel_covariance(&paths);
        for (link, cov) in paths.links.iter().zip(&stats.cov) {
            assert!((cfg.channel.min_paths..=cfg.channel.max_paths).contains(&link.len()));
            let power: f64 = link.iter().map(|p| p.power).sum();
            let tr = real_trace(cov);
            assert!((tr - 8.0 * power).abs() <= 1e-9 * tr);
            let scale = cov.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(hermitian_defect(cov) <= 1e-12 * scale);
            assert!(hermitian_eigenvalues(cov)[0] >= -1e-10 * scale);
            for p in link {
                assert!((-PI..=PI).contains(&p.azimuth));
                assert!((0.0..=PI).contains(&p.zenith));
            }
        }
    }

    #[test]
    fn total_path_power_follows_pathloss() {
        let cfg = SystemConfig { area_side: 10.0, ..Default::default() };
        let topo = Topology { side: 10.0, stations: vec![[0.0, 0.0]], users: vec![[1.0, 0.0]] };
        let cfg1 = SystemConfig { stations: 1, users: 1, ..cfg };
        let mut rng = child_stream(1, 0, 0, Stage::Paths);
        let paths = sample_paths(&cfg1, &topo, &mut rng);
        let power: f64 = paths.links[0].iter().map(|p| p.power).sum();
        assert!((power / cfg1.channel.pathloss_gain(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_path_configuration() {
        let mut cfg = SystemConfig::default();
        cfg.channel.min_paths = 1;
        cfg.channel.max_paths = 1;
        let mut rng = child_stream(2, 0, 0, Stage::Paths);
        let topo = drop_topology(&cfg, &mut rng);
        let paths = sample_paths(&cfg, &topo, &mut rng);
        assert!(paths.links.iter().all(|l| l.len() == 1));
    }

    #[test]
    fn draw_is_reconstructible_and_deterministic() {
        let cfg = SystemConfig::default();
        let mut rng = child_stream(5, 0, 0, Stage::Topology);
        let topo = drop_topology(&cfg, &mut rng);
        let paths = sample_paths(&cfg, &topo, &mut rng);
        let d1 = sample_channel(&paths, &mut child_stream(5, 0, 1, Stage::Channel));
        let d2 = sample_channel(&paths, &mut child_stream(5, 0, 1, Stage::Channel));
        assert_eq!(d1.h, d2.h);
        for ((link, g), h) in paths.links.iter().zip(&d1.gains).zip(&d1.h) {
            assert_eq!(&assemble_channel(link, g, cfg.array), h);
        }
    }

    #[test]
    fn zero_variance_paths_give_zero_channel() {
        let paths = PathSet {
            stations: 1,
            users: 1,
            array: dims(2, 2),
            links: vec![vec![Path { power: 0.0, azimuth: 0.1, zenith: 0.2 }]],
        };
        let d = sample_channel(&paths, &mut child_stream(0, 0, 0, Stage::Channel));
        assert!(d.h[0].iter().all(|z| z.norm() == 0.0));
    }
}
