//! Derived quantities checked against values computed independently of the
//! code paths that produce them.

use std::f64::consts::PI;

use rand::Rng;

use cellfree::config::{dbm_to_watts, thermal_noise, UpaDims};
use cellfree::energy::{component_powers, PowerParams};
use cellfree::harness::DropState;
use cellfree::linalg::{hermitian_eigenvalues, log2_det_identity_plus, CMat};
use cellfree::netgen::{array_response, sample_channel};
use cellfree::rf::quantizer::asymptotic_distortion;
use cellfree::rf::{distortion_factor, lloyd_max_codebook};
use cellfree::rng::{child_stream, complex_gaussian, Stage};
use cellfree::{Resolution, SystemConfig};

/// Mean-square error of the optimal B-bit quantizer of a unit Gaussian, from
/// the classical tables (four significant digits). The often quoted 5-bit
/// entry 0.002499 is low; a fully converged Lloyd iteration in extended
/// precision gives 0.0025047, which is used here.
const MAX_TABLE: [(u32, f64); 5] = [(1, 0.3634), (2, 0.1175), (3, 0.03454), (4, 0.009497), (5, 0.0025047)];

#[test]
fn lloyd_max_distortion_matches_published_table() {
    for (bits, mse) in MAX_TABLE {
        let rho = distortion_factor(Resolution::Bits(bits)).unwrap();
        assert!((rho - mse).abs() <= 5e-4 * mse, "B={bits}: {rho} vs {mse}");
    }
    assert!((distortion_factor(Resolution::Bits(1)).unwrap() - (1.0 - 2.0 / PI)).abs() < 1e-12);
}

#[test]
fn one_bit_codebook_is_the_half_normal_mean() {
    let cb = lloyd_max_codebook(1).unwrap();
    let level = (2.0 / PI).sqrt();
    assert_eq!(cb.points.len(), 2);
    assert!((cb.points[1] - level).abs() < 1e-10 && (cb.points[0] + level).abs() < 1e-10);
}

#[test]
fn high_resolution_formula_from_six_bits() {
    for bits in 6..=8 {
        let expected = PI * 3f64.sqrt() / 2.0 / 4f64.powi(bits as i32);
        assert_eq!(distortion_factor(Resolution::Bits(bits)).unwrap(), asymptotic_distortion(bits));
        assert!((asymptotic_distortion(bits) - expected).abs() <= 1e-15);
    }
    // The exact optimum sits below the high-resolution curve near 5 bits.
    let exact5 = lloyd_max_codebook(5).unwrap().mse;
    assert!(exact5 < asymptotic_distortion(5) && exact5 > 0.9 * asymptotic_distortion(5));
}

#[test]
fn converter_power_from_figure_of_merit() {
    let params = PowerParams::default();
    for bits in 1..=8u32 {
        let (adc, rf) = component_powers(&params, Resolution::Bits(bits)).unwrap();
        let expected = 1432.1e-15 * 1e9 * f64::from(1u32 << bits);
        assert!((adc - expected).abs() <= 1e-15 * expected.max(1.0), "B={bits}");
        assert!((rf - (2.0 * 14e-3 + 2.0 * 0.3e-3 + 3e-3)).abs() < 1e-15);
    }
}

#[test]
fn link_budget_units() {
    assert!((dbm_to_watts(33.0) - 1.995_262_314_968_88).abs() < 1e-12);
    assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
    // -174 dBm/Hz + 10 log10(80 MHz) + 10 dB = -84.97 dBm.
    let dbm = -174.0 + 10.0 * 80e6f64.log10() + 10.0;
    assert!((thermal_noise(80e6, 10.0) - dbm_to_watts(dbm)).abs() <= 1e-12 * dbm_to_watts(dbm));
    let cfg = SystemConfig::default();
    assert!((cfg.downlink_noise / thermal_noise(80e6, 10.0) - 1.0).abs() < 1e-12);
}

#[test]
fn steering_vector_has_unit_modulus_entries() {
    let dims = UpaDims { rows: 4, cols: 2 };
    let a = array_response(0.7, 1.1, dims);
    assert_eq!(a.len(), 8);
    assert!(a.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
    // Broadside along both axes gives identical phases.
    let b = array_response(0.0, PI / 2.0, dims);
    assert!(b.iter().all(|z| (z.re - 1.0).abs() < 1e-12));
}

#[test]
fn log_det_matches_spectrum() {
    let mut rng = child_stream(3, 0, 0, Stage::Validation);
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let r = rng.random_range(1..=n);
        let b = CMat::from_fn(n, r, |_, _| complex_gaussian(&mut rng, 1.0));
        let a = &b * b.adjoint();
        let s2 = 10f64.powf(rng.random_range(-3.0..3.0));
        let spectral: f64 = hermitian_eigenvalues(&a).iter().map(|l| (1.0 + l.max(0.0) / s2).log2()).sum();
        let direct = log2_det_identity_plus(&a, s2);
        assert!((direct - spectral).abs() <= 1e-9 * spectral.max(1.0), "{direct} vs {spectral}");
    }
}

/// The analytic error covariance against the empirical error of the
/// estimator on sampled channels.
#[test]
fn analytic_nmse_matches_monte_carlo() {
    let cfg = SystemConfig::default();
    let master = 11;
    let drop = DropState::new(&cfg, master, 0).unwrap();
    let uplink = drop.uplink(&cfg).unwrap();
    let analytic = uplink.nmse(&drop.stats).unwrap();
    let (mut err, mut energy) = (0.0, 0.0);
    let blocks = 600;
    for b in 0..blocks {
        let draw = sample_channel(&drop.paths, &mut child_stream(master, 0, b, Stage::Channel));
        let h_hat = uplink.estimate(&cfg, &drop.combiners, &draw, &mut child_stream(master, 0, b, Stage::UplinkNoise));
        for m in 0..cfg.stations {
            for k in 0..cfg.users {
                let h = draw.link(m, k);
                err += (h - &h_hat[m][k]).norm_squared();
                energy += h.norm_squared();
            }
        }
    }
    let empirical = err / energy;
    assert!((empirical / analytic - 1.0).abs() < 0.05, "empirical {empirical} vs analytic {analytic}");
}
