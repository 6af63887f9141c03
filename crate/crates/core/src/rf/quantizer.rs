//! MMSE scalar quantization of Gaussian signals and its additive-noise model.
//!
//! The Lloyd-Max codebook is computed as the fixed point of the Lloyd
//! iteration on the standard normal density. Starting from the companding
//! approximation (point density ∝ φ^{1/3}), thresholds are refined by Newton's
//! method on the midpoint condition, whose Jacobian is tridiagonal, and the
//! result is confirmed with plain Lloyd steps.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::config::Resolution;
use crate::error::{Error, Result};
use crate::linalg::{diag_part, CMat, CVec, C64};

pub const MAX_CODEBOOK_BITS: u32 = 12;
const MAX_ITERATIONS: usize = 10_000;
const POINT_TOLERANCE: f64 = 1e-12;
/// Resolutions at or above this use the high-resolution approximation.
pub const ASYMPTOTIC_FROM_BITS: u32 = 6;

/// Scalar MMSE quantizer for a unit-variance Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    pub bits: u32,
    /// Reconstruction points, ascending (`2^B` of them).
    pub points: Vec<f64>,
    /// Decision thresholds, ascending (`2^B - 1` of them).
    pub thresholds: Vec<f64>,
    /// Normalized mean squared error of the codebook.
    pub mse: f64,
    pub iterations: usize,
}

impl Codebook {
    /// Index of the cell containing `x`.
    pub fn cell(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t < x)
    }

    pub fn quantize(&self, x: f64) -> f64 {
        self.points[self.cell(x)]
    }
}

fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }
}

/// Upper tail `P(X > x)`.
fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `P(a < X < b)` evaluated on whichever tail keeps precision.
fn cell_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(b) - upper_tail(-a)
    }
}

fn centroid(a: f64, b: f64) -> f64 {
    (pdf(a) - pdf(b)) / cell_mass(a, b)
}

fn edges(thresholds: &[f64], i: usize) -> (f64, f64) {
    let a = if i == 0 { f64::NEG_INFINITY } else { thresholds[i - 1] };
    let b = thresholds.get(i).copied().unwrap_or(f64::INFINITY);
    (a, b)
}

fn centroids(thresholds: &[f64]) -> Vec<f64> {
    (0..=thresholds.len())
        .map(|i| {
            let (a, b) = edges(thresholds, i);
            centroid(a, b)
        })
        .collect()
}

fn midpoint_residual(thresholds: &[f64], points: &[f64]) -> Vec<f64> {
    thresholds.iter().enumerate().map(|(i, &t)| t - 0.5 * (points[i] + points[i + 1])).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves a tridiagonal system in place (Thomas algorithm).
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / den;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

fn newton_step(thresholds: &[f64], points: &[f64]) -> Vec<f64> {
    let n = thresholds.len();
    // d c_i / d(lower edge) and d c_i / d(upper edge).
    let mut dlo = vec![0.0; n + 1];
    let mut dhi = vec![0.0; n + 1];
    for i in 0..=n {
        let (a, b) = edges(thresholds, i);
        let mass = cell_mass(a, b);
        if a.is_finite() {
            dlo[i] = pdf(a) * (points[i] - a) / mass;
        }
        if b.is_finite() {
            dhi[i] = pdf(b) * (b - points[i]) / mass;
        }
    }
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        diag[i] = 1.0 - 0.5 * (dhi[i] + dlo[i + 1]);
        if i > 0 {
            lower[i] = -0.5 * dlo[i];
        }
        if i + 1 < n {
            upper[i] = -0.5 * dhi[i + 1];
        }
    }
    let residual = midpoint_residual(thresholds, points);
    solve_tridiagonal(&lower, &diag, &upper, &residual)
}

fn compute_codebook(bits: u32) -> Result<Codebook> {
    let n = 1usize << bits;
    let normal = Normal::standard();
    let mut points: Vec<f64> =
        (0..n).map(|i| 3f64.sqrt() * normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
    let mut thresholds: Vec<f64> = points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut iterations = 0;

    loop {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NoConvergence { bits });
        }
        let fresh = centroids(&thresholds);
        let movement = fresh.iter().zip(&points).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        points = fresh;
        if movement < POINT_TOLERANCE {
            break;
        }
        let residual = max_abs(&midpoint_residual(&thresholds, &points));
        let step = newton_step(&thresholds, &points);
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let trial: Vec<f64> = thresholds.iter().zip(&step).map(|(t, s)| t - lambda * s).collect();
            let ordered = trial.windows(2).all(|w| w[0] < w[1]);
            if ordered {
                let trial_points = centroids(&trial);
                if max_abs(&midpoint_residual(&trial, &trial_points)) < residual {
                    thresholds = trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Plain Lloyd update.
            thresholds = points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
    }

    // Enforce exact antisymmetry of the symmetric fixed point.
    let sym: Vec<f64> = (0..n).map(|i| 0.5 * (points[i] - points[n - 1 - i])).collect();
    let thresholds: Vec<f64> = sym.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut tsym = thresholds.clone();
    for i in 0..tsym.len() {
        tsym[i] = 0.5 * (thresholds[i] - thresholds[tsym.len() - 1 - i]);
    }
    let energy: f64 = (0..n)
        .map(|i| {
            let (a, b) = edges(&tsym, i);
            cell_mass(a, b) * sym[i] * sym[i]
        })
        .sum();
    Ok(Codebook { bits, points: sym, thresholds: tsym, mse: 1.0 - energy, iterations })
}

static CODEBOOKS: [OnceLock<Codebook>; MAX_CODEBOOK_BITS as usize + 1] =
    [const { OnceLock::new() }; MAX_CODEBOOK_BITS as usize + 1];

/// Lloyd-Max codebook for the standard normal, `1 <= bits <= 12`. Results
/// are memoized.
pub fn lloyd_max_codebook(bits: u32) -> Result<Codebook> {
    if bits == 0 || bits > MAX_CODEBOOK_BITS {
        return Err(Error::Domain(format!("codebook resolution must lie in 1..={MAX_CODEBOOK_BITS}, got {bits}")));
    }
    let slot = &CODEBOOKS[bits as usize];
    if let Some(cb) = slot.get() {
        return Ok(cb.clone());
    }
    let cb = compute_codebook(bits)?;
    Ok(slot.get_or_init(|| cb).clone())
}

/// High-resolution approximation `(π√3/2)·2^{-2B}`.
pub fn asymptotic_distortion(bits: u32) -> f64 {
    PI * 3f64.sqrt() / 2.0 * 2f64.powi(-2 * bits as i32)
}

/// Distortion factor ρ of a `B`-bit MMSE quantizer: exact Lloyd-Max value for
/// `B <= 5`, the high-resolution formula from 6 bits up, 0 when unquantized.
pub fn distortion_factor(bits: Resolution) -> Result<f64> {
    match bits {
        Resolution::Infinite => Ok(0.0),
        Resolution::Bits(0) => Err(Error::Domain("resolution must be at least 1 bit".into())),
        Resolution::Bits(b) if b < ASYMPTOTIC_FROM_BITS => Ok(lloyd_max_codebook(b)?.mse),
        Resolution::Bits(b) => Ok(asymptotic_distortion(b)),
    }
}

/// A converter: resolution, distortion factor and, for finite resolutions up
/// to 12 bits, the reconstruction codebook.
#[derive(Clone, Debug)]
pub struct QuantizerModel {
    pub bits: Resolution,
    pub rho: f64,
    pub codebook: Option<Codebook>,
}

impl QuantizerModel {
    pub fn new(bits: Resolution) -> Result<Self> {
        let rho = distortion_factor(bits)?;
        let codebook = match bits {
            Resolution::Bits(b) if b <= MAX_CODEBOOK_BITS => Some(lloyd_max_codebook(b)?),
            _ => None,
        };
        Ok(Self { bits, rho, codebook })
    }

    /// `ρ(1 - ρ)`, the AQNM noise scale.
    pub fn noise_scale(&self) -> f64 {
        self.rho * (1.0 - self.rho)
    }
}

/// Quantizes real and imaginary parts independently. `scale[i]` is the
/// standard deviation of complex entry `i`; each real dimension is matched to
/// the unit-variance codebook by `scale[i] / √2`.
pub fn quantize_signal(x: &CVec, model: &QuantizerModel, scale: &[f64]) -> Result<CVec> {
    let cb = model
        .codebook
        .as_ref()
        .ok_or_else(|| Error::Domain(format!("no codebook for resolution {}", model.bits)))?;
    if scale.len() != x.len() {
        return Err(Error::Domain("scale length must match the signal length".into()));
    }
    Ok(CVec::from_fn(x.len(), |i, _| {
        let s = scale[i] * FRAC_1_SQRT_2;
        C64::new(s * cb.quantize(x[i].re / s), s * cb.quantize(x[i].im / s))
    }))
}

/// AQNM quantization-noise covariance `ρ(1 - ρ)·diag(C)`.
pub fn aqnm_noise_cov(input: &CMat, rho: f64) -> CMat {
    diag_part(input).scale(rho * (1.0 - rho))
}
