//! Downlink precoding, SINR lower bound, transmit power and fronthaul rate.
//!
//! Powers are kept per link, `p[m][k]`; zero-forcing uses one power per user
//! shared by every station, which [`PrecoderState::shared`] replicates.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fronthaul::noise_for_rate;
use crate::linalg::{log2_det_identity_plus, pseudoinverse, real_trace, CMat, CVec, ZERO};
use crate::uplink::EffectiveChannel;

/// Largest condition number accepted for the zero-forcing pseudoinverse.
pub const ZF_CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precoder {
    Mrt,
    Zf,
}

impl Precoder {
    pub fn name(self) -> &'static str {
        match self {
            Precoder::Mrt => "mrt",
            Precoder::Zf => "zf",
        }
    }
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Precoder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrt" => Ok(Precoder::Mrt),
            "zf" => Ok(Precoder::Zf),
            other => Err(Error::Domain(format!("unknown precoder {other:?}"))),
        }
    }
}

/// Digital precoders, powers and compression-noise levels for all stations.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecoderState {
    /// `R × K` precoder per station.
    pub f: Vec<CMat>,
    /// `p[m][k]`.
    pub p: Vec<Vec<f64>>,
    /// Compression-noise standard deviation per station.
    pub sigma: Vec<f64>,
}

impl PrecoderState {
    /// State whose powers are shared across stations (zero-forcing).
    pub fn shared(f: Vec<CMat>, p: &[f64], sigma: Vec<f64>) -> Self {
        let p = vec![p.to_vec(); f.len()];
        Self { f, p, sigma }
    }
}

/// MRT: `f_{m,k} = ĝ_{m,k}`.
pub fn mrt_precoder(eff: &EffectiveChannel) -> Vec<CMat> {
    eff.g_hat
        .iter()
        .map(|gs| {
            let r = gs.first().map_or(0, |g| g.len());
            CMat::from_fn(r, gs.len(), |i, k| gs[k][i])
        })
        .collect()
}

/// Stacked `K × MR` estimate whose row `k` is `[ĝ_{1,k}ᴴ ⋯ ĝ_{M,k}ᴴ]`.
pub fn stacked_estimate(eff: &EffectiveChannel) -> CMat {
    let (m_count, k_count, r) = (eff.stations(), eff.users(), eff.rf_chains());
    CMat::from_fn(k_count, m_count * r, |k, col| eff.g_hat[col / r][k][col % r].conj())
}

/// Zero-forcing: the stacked precoder is the pseudoinverse of the stacked
/// estimate, so `Σ_m ĝ_{m,k}ᴴ f_{m,i} = δ[k-i]`.
pub fn zf_precoder(eff: &EffectiveChannel) -> Result<Vec<CMat>> {
    let (m_count, k_count, r) = (eff.stations(), eff.users(), eff.rf_chains());
    if k_count > m_count * r {
        return Err(Error::Domain(format!("zero-forcing needs K <= M*R, got K = {k_count}, M*R = {}", m_count * r)));
    }
    let g = stacked_estimate(eff);
    let (pinv, cond) = pseudoinverse(&g, 1e-12);
    if !(cond <= ZF_CONDITION_LIMIT) {
        return Err(Error::RankDeficient { condition: cond });
    }
    Ok((0..m_count).map(|m| pinv.rows(m * r, r).into_owned()).collect())
}

/// Per-user SINR with its four impairment terms.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrReport {
    pub sinr: Vec<f64>,
    pub rate: Vec<f64>,
    /// Coherent signal.
    pub t0: Vec<f64>,
    /// Beamforming uncertainty from the estimation error.
    pub t1: Vec<f64>,
    /// Inter-user interference.
    pub t2: Vec<f64>,
    /// Quantization and compression noise.
    pub t3: Vec<f64>,
}

impl SinrReport {
    fn assemble(t0: Vec<f64>, t1: Vec<f64>, t2: Vec<f64>, t3: Vec<f64>, sigma2_d: f64) -> Self {
        let sinr: Vec<f64> = (0..t0.len()).map(|k| t0[k] / (t1[k] + t2[k] + t3[k] + sigma2_d)).collect();
        let rate = sinr.iter().map(|s| s.ln_1p() / std::f64::consts::LN_2).collect();
        Self { sinr, rate, t0, t1, t2, t3 }
    }

    pub fn min_sinr(&self) -> f64 {
        self.sinr.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_rate(&self) -> f64 {
        self.rate.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `F diag(p) Fᴴ`.
pub fn precoded_covariance(f: &CMat, p: &[f64]) -> CMat {
    let mut scaled = f.clone();
    for (k, &pk) in p.iter().enumerate() {
        scaled.column_mut(k).scale_mut(pk);
    }
    scaled * f.adjoint()
}

/// Quantization and compression noise seen by user `k` from station `m`:
/// `(1-ρ) tr((ĝĝᴴ + C_g̃)(ρ diag(F P Fᴴ) + σ² I))`.
fn distortion_term(g: &CVec, c_gt: &CMat, fpf: &CMat, sigma: f64, rho: f64) -> f64 {
    let r = g.len();
    (0..r)
        .map(|i| {
            let gram = g[i].norm_sqr() + c_gt[(i, i)].re;
            gram * (rho * fpf[(i, i)].re + sigma * sigma)
        })
        .sum::<f64>()
        * (1.0 - rho)
}

fn quad(c: &CMat, v: &CVec) -> f64 {
    (v.adjoint() * c * v)[(0, 0)].re
}

/// Generic SINR evaluation for arbitrary precoders and per-link powers.
pub fn sinr_per_user(state: &PrecoderState, eff: &EffectiveChannel, rho: f64, sigma2_d: f64) -> SinrReport {
    let (m_count, k_count) = (eff.stations(), eff.users());
    let a = 1.0 - rho;
    let fpf: Vec<CMat> = (0..m_count).map(|m| precoded_covariance(&state.f[m], &state.p[m])).collect();
    let mut t0 = vec![0.0; k_count];
    let mut t1 = vec![0.0; k_count];
    let mut t2 = vec![0.0; k_count];
    let mut t3 = vec![0.0; k_count];
    for k in 0..k_count {
        for i in 0..k_count {
            let mut coherent = ZERO;
            let mut spread = 0.0;
            for m in 0..m_count {
                let f = state.f[m].column(i).into_owned();
                let p = state.p[m][i];
                coherent += eff.g_hat[m][k].dotc(&f) * p.sqrt();
                spread += quad(&eff.c_gtilde[m][k], &f) * p;
            }
            if i == k {
                t0[k] = a * a * coherent.norm_sqr();
                t1[k] = a * a * spread;
            } else {
                t2[k] += a * a * (coherent.norm_sqr() + spread);
            }
        }
        t3[k] = (0..m_count)
            .map(|m| distortion_term(&eff.g_hat[m][k], &eff.c_gtilde[m][k], &fpf[m], state.sigma[m], rho))
            .sum();
    }
    SinrReport::assemble(t0, t1, t2, t3, sigma2_d)
}

/// Zero-forcing fast path: the interference condition collapses the
/// coherent terms to `(1-ρ)² p_k` and removes the ĝ part of interference.
pub fn sinr_zf(f: &[CMat], p: &[f64], sigma: &[f64], eff: &EffectiveChannel, rho: f64, sigma2_d: f64) -> SinrReport {
    let (m_count, k_count) = (eff.stations(), eff.users());
    let a = 1.0 - rho;
    let fpf: Vec<CMat> = (0..m_count).map(|m| precoded_covariance(&f[m], p)).collect();
    let mut t1 = vec![0.0; k_count];
    let mut t2 = vec![0.0; k_count];
    let mut t3 = vec![0.0; k_count];
    let t0: Vec<f64> = p.iter().map(|pk| a * a * pk).collect();
    for k in 0..k_count {
        for m in 0..m_count {
            let c = &eff.c_gtilde[m][k];
            for i in 0..k_count {
                let v = a * a * quad(c, &f[m].column(i).into_owned()) * p[i];
                if i == k {
                    t1[k] += v;
                } else {
                    t2[k] += v;
                }
            }
            t3[k] += distortion_term(&eff.g_hat[m][k], c, &fpf[m], sigma[m], rho);
        }
    }
    SinrReport::assemble(t0, t1, t2, t3, sigma2_d)
}

/// Expected transmit power of one station:
/// `(1-ρ)² tr(W Q Wᴴ) + ρ(1-ρ) tr(W diag(Q) Wᴴ) + (1-ρ) tr(WWᴴ) σ²` with
/// `Q = F diag(p) Fᴴ`.
pub fn transmit_power(f: &CMat, p: &[f64], sigma: f64, w: &CMat, rho: f64) -> f64 {
    let q = precoded_covariance(f, p);
    let a = 1.0 - rho;
    let full = real_trace(&(w * &q * w.adjoint()));
    // tr(W diag(Q) Wᴴ) = Σ_r Q[r,r] ‖w_r‖².
    let diag: f64 = (0..q.nrows()).map(|r| q[(r, r)].re * w.column(r).norm_squared()).sum();
    a * a * full + rho * a * diag + a * w.norm_squared() * sigma * sigma
}

/// `log2 det(I + F diag(p) Fᴴ / σ²)`; infinite when `σ = 0` and the signal is
/// nonzero.
pub fn fronthaul_rate(f: &CMat, p: &[f64], sigma: f64) -> f64 {
    log2_det_identity_plus(&precoded_covariance(f, p), sigma * sigma)
}

/// Compression-noise level meeting the downlink fronthaul capacity with
/// equality; zero for an infinite capacity or a silent station.
pub fn solve_sigma_d(f: &CMat, p: &[f64], capacity: f64) -> Result<f64> {
    if capacity.is_infinite() {
        return Ok(0.0);
    }
    Ok(noise_for_rate(&precoded_covariance(f, p), capacity)?.sqrt())
}
