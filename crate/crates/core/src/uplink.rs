//! Uplink training, fronthaul compression and LMMSE channel estimation.
//!
//! Each station observes `y = Ψ h + vec(Wᴴ N)` with `Ψ = X_u* ⊗ Wᴴ`, passes it
//! through `B`-bit converters (additive quantization noise model) and forwards
//! it over a fronthaul link modeled as Gaussian compression noise of variance
//! `σ²` sized so the link carries exactly `T·C_u` bits per block.

use rand::Rng;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::fronthaul::noise_for_rate;
use crate::linalg::{diag_part, hermitian_part, kron, real_trace, CMat, CVec, C64};
use crate::netgen::{ChannelDraw, ChannelStats};
use crate::rf::{distortion_factor, CombinerSet};
use crate::rng::complex_gaussian;

/// `T × K` training matrix: the first `K` columns of the size-`T` DFT matrix
/// scaled by `√P_u`.
pub fn training_matrix(cfg: &SystemConfig) -> Result<CMat> {
    let (t, k) = (cfg.training_length, cfg.users);
    if t < k {
        return Err(Error::Config { field: "training_length", reason: format!("T = {t} is shorter than K = {k}") });
    }
    Ok(dft_training(t, k, cfg.uplink_power))
}

pub fn dft_training(t: usize, k: usize, power: f64) -> CMat {
    let amp = power.sqrt();
    CMat::from_fn(t, k, |i, j| {
        // Reduce the exponent first so the phase is exact for small T.
        let phase = -2.0 * std::f64::consts::PI * ((i * j) % t) as f64 / t as f64;
        C64::from_polar(amp, phase)
    })
}

/// Training matrix together with the per-station observation operators.
#[derive(Clone, Debug)]
pub struct TrainingDesign {
    pub x_u: CMat,
    pub psi: Vec<CMat>,
}

impl TrainingDesign {
    pub fn new(cfg: &SystemConfig, combiners: &CombinerSet) -> Result<Self> {
        let x_u = training_matrix(cfg)?;
        let psi = combiners.w.iter().map(|w| observation_operator(&x_u, w)).collect();
        Ok(Self { x_u, psi })
    }
}

/// `Ψ = X_u* ⊗ Wᴴ`, of size `RT × NK`.
pub fn observation_operator(x_u: &CMat, w: &CMat) -> CMat {
    kron(&x_u.conjugate(), &w.adjoint())
}

/// Second-order statistics of one station's quantized observation.
#[derive(Clone, Debug)]
pub struct Observation {
    pub psi: CMat,
    /// Unquantized observation covariance `Ψ C_h Ψᴴ + σ_u² I_T ⊗ WᴴW`.
    pub input: CMat,
    /// Quantized observation covariance `C_y`.
    pub c_y: CMat,
}

/// Builds `C_y = (1-ρ)²A + ρ(1-ρ)·diag(A)` with `A` the unquantized covariance.
/// `c_h` holds the per-user `N × N` covariance blocks of this station.
pub fn observation_model(x_u: &CMat, w: &CMat, c_h: &[CMat], sigma2_u: f64, rho: f64) -> Observation {
    let psi = observation_operator(x_u, w);
    let n = w.nrows();
    let rt = psi.nrows();
    let mut input = CMat::zeros(rt, rt);
    for (k, ck) in c_h.iter().enumerate() {
        let psi_k = psi.columns(k * n, n);
        input += &psi_k * ck * psi_k.adjoint();
    }
    let t = x_u.nrows();
    input += kron(&CMat::identity(t, t), &(w.adjoint() * w)).scale(sigma2_u);
    let input = hermitian_part(&input);
    let c_y = input.scale((1.0 - rho) * (1.0 - rho)) + diag_part(&input).scale(rho * (1.0 - rho));
    Observation { psi, input, c_y }
}

/// Compression-noise standard deviation meeting `log2 det(I + C_y/σ²) = T·C_u`.
pub fn solve_sigma_u(c_y: &CMat, training_length: usize, capacity: f64) -> Result<f64> {
    if capacity.is_infinite() {
        return Ok(0.0);
    }
    Ok(noise_for_rate(c_y, training_length as f64 * capacity)?.sqrt())
}

/// LMMSE estimator of one station: per-user filters and error statistics.
#[derive(Clone, Debug)]
pub struct LmmseFilter {
    /// Per-user `N × RT` filter, `ĥ_k = G_k ŷ`.
    pub gain: Vec<CMat>,
    pub c_hhat: Vec<CMat>,
    pub c_htilde: Vec<CMat>,
}

impl LmmseFilter {
    pub fn apply(&self, y_hat: &CVec) -> Vec<CVec> {
        self.gain.iter().map(|g| g * y_hat).collect()
    }
}

pub fn lmmse_filter(obs: &Observation, c_h: &[CMat], sigma: f64, rho: f64, station: usize) -> Result<LmmseFilter> {
    let rt = obs.c_y.nrows();
    let c_yhat = hermitian_part(&(&obs.c_y + CMat::identity(rt, rt).scale(sigma * sigma)));
    let chol = c_yhat.cholesky().ok_or(Error::SingularCovariance { station })?;
    let n = if c_h.is_empty() { 0 } else { c_h[0].nrows() };
    let mut gain = Vec::with_capacity(c_h.len());
    let mut c_hhat = Vec::with_capacity(c_h.len());
    let mut c_htilde = Vec::with_capacity(c_h.len());
    for (k, ck) in c_h.iter().enumerate() {
        // Cross-covariance C_{ŷ h_k} = (1-ρ) Ψ_k C_k.
        let cross = (obs.psi.columns(k * n, n) * ck).scale(1.0 - rho);
        let g = chol.solve(&cross).adjoint();
        let est = hermitian_part(&(&g * &cross));
        c_htilde.push(hermitian_part(&(ck - &est)));
        c_hhat.push(est);
        gain.push(g);
    }
    Ok(LmmseFilter { gain, c_hhat, c_htilde })
}

/// Estimates from a received compressed observation.
pub fn lmmse_estimate(y_hat: &CVec, obs: &Observation, c_h: &[CMat], sigma: f64, rho: f64) -> Result<(Vec<CVec>, LmmseFilter)> {
    let filter = lmmse_filter(obs, c_h, sigma, rho, 0)?;
    Ok((filter.apply(y_hat), filter))
}

/// Draws a compressed observation with Gaussianized quantization noise:
/// `ŷ = (1-ρ)(Ψ h + vec(Wᴴ N)) + q + e`.
pub fn sample_observation<R: Rng + ?Sized>(
    obs: &Observation,
    w: &CMat,
    h: &[&CVec],
    sigma2_u: f64,
    rho: f64,
    sigma: f64,
    rng: &mut R,
) -> CVec {
    let n = w.nrows();
    let r = w.ncols();
    let rt = obs.psi.nrows();
    let t = rt / r;
    let mut y = CVec::zeros(rt);
    for (k, hk) in h.iter().enumerate() {
        y += obs.psi.columns(k * n, n) * *hk;
    }
    for ti in 0..t {
        let noise = CVec::from_fn(n, |_, _| complex_gaussian(rng, sigma2_u));
        let projected = w.adjoint() * noise;
        let mut rows = y.rows_mut(ti * r, r);
        rows += &projected;
    }
    let scale = rho * (1.0 - rho);
    CVec::from_fn(rt, |i, _| {
        (1.0 - rho) * y[i] + complex_gaussian(rng, scale * obs.input[(i, i)].re) + complex_gaussian(rng, sigma * sigma)
    })
}

/// Per-drop uplink statistics for every station.
#[derive(Clone, Debug)]
pub struct UplinkStatistics {
    pub rho: f64,
    pub training: TrainingDesign,
    pub observations: Vec<Observation>,
    pub sigma: Vec<f64>,
    pub filters: Vec<LmmseFilter>,
}

impl UplinkStatistics {
    pub fn new(cfg: &SystemConfig, stats: &ChannelStats, combiners: &CombinerSet) -> Result<Self> {
        let rho = distortion_factor(cfg.adc_bits)?;
        let training = TrainingDesign::new(cfg, combiners)?;
        let mut observations = Vec::with_capacity(cfg.stations);
        let mut sigma = Vec::with_capacity(cfg.stations);
        let mut filters = Vec::with_capacity(cfg.stations);
        for (m, w) in combiners.w.iter().enumerate() {
            let blocks = stats.station_blocks(m);
            let obs = observation_model(&training.x_u, w, blocks, cfg.uplink_noise, rho);
            let s = solve_sigma_u(&obs.c_y, cfg.training_length, cfg.uplink_capacity)?;
            filters.push(lmmse_filter(&obs, blocks, s, rho, m)?);
            observations.push(obs);
            sigma.push(s);
        }
        Ok(Self { rho, training, observations, sigma, filters })
    }

    /// Channel estimates `ĥ[m][k]` for one coherence-block realization.
    pub fn estimate<R: Rng + ?Sized>(
        &self,
        cfg: &SystemConfig,
        combiners: &CombinerSet,
        draw: &ChannelDraw,
        rng: &mut R,
    ) -> Vec<Vec<CVec>> {
        (0..self.observations.len())
            .map(|m| {
                let h: Vec<&CVec> = (0..draw.users).map(|k| draw.link(m, k)).collect();
                let y_hat = sample_observation(
                    &self.observations[m],
                    &combiners.w[m],
                    &h,
                    cfg.uplink_noise,
                    self.rho,
                    self.sigma[m],
                    rng,
                );
                self.filters[m].apply(&y_hat)
            })
            .collect()
    }

    pub fn nmse(&self, stats: &ChannelStats) -> Result<f64> {
        nmse(stats, &self.filters)
    }
}

/// `Σ tr(C_h̃) / Σ tr(C_h)` over all stations and users.
pub fn nmse(stats: &ChannelStats, filters: &[LmmseFilter]) -> Result<f64> {
    let total: f64 = stats.cov.iter().map(real_trace).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let err: f64 = filters.iter().flat_map(|f| f.c_htilde.iter()).map(real_trace).sum();
    Ok(err / total)
}

/// Estimates seen through the RF combiners, `ĝ = Wᴴ ĥ` and `C_g̃ = Wᴴ C_h̃ W`,
/// indexed `[m][k]`.
#[derive(Clone, Debug)]
pub struct EffectiveChannel {
    pub g_hat: Vec<Vec<CVec>>,
    pub c_gtilde: Vec<Vec<CMat>>,
}

impl EffectiveChannel {
    pub fn stations(&self) -> usize {
        self.g_hat.len()
    }

    pub fn users(&self) -> usize {
        self.g_hat.first().map_or(0, Vec::len)
    }

    pub fn rf_chains(&self) -> usize {
        self.g_hat.first().and_then(|g| g.first()).map_or(0, |v| v.len())
    }

    /// Perfect channel knowledge: `ĝ = Wᴴ h` and no estimation error.
    pub fn perfect(draw: &ChannelDraw, combiners: &CombinerSet) -> Self {
        let m_count = combiners.w.len();
        let g_hat: Vec<Vec<CVec>> = (0..m_count)
            .map(|m| (0..draw.users).map(|k| combiners.w[m].adjoint() * draw.link(m, k)).collect())
            .collect();
        let r = combiners.w.first().map_or(0, |w| w.ncols());
        let c_gtilde = (0..m_count).map(|_| vec![CMat::zeros(r, r); draw.users]).collect();
        Self { g_hat, c_gtilde }
    }
}

pub fn effective_channel(h_hat: &[Vec<CVec>], filters: &[LmmseFilter], combiners: &CombinerSet) -> EffectiveChannel {
    let g_hat = h_hat
        .iter()
        .zip(&combiners.w)
        .map(|(hs, w)| hs.iter().map(|h| w.adjoint() * h).collect())
        .collect();
    let c_gtilde = filters
        .iter()
        .zip(&combiners.w)
        .map(|(f, w)| f.c_htilde.iter().map(|c| hermitian_part(&(w.adjoint() * c * w))).collect())
        .collect();
    EffectiveChannel { g_hat, c_gtilde }
}
