//! Max-min power control for zero-forcing precoding.
//!
//! With the precoders fixed by the interference condition, every SINR is a
//! ratio of functions linear in the shared power vector `P`. Fixing a level
//! `t`, the powers achieving `SINR_k = t` for all users solve a `K × K` linear
//! system; they are elementwise minimal among all powers reaching `t`, so `t`
//! is feasible exactly when that solution meets the station constraints.
//! Bisection on `t` alternates with re-solving the compression noise.

use nalgebra::{DMatrix, DVector};

use crate::bisect::{bisect, relative_change, FairnessResult, SolveStatus, Termination};
use crate::config::SystemConfig;
use crate::downlink::{fronthaul_rate, sinr_zf, solve_sigma_d, transmit_power, zf_precoder, PrecoderState};
use crate::error::Result;
use crate::linalg::CMat;
use crate::rf::distortion_factor;
use crate::uplink::EffectiveChannel;

/// Condition number above which the equality system counts as singular.
pub const SYSTEM_CONDITION_LIMIT: f64 = 1e12;
/// Slack on the power and capacity caps.
pub const CAP_SLACK: f64 = 1e-9;

/// `SINR_k(P) = gain·p_k / (Σ_i m[k,i] p_i + n[k])`.
#[derive(Clone, Debug)]
pub struct ZfSystem {
    pub m: DMatrix<f64>,
    pub n: DVector<f64>,
    pub gain: f64,
}

impl ZfSystem {
    pub fn sinr(&self, p: &[f64]) -> Vec<f64> {
        let pv = DVector::from_column_slice(p);
        let den = &self.m * &pv + &self.n;
        (0..p.len()).map(|k| self.gain * p[k] / den[k]).collect()
    }

    /// Powers meeting `SINR_k = t` for every user, if the system is
    /// well conditioned.
    pub fn equality_powers(&self, t: f64) -> Option<Vec<f64>> {
        let k = self.n.len();
        let a = DMatrix::identity(k, k) * self.gain - &self.m * t;
        let sv = a.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > 0.0) || smax / smin > SYSTEM_CONDITION_LIMIT {
            return None;
        }
        let p = a.lu().solve(&(&self.n * t))?;
        Some(p.iter().copied().collect())
    }
}

/// Diagonal of `ĝĝᴴ + C_g̃`.
fn gram_diagonal(eff: &EffectiveChannel, m: usize, k: usize) -> Vec<f64> {
    let g = &eff.g_hat[m][k];
    let c = &eff.c_gtilde[m][k];
    (0..g.len()).map(|r| g[r].norm_sqr() + c[(r, r)].re).collect()
}

pub fn assemble_linear_system(eff: &EffectiveChannel, f: &[CMat], sigma: &[f64], rho: f64, sigma2_d: f64) -> ZfSystem {
    let (m_count, k_count) = (eff.stations(), eff.users());
    let a = 1.0 - rho;
    let mut mm = DMatrix::zeros(k_count, k_count);
    let mut n = DVector::from_element(k_count, sigma2_d);
    for k in 0..k_count {
        for m in 0..m_count {
            let diag = gram_diagonal(eff, m, k);
            let c = &eff.c_gtilde[m][k];
            for i in 0..k_count {
                let fi = f[m].column(i);
                let spread = (fi.adjoint() * c * fi)[(0, 0)].re;
                let distortion: f64 = diag.iter().enumerate().map(|(r, d)| d * fi[r].norm_sqr()).sum();
                mm[(k, i)] += a * a * spread + a * rho * distortion;
            }
            n[k] += a * diag.iter().sum::<f64>() * sigma[m] * sigma[m];
        }
    }
    ZfSystem { m: mm, n, gain: a * a }
}

/// Station constraints of one power-control instance.
#[derive(Clone, Debug)]
pub struct StationCaps<'a> {
    pub f: &'a [CMat],
    pub w: &'a [CMat],
    pub sigma: &'a [f64],
    pub power: f64,
    pub capacity: f64,
    pub rho: f64,
}

impl StationCaps<'_> {
    pub fn admits(&self, p: &[f64]) -> bool {
        self.f.iter().enumerate().all(|(m, f)| {
            let pw = transmit_power(f, p, self.sigma[m], &self.w[m], self.rho);
            let power_ok = pw <= self.power * (1.0 + CAP_SLACK);
            let rate_ok = self.capacity.is_infinite() || fronthaul_rate(f, p, self.sigma[m]) <= self.capacity + CAP_SLACK;
            power_ok && rate_ok
        })
    }
}

/// Feasibility of level `t`: the equality powers, when nonnegative and within
/// every station cap.
pub fn zf_feasibility(t: f64, sys: &ZfSystem, caps: &StationCaps<'_>) -> Option<Vec<f64>> {
    let p = sys.equality_powers(t)?;
    let scale = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if p.iter().any(|&x| x < -1e-12 * scale) {
        return None;
    }
    let p: Vec<f64> = p.into_iter().map(|x| x.max(0.0)).collect();
    caps.admits(&p).then_some(p)
}

/// Largest level in `[t_min, t_max]` whose equality powers are admissible,
/// with those powers. `start` certifies `t_min` when given.
pub fn bisection_power_zf(
    sys: &ZfSystem,
    caps: &StationCaps<'_>,
    t_min: f64,
    start: Option<Vec<f64>>,
    t_max: f64,
    eps: f64,
) -> (f64, Option<Vec<f64>>) {
    let out = bisect(t_min, start, t_max, eps, |t| zf_feasibility(t, sys, caps));
    (out.t_lo, out.witness)
}

/// Interference-free upper bound on the min-SINR under the power caps.
pub fn waterline(e: &[Vec<f64>], f_const: &[f64], power: f64, rho: f64, sigma2_d: f64) -> f64 {
    e.iter()
        .zip(f_const)
        .map(|(em, &fm)| {
            let total: f64 = em.iter().sum();
            if total > 0.0 { (power - fm).max(0.0) * (1.0 - rho).powi(2) / (sigma2_d * total) } else { f64::INFINITY }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Power of one unit on link `(m, k)`: `(1-ρ)²‖W f‖² + ρ(1-ρ) Σ_r |f_r|² ‖w_r‖²`.
pub fn unit_power(w: &CMat, f: &CMat, k: usize, rho: f64) -> f64 {
    let fk = f.column(k);
    let full = (w * fk).norm_squared();
    let diag: f64 = (0..fk.len()).map(|r| fk[r].norm_sqr() * w.column(r).norm_squared()).sum();
    (1.0 - rho).powi(2) * full + rho * (1.0 - rho) * diag
}

/// Initial state: uniform powers `P_d / (2 K max e)` with their compression
/// noise, then lifted onto the power cap.
pub fn initial_sigma(f: &[CMat], w: &[CMat], cfg: &SystemConfig, rho: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = cfg.users;
    let emax = f
        .iter()
        .zip(w)
        .flat_map(|(fm, wm)| (0..k).map(move |i| unit_power(wm, fm, i, rho)))
        .fold(0.0f64, f64::max);
    let p0 = if emax > 0.0 { cfg.downlink_power / (2.0 * k as f64 * emax) } else { 0.0 };
    let mut p = vec![p0; k];
    let mut sigma = f.iter().map(|fm| solve_sigma_d(fm, &p, cfg.downlink_capacity)).collect::<Result<Vec<_>>>()?;
    scale_to_power_cap(f, w, &mut p, &mut sigma, cfg.downlink_power, rho);
    Ok((p, sigma))
}

/// Scales `(P, σ²)` jointly so the busiest station sits on the power cap.
/// Fronthaul rates are invariant under this map while every SINR grows with
/// the scale, so it never hurts when the factor is at least one.
pub fn scale_to_power_cap(f: &[CMat], w: &[CMat], p: &mut [f64], sigma: &mut [f64], power: f64, rho: f64) -> f64 {
    let peak = (0..f.len()).map(|m| transmit_power(&f[m], p, sigma[m], &w[m], rho)).fold(0.0f64, f64::max);
    if !(peak > 0.0) {
        return 1.0;
    }
    let kappa = power / peak;
    p.iter_mut().for_each(|x| *x *= kappa);
    sigma.iter_mut().for_each(|s| *s *= kappa.sqrt());
    kappa
}

/// Alternating optimization of shared powers and compression noise.
pub fn algorithm2(eff: &EffectiveChannel, w: &[CMat], cfg: &SystemConfig, termination: Termination) -> Result<FairnessResult> {
    let rho = distortion_factor(cfg.dac_bits)?;
    let f = zf_precoder(eff)?;
    let (p0, sigma0) = initial_sigma(&f, w, cfg, rho)?;
    algorithm2_from(eff, w, cfg, f, p0, sigma0, rho, termination)
}

#[allow(clippy::too_many_arguments)]
pub fn algorithm2_from(
    eff: &EffectiveChannel,
    w: &[CMat],
    cfg: &SystemConfig,
    f: Vec<CMat>,
    p0: Vec<f64>,
    sigma0: Vec<f64>,
    rho: f64,
    termination: Termination,
) -> Result<FairnessResult> {
    let sigma2_d = cfg.downlink_noise;
    let eval = |p: &[f64], sigma: &[f64]| sinr_zf(&f, p, sigma, eff, rho, sigma2_d).min_sinr();
    let mut p = p0;
    let mut sigma = sigma0;
    let initial_ok = StationCaps { f: &f, w, sigma: &sigma, power: cfg.downlink_power, capacity: cfg.downlink_capacity, rho }
        .admits(&p);
    let mut t_cur = if initial_ok { eval(&p, &sigma) } else { 0.0 };
    let mut feasible_state = initial_ok;
    let mut trace = Vec::new();
    let mut status = SolveStatus::RoundLimit;
    let e: Vec<Vec<f64>> = f.iter().zip(w).map(|(fm, wm)| (0..cfg.users).map(|k| unit_power(wm, fm, k, rho)).collect()).collect();

    for _ in 0..termination.max_rounds {
        let sys = assemble_linear_system(eff, &f, &sigma, rho, sigma2_d);
        let caps = StationCaps { f: &f, w, sigma: &sigma, power: cfg.downlink_power, capacity: cfg.downlink_capacity, rho };
        let f_const: Vec<f64> = (0..f.len()).map(|m| transmit_power(&f[m], &vec![0.0; cfg.users], sigma[m], &w[m], rho)).collect();
        let bound = waterline(&e, &f_const, cfg.downlink_power, rho, sigma2_d);
        let t_max = if bound.is_finite() { 2.0 * bound.max(t_cur) } else { 2.0 * t_cur.max(1.0) };
        let eps = 1e-4 * (1.0 + t_max);
        let start = if feasible_state { Some(p.clone()) } else { None };
        let (_, witness) = bisection_power_zf(&sys, &caps, t_cur, start, t_max, eps);
        let Some(p_new) = witness else {
            break;
        };
        let mut p_new = p_new;
        let mut sigma_new = f
            .iter()
            .map(|fm| solve_sigma_d(fm, &p_new, cfg.downlink_capacity))
            .collect::<Result<Vec<_>>>()?;
        // With every fronthaul link at equality, the power step alone cannot
        // grow; the rate-invariant lift moves the state onto the power cap.
        scale_to_power_cap(&f, w, &mut p_new, &mut sigma_new, cfg.downlink_power, rho);
        let t_new = eval(&p_new, &sigma_new);
        p = p_new;
        sigma = sigma_new;
        let change = relative_change(t_new, t_cur);
        t_cur = t_new;
        feasible_state = true;
        trace.push(t_new);
        if change < termination.rel_tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    if !feasible_state {
        status = SolveStatus::Infeasible;
    }
    let rounds = trace.len();
    let t_star = if feasible_state { eval(&p, &sigma) } else { 0.0 };
    Ok(FairnessResult { t_star, state: PrecoderState::shared(f, &p, sigma), trace, status, rounds })
}
