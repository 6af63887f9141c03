//! Max-min power control for MRT precoding.
//!
//! With `x_{m,k} = √p_{m,k}` the level set `min_k SINR_k ≥ t` is a
//! second-order cone, so each `t` is tested by a cone program and the largest
//! feasible `t` found by bisection. Rounds alternate that power step with
//! re-solving the compression noise and scaling back onto the power cap.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use crate::bisect::{bisect, relative_change, FairnessResult, SolveStatus, Termination};
use crate::config::SystemConfig;
use crate::downlink::{fronthaul_rate, mrt_precoder, sinr_per_user, solve_sigma_d, transmit_power, PrecoderState};
use crate::error::Result;
use crate::linalg::{CMat, C64};
use crate::maxmin_zf::unit_power;
use crate::rf::distortion_factor;
use crate::uplink::EffectiveChannel;

/// Phase-one slack at or below which a level counts as feasible.
pub const SLACK_TOLERANCE: f64 = 1e-7;

/// Coefficients of the MRT SINR and power expressions in `x = √p`.
///
/// `SINR_k = (Σ_m a[m][k] x_{m,k})² / (Σ_{m,i} c[m][i][k] x_{m,i}²
///   + Σ_{i≠k} |Σ_m b[m][i][k] x_{m,i}|² + d[k] + σ_d²)`, and station `m`
/// transmits `Σ_k e[m][k] x_{m,k}² + f[m]`.
#[derive(Clone, Debug)]
pub struct MrtCoefficients {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<Vec<C64>>>,
    pub c: Vec<Vec<Vec<f64>>>,
    pub d: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub f: Vec<f64>,
}

impl MrtCoefficients {
    pub fn stations(&self) -> usize {
        self.a.len()
    }

    pub fn users(&self) -> usize {
        self.d.len()
    }

    pub fn sinr(&self, x: &[Vec<f64>], sigma2_d: f64) -> Vec<f64> {
        let (mc, kc) = (self.stations(), self.users());
        (0..kc)
            .map(|k| {
                let signal: f64 = (0..mc).map(|m| self.a[m][k] * x[m][k]).sum();
                let mut den = self.d[k] + sigma2_d;
                for i in 0..kc {
                    for m in 0..mc {
                        den += self.c[m][i][k] * x[m][i] * x[m][i];
                    }
                    if i != k {
                        let s: C64 = (0..mc).map(|m| self.b[m][i][k] * x[m][i]).sum();
                        den += s.norm_sqr();
                    }
                }
                signal * signal / den
            })
            .collect()
    }

    pub fn station_power(&self, m: usize, x: &[f64]) -> f64 {
        self.e[m].iter().zip(x).map(|(e, x)| e * x * x).sum::<f64>() + self.f[m]
    }
}

pub fn mrt_coefficients(eff: &EffectiveChannel, sigma: &[f64], rho: f64, w: &[CMat]) -> MrtCoefficients {
    let (mc, kc) = (eff.stations(), eff.users());
    let s = 1.0 - rho;
    let mut a = vec![vec![0.0; kc]; mc];
    let mut b = vec![vec![vec![C64::new(0.0, 0.0); kc]; kc]; mc];
    let mut c = vec![vec![vec![0.0; kc]; kc]; mc];
    let mut d = vec![0.0; kc];
    let mut e = vec![vec![0.0; kc]; mc];
    let mut f = vec![0.0; mc];
    for m in 0..mc {
        let fm = mrt_precoder_station(eff, m);
        for k in 0..kc {
            let gk = &eff.g_hat[m][k];
            let ck = &eff.c_gtilde[m][k];
            let diag: Vec<f64> = (0..gk.len()).map(|r| gk[r].norm_sqr() + ck[(r, r)].re).collect();
            a[m][k] = s * gk.norm_squared();
            for i in 0..kc {
                let gi = &eff.g_hat[m][i];
                b[m][i][k] = gk.dotc(gi) * s;
                let spread = (gi.adjoint() * ck * gi)[(0, 0)].re;
                let distortion: f64 = diag.iter().zip(gi.iter()).map(|(d, g)| d * g.norm_sqr()).sum();
                c[m][i][k] = s * s * spread + rho * s * distortion;
            }
            d[k] += s * diag.iter().sum::<f64>() * sigma[m] * sigma[m];
            e[m][k] = unit_power(&w[m], &fm, k, rho);
        }
        f[m] = s * w[m].norm_squared() * sigma[m] * sigma[m];
    }
    MrtCoefficients { a, b, c, d, e, f }
}

fn mrt_precoder_station(eff: &EffectiveChannel, m: usize) -> CMat {
    let gs = &eff.g_hat[m];
    CMat::from_fn(gs[0].len(), gs.len(), |i, k| gs[k][i])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SocpStatus {
    Feasible,
    Infeasible,
    /// The solver stopped without an answer; treated as infeasible.
    Indeterminate,
}

/// Phase-one outcome for one level.
#[derive(Clone, Debug)]
pub struct SocpWitness {
    pub status: SocpStatus,
    /// `x[m][k] = √p_{m,k}`.
    pub x: Vec<Vec<f64>>,
    /// Interference magnitudes `y[i][k]`, zero on the diagonal.
    pub y: Vec<Vec<f64>>,
    /// Optimal phase-one slack in normalized units.
    pub slack: f64,
    pub iterations: u32,
}

impl SocpWitness {
    pub fn is_feasible(&self) -> bool {
        self.status == SocpStatus::Feasible
    }
}

/// Decides whether `min_k SINR_k ≥ t` is achievable under the power caps.
pub trait SocpOracle {
    fn feasibility(&self, t: f64, coef: &MrtCoefficients, sigma2_d: f64, power: f64) -> SocpWitness;
}

/// Interior-point oracle backed by Clarabel.
#[derive(Clone, Debug)]
pub struct ClarabelOracle {
    pub max_iter: u32,
    pub slack_tolerance: f64,
}

impl Default for ClarabelOracle {
    fn default() -> Self {
        Self { max_iter: 200, slack_tolerance: SLACK_TOLERANCE }
    }
}

struct Triplets {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
}

impl Triplets {
    /// Appends one constraint row `s = b - A z`.
    fn row(&mut self, entries: &[(usize, f64)], rhs: f64) {
        let r = self.b.len();
        for &(col, v) in entries {
            if v != 0.0 {
                self.rows.push(r);
                self.cols.push(col);
                self.vals.push(-v);
            }
        }
        self.b.push(rhs);
    }
}

impl SocpOracle for ClarabelOracle {
    fn feasibility(&self, t: f64, coef: &MrtCoefficients, sigma2_d: f64, power: f64) -> SocpWitness {
        let (mc, kc) = (coef.stations(), coef.users());
        let infeasible = |status| SocpWitness {
            status,
            x: vec![vec![0.0; kc]; mc],
            y: vec![vec![0.0; kc]; kc],
            slack: f64::INFINITY,
            iterations: 0,
        };
        if coef.f.iter().any(|&f| f > power) || !(t >= 0.0) {
            return infeasible(SocpStatus::Infeasible);
        }
        if t == 0.0 {
            return SocpWitness { status: SocpStatus::Feasible, slack: 0.0, ..infeasible(SocpStatus::Feasible) };
        }
        // Normalize so x̃ is O(1) and the noise floor is 1.
        let emax = coef.e.iter().flatten().copied().fold(0.0f64, f64::max);
        let alpha = if emax > 0.0 { (power / emax).sqrt() } else { 1.0 };
        let sd = sigma2_d.sqrt();
        let xi = |m: usize, k: usize| m * kc + k;
        let pairs: Vec<(usize, usize)> = (0..kc).flat_map(|i| (0..kc).filter(move |&k| k != i).map(move |k| (i, k))).collect();
        let yi = |i: usize, k: usize| mc * kc + pairs.iter().position(|&p| p == (i, k)).expect("off-diagonal pair");
        let s_idx = mc * kc + pairs.len();
        let nvar = s_idx + 1;

        let mut tr = Triplets { rows: vec![], cols: vec![], vals: vec![], b: vec![] };
        let mut cones = Vec::new();
        let inv_sqrt_t = 1.0 / t.sqrt();
        for k in 0..kc {
            // ‖[√c x, y_{·,k}, √(d + σ²)]‖ ≤ (1/√t) Σ a x + s.
            let lhs: Vec<(usize, f64)> =
                (0..mc).map(|m| (xi(m, k), inv_sqrt_t * coef.a[m][k] * alpha / sd)).chain([(s_idx, 1.0)]).collect();
            tr.row(&lhs, 0.0);
            let mut dim = 1;
            for m in 0..mc {
                for i in 0..kc {
                    let v = coef.c[m][i][k];
                    if v > 0.0 {
                        tr.row(&[(xi(m, i), v.sqrt() * alpha / sd)], 0.0);
                        dim += 1;
                    }
                }
            }
            for i in (0..kc).filter(|&i| i != k) {
                tr.row(&[(yi(i, k), 1.0)], 0.0);
                dim += 1;
            }
            tr.row(&[], ((coef.d[k] + sigma2_d) / sigma2_d).sqrt());
            dim += 1;
            cones.push(SupportedConeT::SecondOrderConeT(dim));
        }
        for &(i, k) in &pairs {
            // |Σ_m b x_{m,i}| ≤ y_{i,k}.
            tr.row(&[(yi(i, k), 1.0)], 0.0);
            let re: Vec<(usize, f64)> = (0..mc).map(|m| (xi(m, i), coef.b[m][i][k].re * alpha / sd)).collect();
            let im: Vec<(usize, f64)> = (0..mc).map(|m| (xi(m, i), coef.b[m][i][k].im * alpha / sd)).collect();
            tr.row(&re, 0.0);
            tr.row(&im, 0.0);
            cones.push(SupportedConeT::SecondOrderConeT(3));
        }
        for m in 0..mc {
            // Σ e x² ≤ u as ‖[2√e x; u - 1]‖ ≤ u + 1.
            let u = (power - coef.f[m]) / power;
            tr.row(&[], u + 1.0);
            for k in 0..kc {
                tr.row(&[(xi(m, k), 2.0 * (coef.e[m][k] / emax.max(f64::MIN_POSITIVE)).sqrt())], 0.0);
            }
            tr.row(&[], u - 1.0);
            cones.push(SupportedConeT::SecondOrderConeT(kc + 2));
        }
        for m in 0..mc {
            for k in 0..kc {
                tr.row(&[(xi(m, k), 1.0)], 0.0);
            }
        }
        cones.push(SupportedConeT::NonnegativeConeT(mc * kc));

        let nrows = tr.b.len();
        let a = CscMatrix::new_from_triplets(nrows, nvar, tr.rows, tr.cols, tr.vals);
        let p = CscMatrix::zeros((nvar, nvar));
        let mut q = vec![0.0; nvar];
        q[s_idx] = 1.0;
        let settings = DefaultSettings { verbose: false, max_iter: self.max_iter, ..DefaultSettings::default() };
        let Ok(mut solver) = DefaultSolver::new(&p, &q, &a, &tr.b, &cones, settings) else {
            return infeasible(SocpStatus::Indeterminate);
        };
        solver.solve();
        let sol = &solver.solution;
        let converged = matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved);
        let slack = sol.x[s_idx];
        let raw: Vec<Vec<f64>> = (0..mc).map(|m| (0..kc).map(|k| sol.x[xi(m, k)].max(0.0) * alpha).collect()).collect();
        let mut y = vec![vec![0.0; kc]; kc];
        for &(i, k) in &pairs {
            y[i][k] = sol.x[yi(i, k)] * sd;
        }
        let zeros = || vec![vec![0.0; kc]; mc];
        let (status, x) = if converged && slack > self.slack_tolerance {
            (SocpStatus::Infeasible, zeros())
        } else {
            // A stalled solve still answers when its last iterate checks out.
            match certify(raw.clone(), t, coef, sigma2_d, power) {
                Some(x) => (SocpStatus::Feasible, x),
                None if converged => (SocpStatus::Feasible, raw),
                None => (SocpStatus::Indeterminate, zeros()),
            }
        };
        SocpWitness { status, x, y, slack, iterations: sol.iterations }
    }
}

/// Relative SINR shortfall tolerated when checking a witness directly.
pub const CERTIFY_TOLERANCE: f64 = 1e-6;

/// Pulls `x` back onto the power caps and keeps it if every SINR reaches
/// `t` up to `CERTIFY_TOLERANCE`.
fn certify(mut x: Vec<Vec<f64>>, t: f64, coef: &MrtCoefficients, sigma2_d: f64, power: f64) -> Option<Vec<Vec<f64>>> {
    for (m, xm) in x.iter_mut().enumerate() {
        let used = coef.station_power(m, xm) - coef.f[m];
        let budget = power - coef.f[m];
        if used > budget {
            let shrink = (budget / used).sqrt();
            xm.iter_mut().for_each(|v| *v *= shrink);
        }
    }
    let ok = x.iter().flatten().all(|v| v.is_finite())
        && coef.sinr(&x, sigma2_d).iter().all(|&s| s >= t * (1.0 - CERTIFY_TOLERANCE));
    ok.then_some(x)
}

/// Upper bound on the min-SINR: each user alone at full power everywhere.
pub fn single_user_bound(coef: &MrtCoefficients, sigma2_d: f64, power: f64) -> f64 {
    (0..coef.users())
        .map(|k| {
            let amp: f64 = (0..coef.stations())
                .map(|m| {
                    let e = coef.e[m][k];
                    if e > 0.0 { coef.a[m][k] * ((power - coef.f[m]).max(0.0) / e).sqrt() } else { 0.0 }
                })
                .sum();
            amp * amp / (coef.d[k] + sigma2_d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest feasible level in `[t_min, t_max]`, expanding `t_max` if needed.
pub fn bisection_power<O: SocpOracle + ?Sized>(
    oracle: &O,
    coef: &MrtCoefficients,
    sigma2_d: f64,
    power: f64,
    t_min: f64,
    t_max: f64,
    eps: f64,
    start: Option<SocpWitness>,
) -> (f64, Option<SocpWitness>) {
    let out = bisect(t_min, start, t_max, eps, |t| {
        let w = oracle.feasibility(t, coef, sigma2_d, power);
        w.is_feasible().then_some(w)
    });
    (out.t_lo, out.witness)
}

/// Whether `state` meets every power and fronthaul constraint.
pub fn state_admissible(state: &PrecoderState, w: &[CMat], cfg: &SystemConfig, rho: f64, tol: f64) -> bool {
    (0..state.f.len()).all(|m| {
        let pw = transmit_power(&state.f[m], &state.p[m], state.sigma[m], &w[m], rho);
        let rate_ok = cfg.downlink_capacity.is_infinite()
            || fronthaul_rate(&state.f[m], &state.p[m], state.sigma[m]) <= cfg.downlink_capacity * (1.0 + tol);
        pw <= cfg.downlink_power * (1.0 + tol) && rate_ok
    })
}

/// Compression-noise step followed by the projection onto the power caps:
/// `κ = P_d / P_m`, `p ← min(κ,1) p`, `σ ← min(√κ,1) σ`.
pub fn sigma_and_project(
    f: &[CMat],
    p: &mut [Vec<f64>],
    w: &[CMat],
    cfg: &SystemConfig,
    rho: f64,
) -> Result<Vec<f64>> {
    let mut sigma = Vec::with_capacity(f.len());
    for m in 0..f.len() {
        let mut s = solve_sigma_d(&f[m], &p[m], cfg.downlink_capacity)?;
        let pw = transmit_power(&f[m], &p[m], s, &w[m], rho);
        if pw > cfg.downlink_power {
            let kappa = cfg.downlink_power / pw;
            p[m].iter_mut().for_each(|x| *x *= kappa);
            s *= kappa.sqrt();
        }
        sigma.push(s);
    }
    Ok(sigma)
}

pub fn algorithm1(eff: &EffectiveChannel, w: &[CMat], cfg: &SystemConfig, termination: Termination) -> Result<FairnessResult> {
    algorithm1_with(&ClarabelOracle::default(), eff, w, cfg, termination)
}

/// Uniform initial powers `P_d / (2 K max e)` and their compression noise.
pub fn initial_state(eff: &EffectiveChannel, w: &[CMat], cfg: &SystemConfig, rho: f64) -> Result<PrecoderState> {
    let f = mrt_precoder(eff);
    let k = cfg.users;
    let emax = f
        .iter()
        .zip(w)
        .flat_map(|(fm, wm)| (0..k).map(move |i| unit_power(wm, fm, i, rho)))
        .fold(0.0f64, f64::max);
    let p0 = if emax > 0.0 { cfg.downlink_power / (2.0 * k as f64 * emax) } else { 0.0 };
    let p = vec![vec![p0; k]; f.len()];
    let sigma = f.iter().map(|fm| solve_sigma_d(fm, &p[0], cfg.downlink_capacity)).collect::<Result<Vec<_>>>()?;
    Ok(PrecoderState { f, p, sigma })
}

pub fn algorithm1_with<O: SocpOracle + ?Sized>(
    oracle: &O,
    eff: &EffectiveChannel,
    w: &[CMat],
    cfg: &SystemConfig,
    termination: Termination,
) -> Result<FairnessResult> {
    let rho = distortion_factor(cfg.dac_bits)?;
    let sigma2_d = cfg.downlink_noise;
    let mut state = initial_state(eff, w, cfg, rho)?;
    let eval = |s: &PrecoderState| sinr_per_user(s, eff, rho, sigma2_d).min_sinr();
    let admissible = |s: &PrecoderState| state_admissible(s, w, cfg, rho, 1e-9);

    let mut best: Option<(f64, PrecoderState)> = None;
    let mut t_cur = 0.0;
    let mut current_ok = admissible(&state);
    if current_ok {
        t_cur = eval(&state);
        best = Some((t_cur, state.clone()));
    }
    let mut trace = Vec::new();
    let mut status = SolveStatus::RoundLimit;
    for _ in 0..termination.max_rounds {
        let coef = mrt_coefficients(eff, &state.sigma, rho, w);
        let ub = single_user_bound(&coef, sigma2_d, cfg.downlink_power);
        if !(ub > 0.0) {
            break;
        }
        let t_max = 2.0 * ub;
        let eps = 1e-4 * (1.0 + t_max);
        // The current state certifies its own min-SINR at this noise level.
        let start = current_ok.then(|| SocpWitness {
            status: SocpStatus::Feasible,
            x: state.p.iter().map(|pm| pm.iter().map(|p| p.sqrt()).collect()).collect(),
            y: vec![],
            slack: f64::NAN,
            iterations: 0,
        });
        let t_lo = if current_ok { t_cur.min(t_max) } else { 0.0 };
        let (_, witness) = bisection_power(oracle, &coef, sigma2_d, cfg.downlink_power, t_lo, t_max, eps, start);
        let Some(witness) = witness else {
            break;
        };
        let mut p: Vec<Vec<f64>> = witness.x.iter().map(|xm| xm.iter().map(|x| x * x).collect()).collect();
        let sigma = sigma_and_project(&state.f, &mut p, w, cfg, rho)?;
        state = PrecoderState { f: state.f, p, sigma };
        let t_new = eval(&state);
        current_ok = admissible(&state);
        trace.push(t_new);
        if current_ok && best.as_ref().is_none_or(|(t, _)| t_new > *t) {
            best = Some((t_new, state.clone()));
        }
        let change = relative_change(t_new, t_cur);
        t_cur = t_new;
        if change < termination.rel_tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    let rounds = trace.len();
    match best {
        Some((_, s)) => {
            let t_star = eval(&s);
            Ok(FairnessResult { t_star, state: s, trace, status, rounds })
        }
        None => Ok(FairnessResult { t_star: 0.0, state, trace, status: SolveStatus::Infeasible, rounds }),
    }
}
