//! Parallel sweeps over drops and the four experiments.

use rayon::prelude::*;

use super::experiment::{ExperimentKind, RunConfig};
use super::output::{Index, Metric, ResultRow};
use super::pipeline::{run_coherence_block, stage_of, Csi, DropState};
use crate::config::{Resolution, SystemConfig};
use crate::downlink::Precoder;
use crate::energy::power_report;
use crate::error::{Error, Result};
use crate::linalg::{CVec, C64};
use crate::rf::{quantize_signal, QuantizerModel};
use crate::rng::{child_stream, complex_gaussian, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub csi: Csi,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1, csi: Csi::Estimated }
    }
}

/// Maps `f` over `0..n` on a dedicated pool and returns results in index
/// order, so output never depends on scheduling.
pub fn sweep<T, F>(n: u64, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// One point of a `(C, B)` grid, applied to both links.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub capacity: f64,
    pub bits: Resolution,
}

impl GridPoint {
    pub fn apply(&self, cfg: &SystemConfig) -> SystemConfig {
        SystemConfig {
            uplink_capacity: self.capacity,
            downlink_capacity: self.capacity,
            adc_bits: self.bits,
            dac_bits: self.bits,
            ..cfg.clone()
        }
    }
}

pub fn grid(run: &RunConfig, kind: ExperimentKind) -> Vec<GridPoint> {
    let caps = run.experiment.capacity_grid(kind, &run.system);
    let bits = run.experiment.bits_grid(kind, &run.system);
    caps.iter().flat_map(|&capacity| bits.iter().map(move |&bits| GridPoint { capacity, bits })).collect()
}

pub fn run_experiment(kind: ExperimentKind, run: &RunConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    run.validate()?;
    match kind {
        ExperimentKind::NmseSweep => nmse_sweep(run, opts),
        ExperimentKind::Maxmin => maxmin(run, opts),
        ExperimentKind::EeSweep => ee_sweep(run, opts),
        ExperimentKind::ValidateAqnm => validate_aqnm(run, opts),
    }
}

struct RowFactory<'a> {
    hash: &'a str,
}

impl RowFactory<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(&self, drop: Index, block: Index, point: GridPoint, precoder: &'static str, metric: Metric, value: f64, status: String, iters: usize) -> ResultRow {
        ResultRow {
            drop,
            block,
            capacity: point.capacity,
            bits: point.bits,
            precoder,
            metric,
            value,
            status,
            iters,
            config_hash: self.hash.to_string(),
        }
    }

    fn failure(&self, drop: Index, block: Index, point: GridPoint, precoder: &'static str, metric: Metric, err: &Error) -> ResultRow {
        self.row(drop, block, point, precoder, metric, f64::NAN, format!("error:{}", stage_of(err)), 0)
    }
}

/// Analytic NMSE per drop over the `(C_u, B_u)` grid.
pub fn nmse_sweep(run: &RunConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let points = grid(run, ExperimentKind::NmseSweep);
    let hash = run.hash();
    let rows = RowFactory { hash: &hash };
    let master = run.system.seed;
    let per_drop = sweep(run.experiment.drops, opts.threads, |d| {
        let drop_idx = Index::At(d);
        let state = match DropState::new(&run.system, master, d) {
            Ok(s) => s,
            Err(e) => return points.iter().map(|&p| rows.failure(drop_idx, Index::All, p, "none", Metric::Nmse, &e)).collect(),
        };
        points
            .iter()
            .map(|&p| {
                let cfg = p.apply(&run.system);
                match state.uplink(&cfg).and_then(|u| u.nmse(&state.stats).map_err(|e| e.at("nmse"))) {
                    Ok(v) => rows.row(drop_idx, Index::All, p, "none", Metric::Nmse, v, "ok".into(), 0),
                    Err(e) => rows.failure(drop_idx, Index::All, p, "none", Metric::Nmse, &e),
                }
            })
            .collect::<Vec<_>>()
    })?;
    Ok(per_drop.into_iter().flatten().collect())
}

/// Per-block result of one precoder at one grid point.
#[derive(Clone, Debug)]
enum CellResult {
    Solved { min_sinr: f64, min_rate: f64, tx_power: Vec<f64>, status: String, rounds: usize },
    Failed(String),
}

/// Runs every block of one drop. Result index: `[block][grid][precoder]`.
fn drop_blocks(run: &RunConfig, points: &[GridPoint], precoders: &[Precoder], d: u64, csi: Csi) -> Vec<Vec<Vec<CellResult>>> {
    let master = run.system.seed;
    let blocks = run.experiment.blocks;
    let fail = |e: &Error| CellResult::Failed(format!("error:{}", stage_of(e)));
    let fill = |cell: CellResult| vec![vec![vec![cell; precoders.len()]; points.len()]; blocks as usize];
    let state = match DropState::new(&run.system, master, d) {
        Ok(s) => s,
        Err(e) => return fill(fail(&e)),
    };
    let cfgs: Vec<SystemConfig> = points.iter().map(|p| p.apply(&run.system)).collect();
    let uplinks: Vec<_> = cfgs.iter().map(|c| state.uplink(c)).collect();
    (0..blocks)
        .map(|b| {
            cfgs.iter()
                .zip(&uplinks)
                .map(|(cfg, uplink)| {
                    let uplink = match uplink {
                        Ok(u) => u,
                        Err(e) => return vec![fail(e); precoders.len()],
                    };
                    match run_coherence_block(cfg, &state, uplink, master, b, precoders, csi) {
                        Err(e) => vec![fail(&e); precoders.len()],
                        Ok(out) => out
                            .outcomes
                            .into_iter()
                            .map(|o| match o.result {
                                Ok(s) => CellResult::Solved {
                                    min_sinr: s.report.min_sinr(),
                                    min_rate: s.report.min_rate(),
                                    tx_power: s.tx_power,
                                    status: s.fairness.status.to_string(),
                                    rounds: s.fairness.rounds,
                                },
                                Err(e) => fail(&e),
                            })
                            .collect(),
                    }
                })
                .collect()
        })
        .collect()
}

/// Per-block min-SINR and min-rate rows, the raw material of rate CDFs.
pub fn maxmin(run: &RunConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let points = grid(run, ExperimentKind::Maxmin);
    let precoders = run.experiment.precoder.precoders();
    let hash = run.hash();
    let rows = RowFactory { hash: &hash };
    let per_drop = sweep(run.experiment.drops, opts.threads, |d| {
        let cells = drop_blocks(run, &points, &precoders, d, opts.csi);
        let mut out = Vec::new();
        for (b, per_block) in cells.into_iter().enumerate() {
            for (point, per_point) in points.iter().zip(per_block) {
                for (precoder, cell) in precoders.iter().zip(per_point) {
                    let (di, bi, name) = (Index::At(d), Index::At(b as u64), precoder.name());
                    match cell {
                        CellResult::Solved { min_sinr, min_rate, status, rounds, .. } => {
                            out.push(rows.row(di, bi, *point, name, Metric::MinSinr, min_sinr, status.clone(), rounds));
                            out.push(rows.row(di, bi, *point, name, Metric::MinRate, min_rate, status, rounds));
                        }
                        CellResult::Failed(status) => {
                            for metric in [Metric::MinSinr, Metric::MinRate] {
                                out.push(rows.row(di, bi, *point, name, metric, f64::NAN, status.clone(), 0));
                            }
                        }
                    }
                }
            }
        }
        out
    })?;
    Ok(per_drop.into_iter().flatten().collect())
}

/// Energy efficiency per `(C, B, precoder)`, aggregated over all drops and
/// blocks: mean min-rate over mean total power.
pub fn ee_sweep(run: &RunConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let points = grid(run, ExperimentKind::EeSweep);
    let precoders = run.experiment.precoder.precoders();
    let hash = run.hash();
    let rows = RowFactory { hash: &hash };
    let per_drop = sweep(run.experiment.drops, opts.threads, |d| drop_blocks(run, &points, &precoders, d, opts.csi))?;

    let stations = run.system.stations;
    let mut out = Vec::new();
    for (g, point) in points.iter().enumerate() {
        let cfg = point.apply(&run.system);
        for (j, precoder) in precoders.iter().enumerate() {
            let (mut rate, mut tx, mut ok, mut total) = (0.0, vec![0.0; stations], 0usize, 0usize);
            // Summed in (drop, block) order so the result is independent of scheduling.
            for cell in per_drop.iter().flatten().map(|block| &block[g][j]) {
                total += 1;
                if let CellResult::Solved { min_rate, tx_power, .. } = cell {
                    ok += 1;
                    rate += min_rate;
                    tx.iter_mut().zip(tx_power).for_each(|(a, b)| *a += b);
                }
            }
            let name = precoder.name();
            if ok == 0 {
                let err = Error::Domain("no block solved".into()).at("maxmin");
                out.push(rows.failure(Index::All, Index::All, *point, name, Metric::Ee, &err));
                out.push(rows.failure(Index::All, Index::All, *point, name, Metric::PBsTotal, &err));
                continue;
            }
            let n = ok as f64;
            tx.iter_mut().for_each(|p| *p /= n);
            let status = if ok == total { "ok".to_string() } else { format!("partial:{ok}/{total}") };
            match power_report(&run.power, &cfg, point.bits, point.capacity, &tx, rate / n) {
                Ok(report) => {
                    out.push(rows.row(Index::All, Index::All, *point, name, Metric::Ee, report.ee, status.clone(), ok));
                    out.push(rows.row(Index::All, Index::All, *point, name, Metric::PBsTotal, report.bs.iter().sum(), status, ok));
                }
                Err(e) => {
                    let e = e.at("energy");
                    out.push(rows.failure(Index::All, Index::All, *point, name, Metric::Ee, &e));
                    out.push(rows.failure(Index::All, Index::All, *point, name, Metric::PBsTotal, &e));
                }
            }
        }
    }
    Ok(out)
}

/// Monte Carlo moments of the quantization error `q = Q(x) - (1 - ρ) x`.
#[derive(Clone, Debug, PartialEq)]
pub struct AqnmCheck {
    pub bits: u32,
    pub rho: f64,
    /// Bussgang gain measured as `1 - E[Q(x) x*] / E|x|²`, pooled over entries.
    pub measured_rho: f64,
    /// Largest per-entry error of `E[q q^H]` against `ρ(1-ρ) diag(C)`,
    /// relative to `ρ(1-ρ) √(C_ii C_jj)`.
    pub cov_error: f64,
    /// Largest normalized input-noise cross-correlation.
    pub correlation: f64,
    pub samples: usize,
}

/// Input variances used by the validation; deliberately unequal.
pub const AQNM_VARIANCES: [f64; 4] = [0.25, 1.0, 2.0, 5.0];

pub fn aqnm_check(bits: u32, samples: usize, master: u64) -> Result<AqnmCheck> {
    let model = QuantizerModel::new(Resolution::Bits(bits))?;
    let rho = model.rho;
    let n = AQNM_VARIANCES.len();
    let scale: Vec<f64> = AQNM_VARIANCES.iter().map(|v| v.sqrt()).collect();
    let mut rng = child_stream(master, 0, bits as u64, Stage::Validation);
    let mut qq = vec![C64::new(0.0, 0.0); n * n];
    let mut xq = vec![C64::new(0.0, 0.0); n * n];
    let mut xx = vec![0.0; n];
    let (mut qx_pooled, mut xx_pooled) = (0.0, 0.0);
    for _ in 0..samples {
        let x = CVec::from_fn(n, |i, _| complex_gaussian(&mut rng, AQNM_VARIANCES[i]));
        let y = quantize_signal(&x, &model, &scale)?;
        let q = &y - x.scale(1.0 - rho);
        for i in 0..n {
            xx[i] += x[i].norm_sqr();
            qx_pooled += (y[i] * x[i].conj()).re / AQNM_VARIANCES[i];
            xx_pooled += x[i].norm_sqr() / AQNM_VARIANCES[i];
            for j in 0..n {
                qq[i * n + j] += q[i] * q[j].conj();
                xq[i * n + j] += x[i] * q[j].conj();
            }
        }
    }
    let s = samples as f64;
    let nu = rho * (1.0 - rho);
    let mut cov_error = 0.0f64;
    let mut correlation = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { nu * AQNM_VARIANCES[i] } else { 0.0 };
            let norm = nu * (AQNM_VARIANCES[i] * AQNM_VARIANCES[j]).sqrt();
            cov_error = cov_error.max((qq[i * n + j] / s - expected).norm() / norm);
            let q_var = qq[j * n + j].re / s;
            correlation = correlation.max((xq[i * n + j] / s).norm() / (xx[i] / s * q_var).sqrt());
        }
    }
    Ok(AqnmCheck { bits, rho, measured_rho: 1.0 - qx_pooled / xx_pooled, cov_error, correlation, samples })
}

/// Quantization-noise model check for each finite resolution in the grid.
pub fn validate_aqnm(run: &RunConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let bits = run.experiment.bits_grid(ExperimentKind::ValidateAqnm, &run.system);
    let hash = run.hash();
    let rows = RowFactory { hash: &hash };
    let capacity = run.system.uplink_capacity;
    let master = run.system.seed;
    let checks = sweep(bits.len() as u64, opts.threads, |i| {
        let point = GridPoint { capacity, bits: bits[i as usize] };
        let result = match point.bits {
            Resolution::Bits(b) => aqnm_check(b, run.experiment.samples, master),
            Resolution::Infinite => Err(Error::Domain("no quantizer at infinite resolution".into())),
        };
        let metrics = [Metric::AqnmRho, Metric::AqnmCovError, Metric::AqnmCorrelation];
        match result {
            Ok(c) => {
                let values = [c.measured_rho, c.cov_error, c.correlation];
                metrics
                    .iter()
                    .zip(values)
                    .map(|(&m, v)| rows.row(Index::All, Index::All, point, "none", m, v, "ok".into(), c.samples))
                    .collect::<Vec<_>>()
            }
            Err(e) => {
                let e = e.at("validate_aqnm");
                metrics.iter().map(|&m| rows.failure(Index::All, Index::All, point, "none", m, &e)).collect()
            }
        }
    })?;
    Ok(checks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RunConfig {
        let mut run = RunConfig::default();
        run.system.users = 4;
        run.system.training_length = 4;
        run.experiment.drops = 2;
        run.experiment.blocks = 2;
        run.experiment.capacities = vec![16.0];
        run.experiment.bits = vec![Resolution::Bits(3)];
        run
    }

    #[test]
    fn sweep_is_ordered() {
        let v = sweep(50, 3, |i| i * i).unwrap();
        assert_eq!(v, (0..50).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn maxmin_rows_in_order() {
        let run = tiny();
        let rows = maxmin(&run, &RunOptions::default()).unwrap();
        // drops × blocks × precoders × 2 metrics
        assert_eq!(rows.len(), 2 * 2 * 2 * 2);
        let keys: Vec<_> = rows.iter().map(|r| (r.drop, r.block)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(rows.iter().all(|r| r.status == "converged" || r.status == "round_limit"), "{rows:?}");
    }

    #[test]
    fn ee_rows_aggregate() {
        let mut run = tiny();
        run.experiment.drops = 1;
        run.experiment.blocks = 1;
        run.experiment.precoder = super::super::experiment::PrecoderChoice::Zf;
        let rows = ee_sweep(&run, &RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].metric, Metric::Ee);
        assert!(rows[0].value > 0.0 && rows[1].value > 0.0);
    }

    #[test]
    fn aqnm_small_sample() {
        let c = aqnm_check(2, 20_000, 1).unwrap();
        assert!((c.measured_rho - c.rho).abs() < 0.01, "{c:?}");
        assert!(c.cov_error < 0.1 && c.correlation < 0.05, "{c:?}");
    }
}
