//! Result rows and their CSV serialization.

use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::config::Resolution;
use crate::error::Result;

pub const CSV_HEADER: [&str; 10] = ["drop", "block", "C", "B", "precoder", "metric", "value", "status", "iters", "config_hash"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Nmse,
    MinSinr,
    MinRate,
    Ee,
    PBsTotal,
    /// Measured distortion factor of the quantizer.
    AqnmRho,
    /// Worst relative error of the quantization-noise covariance.
    AqnmCovError,
    /// Worst input-noise sample correlation.
    AqnmCorrelation,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Nmse => "nmse",
            Metric::MinSinr => "min_sinr",
            Metric::MinRate => "min_rate",
            Metric::Ee => "ee",
            Metric::PBsTotal => "p_bs_total",
            Metric::AqnmRho => "aqnm_rho",
            Metric::AqnmCovError => "aqnm_cov_error",
            Metric::AqnmCorrelation => "aqnm_correlation",
        }
    }
}

/// Index of a drop or block, or an aggregate over all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    At(u64),
    All,
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::At(i) => write!(f, "{i}"),
            Index::All => f.write_str("all"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub drop: Index,
    pub block: Index,
    pub capacity: f64,
    pub bits: Resolution,
    /// `mrt`, `zf` or `none`.
    pub precoder: &'static str,
    pub metric: Metric,
    pub value: f64,
    pub status: String,
    pub iters: usize,
    pub config_hash: String,
}

impl ResultRow {
    fn record(&self) -> [String; 10] {
        [
            self.drop.to_string(),
            self.block.to_string(),
            format_float(self.capacity),
            self.bits.to_string(),
            self.precoder.to_string(),
            self.metric.name().to_string(),
            format_float(self.value),
            self.status.clone(),
            self.iters.to_string(),
            self.config_hash.clone(),
        ]
    }
}

/// Shortest representation that parses back to the same value.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_results(rows, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_results(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "drop,block,C,B,precoder,metric,value,status,iters,config_hash\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, 1e-300, f64::INFINITY] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        let row = ResultRow {
            drop: Index::At(3),
            block: Index::All,
            capacity: 16.0,
            bits: Resolution::Infinite,
            precoder: "zf",
            metric: Metric::MinRate,
            value: 0.125,
            status: "converged".into(),
            iters: 4,
            config_hash: "00ff".into(),
        };
        let mut buf = Vec::new();
        write_results(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "3,all,16,inf,zf,min_rate,0.125,converged,4,00ff");
    }
}
