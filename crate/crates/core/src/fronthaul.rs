//! Compression-noise level for a rate-limited fronthaul codebook.
//!
//! Given a PSD signal covariance `S` and a bit budget `b`, finds `σ² > 0`
//! with `log2 det(I + S/σ²) = b`. The rate is strictly decreasing in `σ²`, so
//! the root is unique; it is found in `u = 1/σ²`, where the rate
//! `Σ log2(1 + u λ_i)` is increasing and concave.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, log2_det_identity_plus, CMat};

const RATE_TOLERANCE: f64 = 1e-12;
const MAX_STEPS: usize = 500;

/// `Σ log2(1 + u λ_i)` and its derivative in `u`.
fn rate_and_slope(eigs: &[f64], u: f64) -> (f64, f64) {
    eigs.iter().fold((0.0, 0.0), |(r, s), &l| {
        let z = 1.0 + u * l;
        (r + z.log2(), s + l / (z * std::f64::consts::LN_2))
    })
}

/// Noise variance `σ²` meeting the bit budget with equality. Returns 0 for an
/// infinite budget or a zero signal.
pub fn noise_for_rate(signal: &CMat, bits: f64) -> Result<f64> {
    if bits.is_infinite() && bits > 0.0 {
        return Ok(0.0);
    }
    if !(bits > 0.0) {
        return Err(Error::Domain(format!("fronthaul bit budget must be positive, got {bits}")));
    }
    let mut eigs = hermitian_eigenvalues(signal);
    let top = eigs.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return Ok(0.0);
    }
    eigs.retain(|&l| l > 1e-15 * top);

    // Bracket: rate(lo) < bits <= rate(hi).
    let mut lo = 0.0;
    let mut hi = 1.0 / top;
    while rate_and_slope(&eigs, hi).0 < bits {
        lo = hi;
        hi *= 2.0;
    }
    // Newton from the left endpoint never overshoots a concave increasing
    // function; the bracket guards against round-off.
    let mut u = lo;
    for _ in 0..MAX_STEPS {
        let (r, s) = rate_and_slope(&eigs, u);
        let gap = r - bits;
        if gap.abs() <= RATE_TOLERANCE * bits {
            break;
        }
        if gap < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - gap / s;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == u {
            break;
        }
        u = next;
    }
    Ok(1.0 / u)
}

/// Relative mismatch between the achieved and targeted rate, evaluated
/// through the Cholesky log-determinant rather than the spectrum.
pub fn rate_mismatch(signal: &CMat, sigma2: f64, bits: f64) -> f64 {
    (log2_det_identity_plus(signal, sigma2) - bits).abs() / bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CVec};

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
    }

    #[test]
    fn isotropic_closed_form() {
        let s2 = noise_for_rate(&diag(&[3.0, 3.0]), 4.0).unwrap();
        assert!((s2 - 1.0).abs() < 1e-12, "{s2}");
    }

    #[test]
    fn two_level_quadratic() {
        // 4u² + 5u - 3 = 0.
        let s2 = noise_for_rate(&diag(&[1.0, 4.0]), 2.0).unwrap();
        let expected = 8.0 / (73f64.sqrt() - 5.0);
        assert!((s2 - expected).abs() < 1e-10, "{s2} vs {expected}");
        assert!((s2 - 2.2573).abs() < 1e-4);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(noise_for_rate(&diag(&[1.0]), f64::INFINITY).unwrap(), 0.0);
        assert_eq!(noise_for_rate(&CMat::zeros(3, 3), 5.0).unwrap(), 0.0);
        assert!(noise_for_rate(&diag(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn extreme_budgets_stay_tight() {
        let s = diag(&[1e-9, 2.0, 7.5, 1e3]);
        for bits in [1e-6, 0.1, 3.0, 40.0, 200.0] {
            let s2 = noise_for_rate(&s, bits).unwrap();
            assert!(rate_mismatch(&s, s2, bits) < 1e-8, "bits {bits}: {}", rate_mismatch(&s, s2, bits));
        }
    }
}
