//! Bisection over a monotone feasibility oracle and the result types shared
//! by both max-min solvers.

use std::fmt;

use crate::downlink::PrecoderState;

/// Largest number of bracket doublings before giving up on expansion.
pub const MAX_DOUBLINGS: usize = 30;

/// Outcome of a bracketed search for the largest feasible level.
#[derive(Clone, Debug)]
pub struct Bisection<W> {
    /// Largest level certified feasible (or the initial lower end).
    pub t_lo: f64,
    /// Smallest level found infeasible.
    pub t_hi: f64,
    pub witness: Option<W>,
    pub oracle_calls: usize,
}

/// Finds the largest `t` with `feasible(t)` returning a witness, assuming
/// feasibility is monotone in `t`. `t_lo` must be feasible (its witness, if
/// known, is passed in); `t_hi` is doubled while it stays feasible.
pub fn bisect<W>(
    t_lo: f64,
    witness_lo: Option<W>,
    t_hi: f64,
    eps: f64,
    mut feasible: impl FnMut(f64) -> Option<W>,
) -> Bisection<W> {
    let mut lo = t_lo;
    let mut hi = t_hi.max(t_lo);
    let mut witness = witness_lo;
    let mut calls = 0;
    let mut doublings = 0;
    loop {
        calls += 1;
        match feasible(hi) {
            Some(w) if doublings < MAX_DOUBLINGS => {
                lo = hi;
                witness = Some(w);
                hi = if hi > 0.0 { 2.0 * hi } else { 1.0 };
                doublings += 1;
            }
            Some(w) => {
                // Expansion cap reached: report the last feasible level.
                return Bisection { t_lo: hi, t_hi: hi, witness: Some(w), oracle_calls: calls };
            }
            None => break,
        }
    }
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        calls += 1;
        match feasible(mid) {
            Some(w) => {
                lo = mid;
                witness = Some(w);
            }
            None => hi = mid,
        }
    }
    Bisection { t_lo: lo, t_hi: hi, witness, oracle_calls: calls }
}

/// Stopping rule of the alternating optimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Termination {
    /// Relative change of the min-SINR between rounds.
    pub rel_tol: f64,
    pub max_rounds: usize,
}

impl Default for Termination {
    fn default() -> Self {
        Self { rel_tol: 1e-3, max_rounds: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    RoundLimit,
    /// No state meeting every constraint was found.
    Infeasible,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::RoundLimit => "round_limit",
            SolveStatus::Infeasible => "infeasible",
        })
    }
}

/// Result of a max-min power control run.
#[derive(Clone, Debug)]
pub struct FairnessResult {
    /// Min-SINR re-evaluated on `state`.
    pub t_star: f64,
    pub state: PrecoderState,
    /// Min-SINR after each round.
    pub trace: Vec<f64>,
    pub status: SolveStatus,
    pub rounds: usize,
}

pub(crate) fn relative_change(new: f64, old: f64) -> f64 {
    if old == 0.0 {
        if new == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (new - old).abs() / old.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_threshold() {
        let out = bisect(0.0, None, 1.0, 1e-6, |t| (t <= 4.2).then_some(t));
        assert!(out.t_lo <= 4.2 && 4.2 - out.t_lo <= 1e-6);
        assert_eq!(out.witness, Some(out.t_lo));
    }

    #[test]
    fn infeasible_everywhere_keeps_lower_end() {
        let out: Bisection<()> = bisect(0.0, None, 1.0, 1e-6, |t| (t <= 0.0).then_some(()));
        assert!(out.witness.is_none() && out.t_lo < 1e-6);
    }

    #[test]
    fn bracket_width_halves_with_eps() {
        let a = bisect(0.0, None, 8.0, 1e-2, |t| (t <= 3.3).then_some(()));
        let b = bisect(0.0, None, 8.0, 5e-3, |t| (t <= 3.3).then_some(()));
        assert!(a.t_hi - a.t_lo <= 1e-2 && b.t_hi - b.t_lo <= 5e-3);
        assert!(b.t_hi - b.t_lo <= 0.5 * (a.t_hi - a.t_lo) + 1e-15);
    }
}
