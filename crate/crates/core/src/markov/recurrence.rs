use super::BlockingReport;
use crate::error::{invalid, CacError, Result};
use crate::traffic::UtilizationRate;

/// Occupancy distribution from the reduced recurrence, indexed by occupied channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSolution {
    /// `P_0 … P_N`, summing to one.
    pub probabilities: Vec<f64>,
    /// The forward-recurrence values before normalisation, seeded with 1.
    pub unnormalized: Vec<f64>,
    pub utilization: UtilizationRate,
}

impl RecurrenceSolution {
    pub fn channels(&self) -> usize {
        self.probabilities.len() - 1
    }
}

/// Runs `P_k = (a/3)(P_{k-1} + P_{k-2} + P_{k-3})` forward from `P_0 = 1`
/// with zero below index 0, then normalises.
pub fn solve_recurrence(a: UtilizationRate, n: usize) -> Result<RecurrenceSolution> {
    if n < 3 {
        return Err(invalid(format!("recurrence needs at least 3 channels, got {n}")));
    }
    let step = a.value() / 3.0;
    let mut raw = vec![0.0f64; n + 1];
    raw[0] = 1.0;
    for k in 1..=n {
        let window: f64 = raw[k.saturating_sub(3)..k].iter().sum();
        raw[k] = step * window;
    }
    let total: f64 = raw.iter().sum();
    if !total.is_finite() {
        return Err(CacError::NumericalFailure(format!("recurrence overflowed at a={}, n={n}", a.value())));
    }
    let probabilities = raw.iter().map(|p| p / total).collect();
    Ok(RecurrenceSolution { probabilities, unnormalized: raw, utilization: a })
}

/// Type1 blocks at `P_N`, type2 at `P_{N-1}`, type3 at `P_{N-2}`; the overall
/// figure is `(a/3)(P_N + P_{N-1} + P_{N-2})`.
pub fn blocking_from_recurrence(sol: &RecurrenceSolution) -> BlockingReport {
    let n = sol.channels();
    let p = &sol.probabilities;
    let (p_n, p_n1, p_n2) = (p[n], p[n - 1], p[n - 2]);
    BlockingReport {
        type1_blocking: p_n,
        type2_blocking: p_n1,
        type3_blocking: p_n2,
        aggregate_blocking: sol.utilization.value() / 3.0 * (p_n + p_n1 + p_n2),
    }
}
