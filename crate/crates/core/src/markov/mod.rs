//! Analytical blocking: the reduced three-term recurrence, Erlang-B and the
//! exact occupancy CTMC used as ground truth.

mod ctmc;
mod recurrence;

pub use ctmc::{
    build_ctmc, ctmc_blocking, ctmc_steady_state, CtmcModel, Occupancy, DEFAULT_STATE_CAP, DENSE_SOLVE_LIMIT,
};
pub use recurrence::{blocking_from_recurrence, solve_recurrence, RecurrenceSolution};

use crate::traffic::{ClassId, UtilizationRate};

/// Which blocking figure a row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassScope {
    Aggregate,
    Class(ClassId),
}

impl ClassScope {
    pub const ALL: [ClassScope; 4] = [
        ClassScope::Aggregate,
        ClassScope::Class(ClassId::Type1Conversational),
        ClassScope::Class(ClassId::Type2Interactive),
        ClassScope::Class(ClassId::Type3Background),
    ];

    pub fn label(self) -> &'static str {
        match self {
            ClassScope::Aggregate => "aggregate",
            ClassScope::Class(c) => c.label(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == s)
    }
}

/// Per-class and aggregate blocking probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingReport {
    pub type1_blocking: f64,
    pub type2_blocking: f64,
    pub type3_blocking: f64,
    pub aggregate_blocking: f64,
}

impl BlockingReport {
    pub fn per_class(&self) -> [f64; 3] {
        [self.type1_blocking, self.type2_blocking, self.type3_blocking]
    }

    pub fn get(&self, scope: ClassScope) -> f64 {
        match scope {
            ClassScope::Aggregate => self.aggregate_blocking,
            ClassScope::Class(c) => self.per_class()[c.index()],
        }
    }
}

/// Erlang-B blocking of an `n`-server loss system at offered load `a`, by the
/// recursion `B(k) = a·B(k−1) / (k + a·B(k−1))`.
pub fn erlang_b(n: u32, a: UtilizationRate) -> f64 {
    let a = a.value();
    (1..=n).fold(1.0, |b, k| a * b / (k as f64 + a * b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form(n: u32, a: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=n {
            term *= a / k as f64;
            sum += term;
        }
        term / sum
    }

    #[test]
    fn erlang_b_examples() {
        assert_eq!(erlang_b(0, UtilizationRate(3.0)), 1.0);
        assert!((erlang_b(1, UtilizationRate(1.0)) - 0.5).abs() < 1e-15);
        assert!((erlang_b(2, UtilizationRate(1.0)) - 0.2).abs() < 1e-15);
        assert_eq!(erlang_b(5, UtilizationRate(0.0)), 0.0);
    }

    #[test]
    fn erlang_b_matches_truncated_poisson() {
        for n in 0..40 {
            for a in [0.1, 0.7, 1.0, 4.5, 20.0] {
                let expected = closed_form(n, a);
                let got = erlang_b(n, UtilizationRate(a));
                assert!((got - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-15, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn scope_labels_round_trip() {
        for s in ClassScope::ALL {
            assert_eq!(ClassScope::parse(s.label()), Some(s));
        }
        assert_eq!(ClassScope::parse("type4"), None);
    }
}
