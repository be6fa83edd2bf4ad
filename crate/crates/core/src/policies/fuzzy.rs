//! Mamdani-style fuzzy admission controller with singleton outputs.
//!
//! Inputs are the available fraction of the pool `u` and the demand
//! normalised by the largest class demand `d`. Each of the nine rules fires
//! with `min(capacity_k(u), demand_l(d))`; the score is the firing-weighted
//! average of the rule singletons.

use super::{AdmissionDecision, AdmissionPolicy, NetworkSnapshot, Verdict};
use crate::error::{invalid, Result};
use crate::traffic::ClassId;

/// Triangle `(left, peak, right)`. A peak equal to an end gives a shoulder
/// with full membership at that end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularSet {
    pub left: f64,
    pub peak: f64,
    pub right: f64,
}

impl TriangularSet {
    pub fn new(left: f64, peak: f64, right: f64) -> Result<Self> {
        if !(left <= peak && peak <= right) || !left.is_finite() || !right.is_finite() {
            return Err(invalid(format!("triangle needs left <= peak <= right, got ({left}, {peak}, {right})")));
        }
        Ok(Self { left, peak, right })
    }

    pub fn membership(&self, x: f64) -> f64 {
        if x < self.left || x > self.right {
            0.0
        } else if x <= self.peak {
            if self.peak == self.left {
                1.0
            } else {
                (x - self.left) / (self.peak - self.left)
            }
        } else if self.right == self.peak {
            1.0
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }
}

/// Rule consequents and their output singletons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuzzyOutput {
    Reject,
    WeakAccept,
    StrongAccept,
}

impl FuzzyOutput {
    pub fn singleton(self) -> f64 {
        match self {
            FuzzyOutput::Reject => 0.0,
            FuzzyOutput::WeakAccept => 0.5,
            FuzzyOutput::StrongAccept => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyController {
    /// Low, Medium, High over the available fraction.
    pub capacity_sets: [TriangularSet; 3],
    /// Small, Medium, Large over the normalised demand.
    pub demand_sets: [TriangularSet; 3],
    /// `rule_table[capacity][demand]`.
    pub rule_table: [[FuzzyOutput; 3]; 3],
    pub accept_threshold: f64,
}

const COVERAGE_GRID: usize = 10_000;

impl FuzzyController {
    pub fn new(
        capacity_sets: [TriangularSet; 3],
        demand_sets: [TriangularSet; 3],
        rule_table: [[FuzzyOutput; 3]; 3],
        accept_threshold: f64,
    ) -> Result<Self> {
        for (name, family) in [("capacity", &capacity_sets), ("demand", &demand_sets)] {
            for i in 0..=COVERAGE_GRID {
                let x = i as f64 / COVERAGE_GRID as f64;
                if family.iter().all(|s| s.membership(x) <= 0.0) {
                    return Err(invalid(format!("{name} sets leave {x} uncovered")));
                }
            }
        }
        if !(0.0..=1.0).contains(&accept_threshold) {
            return Err(invalid(format!("accept threshold {accept_threshold} outside [0, 1]")));
        }
        Ok(Self { capacity_sets, demand_sets, rule_table, accept_threshold })
    }

    pub fn default_sets() -> [TriangularSet; 3] {
        [
            TriangularSet { left: 0.0, peak: 0.0, right: 0.5 },
            TriangularSet { left: 0.25, peak: 0.5, right: 0.75 },
            TriangularSet { left: 0.5, peak: 1.0, right: 1.0 },
        ]
    }

    pub fn default_rule_table() -> [[FuzzyOutput; 3]; 3] {
        use FuzzyOutput::*;
        [[Reject, Reject, Reject], [WeakAccept, WeakAccept, Reject], [StrongAccept, StrongAccept, StrongAccept]]
    }

    /// Defuzzified score for normalised capacity `u` and demand `d`.
    pub fn score(&self, u: f64, d: f64) -> f64 {
        let mut weighted = 0.0;
        let mut total = 0.0;
        for (ci, cap) in self.capacity_sets.iter().enumerate() {
            let mu_cap = cap.membership(u);
            if mu_cap <= 0.0 {
                continue;
            }
            for (di, dem) in self.demand_sets.iter().enumerate() {
                let strength = mu_cap.min(dem.membership(d));
                weighted += strength * self.rule_table[ci][di].singleton();
                total += strength;
            }
        }
        assert!(total > 0.0, "no fuzzy rule fired for u={u}, d={d}");
        weighted / total
    }

    pub fn fuzzy_decide(&self, snapshot: &NetworkSnapshot, class: ClassId) -> AdmissionDecision {
        let u = snapshot.available_fraction();
        let d = class.channels_required() as f64 / ClassId::MAX_DEMAND as f64;
        let score = self.score(u, d);
        let verdict =
            if score >= self.accept_threshold && snapshot.fits(class) { Verdict::Admit } else { Verdict::Reject };
        AdmissionDecision { verdict, score }
    }
}

impl Default for FuzzyController {
    fn default() -> Self {
        Self {
            capacity_sets: Self::default_sets(),
            demand_sets: Self::default_sets(),
            rule_table: Self::default_rule_table(),
            accept_threshold: 0.5,
        }
    }
}

impl AdmissionPolicy for FuzzyController {
    fn name(&self) -> &str {
        "fuzzy"
    }

    fn decide(&self, snapshot: &NetworkSnapshot, class: ClassId) -> AdmissionDecision {
        self.fuzzy_decide(snapshot, class)
    }
}
