use super::{AdmissionDecision, AdmissionPolicy, NetworkSnapshot};
use crate::traffic::{ClassId, ThresholdSet};

/// Tiered rule: below `t1` nothing is admitted, below `t2` only type1, below
/// `t3` type1 and type2, otherwise every class. Every admit also needs the
/// call to fit.
pub fn threshold_decide(thresholds: &ThresholdSet, snapshot: &NetworkSnapshot, class: ClassId) -> AdmissionDecision {
    let available = snapshot.available_channels;
    let tier_allows = if available < thresholds.t1 {
        false
    } else if available < thresholds.t2 {
        class == ClassId::Type1Conversational
    } else if available < thresholds.t3 {
        class != ClassId::Type3Background
    } else {
        true
    };
    if tier_allows && snapshot.fits(class) {
        AdmissionDecision::admit()
    } else {
        AdmissionDecision::reject()
    }
}

/// The conventional threshold CAC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    pub thresholds: ThresholdSet,
}

impl ThresholdPolicy {
    pub fn new(thresholds: ThresholdSet) -> Self {
        Self { thresholds }
    }
}

impl AdmissionPolicy for ThresholdPolicy {
    fn name(&self) -> &str {
        "conventional"
    }

    fn decide(&self, snapshot: &NetworkSnapshot, class: ClassId) -> AdmissionDecision {
        threshold_decide(&self.thresholds, snapshot, class)
    }
}
