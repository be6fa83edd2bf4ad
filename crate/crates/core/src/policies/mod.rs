//! Admission decisions and the rule-based baselines.

mod fuzzy;
mod threshold;

pub use fuzzy::{FuzzyController, FuzzyOutput, TriangularSet};
pub use threshold::{threshold_decide, ThresholdPolicy};

use crate::error::{invalid, Result};
use crate::traffic::ClassId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Admit,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissionDecision {
    pub verdict: Verdict,
    /// Policy confidence in `[0, 1]`.
    pub score: f64,
}

impl AdmissionDecision {
    pub fn admit() -> Self {
        Self { verdict: Verdict::Admit, score: 1.0 }
    }

    pub fn reject() -> Self {
        Self { verdict: Verdict::Reject, score: 0.0 }
    }

    pub fn is_admit(&self) -> bool {
        self.verdict == Verdict::Admit
    }
}

/// Occupancy of one channel pool as seen by a policy at an arrival instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkSnapshot {
    pub available_channels: u32,
    pub total_channels: u32,
    pub per_class_active: [u32; 3],
}

impl NetworkSnapshot {
    pub fn new(total_channels: u32, per_class_active: [u32; 3]) -> Result<Self> {
        if total_channels == 0 {
            return Err(invalid("snapshot needs a positive channel count"));
        }
        let occupied: u64 =
            ClassId::ALL.iter().map(|c| per_class_active[c.index()] as u64 * c.channels_required() as u64).sum();
        if occupied > total_channels as u64 {
            return Err(invalid(format!("{occupied} occupied channels exceed capacity {total_channels}")));
        }
        Ok(Self { available_channels: total_channels - occupied as u32, total_channels, per_class_active })
    }

    pub fn empty(total_channels: u32) -> Self {
        Self { available_channels: total_channels, total_channels, per_class_active: [0; 3] }
    }

    pub fn occupied_channels(&self) -> u32 {
        self.total_channels - self.available_channels
    }

    pub fn fits(&self, class: ClassId) -> bool {
        self.available_channels >= class.channels_required()
    }

    /// Available capacity normalised to `[0, 1]`.
    pub fn available_fraction(&self) -> f64 {
        self.available_channels as f64 / self.total_channels as f64
    }
}

/// A memoryless admission rule evaluated against a single pool.
pub trait AdmissionPolicy: Send + Sync {
    fn name(&self) -> &str;

    fn decide(&self, snapshot: &NetworkSnapshot, class: ClassId) -> AdmissionDecision;
}

/// Admission over a set of RAT sub-pools. Returns the index of the pool that
/// receives the call, or `None` when it is blocked. Implementations may carry
/// state across calls.
pub trait AdmissionController {
    fn admit(&mut self, rats: &[NetworkSnapshot], class: ClassId) -> Option<usize>;
}

/// First pool, in order, that the policy admits the call into.
pub fn first_fit<P: AdmissionPolicy + ?Sized>(policy: &P, rats: &[NetworkSnapshot], class: ClassId) -> Option<usize> {
    rats.iter().position(|s| s.fits(class) && policy.decide(s, class).is_admit())
}

/// Drives a memoryless policy with first-fit RAT selection.
pub struct FirstFit<'a, P: AdmissionPolicy + ?Sized> {
    policy: &'a P,
}

impl<'a, P: AdmissionPolicy + ?Sized> FirstFit<'a, P> {
    pub fn new(policy: &'a P) -> Self {
        Self { policy }
    }
}

impl<P: AdmissionPolicy + ?Sized> AdmissionController for FirstFit<'_, P> {
    fn admit(&mut self, rats: &[NetworkSnapshot], class: ClassId) -> Option<usize> {
        first_fit(self.policy, rats, class)
    }
}

/// Admits whenever the call fits.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysAdmit;

impl AdmissionPolicy for AlwaysAdmit {
    fn name(&self) -> &str {
        "always-admit"
    }

    fn decide(&self, snapshot: &NetworkSnapshot, class: ClassId) -> AdmissionDecision {
        if snapshot.fits(class) {
            AdmissionDecision::admit()
        } else {
            AdmissionDecision::reject()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RejectAll;

impl AdmissionPolicy for RejectAll {
    fn name(&self) -> &str {
        "reject-all"
    }

    fn decide(&self, _: &NetworkSnapshot, _: ClassId) -> AdmissionDecision {
        AdmissionDecision::reject()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_accounts_demand() {
        let s = NetworkSnapshot::new(10, [0, 0, 1]).unwrap();
        assert_eq!(s.available_channels, 7);
        let s = NetworkSnapshot::new(12, [2, 1, 2]).unwrap();
        assert_eq!(s.available_channels, 12 - 2 - 2 - 6);
        assert!(NetworkSnapshot::new(5, [0, 0, 2]).is_err());
        assert_eq!(NetworkSnapshot::empty(9).available_channels, 9);
    }

    #[test]
    fn first_fit_skips_full_pools() {
        let rats = [NetworkSnapshot::new(4, [0, 1, 0]).unwrap(), NetworkSnapshot::new(4, [1, 0, 0]).unwrap()];
        assert_eq!(first_fit(&AlwaysAdmit, &rats, ClassId::Type3Background), Some(1));
        assert_eq!(first_fit(&AlwaysAdmit, &rats, ClassId::Type2Interactive), Some(0));
        assert_eq!(first_fit(&RejectAll, &rats, ClassId::Type1Conversational), None);
        let mut ctl = FirstFit::new(&AlwaysAdmit);
        assert_eq!(ctl.admit(&rats[..1], ClassId::Type3Background), None);
    }
}
