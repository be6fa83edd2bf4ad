use super::features::FncacFeatures;
use super::network::{forward, RrbfnParams, RrbfnState};
use crate::error::{invalid, Result};
use crate::policies::{AdmissionController, AdmissionDecision, NetworkSnapshot, Verdict};
use crate::traffic::ClassId;

/// Scores the request with the network and admits when the score reaches 0.5
/// and some RAT can host the call. Returns the advanced recurrent state.
pub fn fncac_decide(
    params: &RrbfnParams,
    state: &RrbfnState,
    rats: &[NetworkSnapshot],
    class: ClassId,
    cost_bias: f64,
) -> Result<(AdmissionDecision, RrbfnState)> {
    if rats.is_empty() {
        return Err(invalid("at least one RAT snapshot is required"));
    }
    let inputs = FncacFeatures::from_snapshots(rats, class, cost_bias).to_inputs(params.input_width())?;
    let (score, next) = forward(&inputs, state, params)?;
    let feasible = rats.iter().any(|s| s.fits(class));
    let verdict = if score >= 0.5 && feasible { Verdict::Admit } else { Verdict::Reject };
    Ok((AdmissionDecision { verdict, score }, next))
}

/// A simulation-owned controller: shared frozen parameters, private state.
#[derive(Debug, Clone)]
pub struct FncacController<'a> {
    params: &'a RrbfnParams,
    state: RrbfnState,
    cost_bias: f64,
    rats: usize,
}

impl<'a> FncacController<'a> {
    pub fn new(params: &'a RrbfnParams, rats: usize, cost_bias: f64) -> Result<Self> {
        let needed = FncacFeatures::natural_len(rats);
        if params.input_width() < needed {
            return Err(invalid(format!(
                "{} input neurons cannot carry {needed} features for {rats} RATs",
                params.input_width()
            )));
        }
        Ok(Self { params, state: params.fresh_state(), cost_bias, rats })
    }

    pub fn state(&self) -> &RrbfnState {
        &self.state
    }

    pub fn decide(&mut self, rats: &[NetworkSnapshot], class: ClassId) -> AdmissionDecision {
        assert_eq!(rats.len(), self.rats, "controller was built for {} RATs", self.rats);
        let (decision, next) = fncac_decide(self.params, &self.state, rats, class, self.cost_bias)
            .expect("dimensions checked at construction");
        self.state = next;
        decision
    }
}

impl AdmissionController for FncacController<'_> {
    fn admit(&mut self, rats: &[NetworkSnapshot], class: ClassId) -> Option<usize> {
        if self.decide(rats, class).is_admit() {
            rats.iter().position(|s| s.fits(class))
        } else {
            None
        }
    }
}
