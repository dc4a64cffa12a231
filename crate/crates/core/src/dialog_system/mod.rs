//! The system side of a dialog: understanding, state tracking, the rule policy,
//! action masks and templated responses.

mod nlu;
mod policy;
mod tracker;

use rand::Rng;

pub use nlu::{Nlu, NluResult};
pub use policy::{mask, reference_number, rule_policy, ActionMask, Backend};
pub use tracker::track;

use crate::corpus::{Annotator, Gazetteer, Ontology, RestaurantDb};
use crate::domain::{DialogState, SystemAct, SystemActKind};
use crate::error::Result;
use crate::nlg::{system_fill, TemplateBank};
use crate::SimRng;

/// Anything that picks the next system act.
pub trait SystemPolicy: Send + Sync {
    /// `utterance` is the user's latest message; the result must be allowed by `mask`.
    fn choose(&self, state: &DialogState, utterance: &str, mask: &ActionMask, rng: &mut SimRng) -> SystemActKind;

    /// The feature vector a learning policy sees; `None` for fixed policies.
    fn rl_state(&self, _state: &DialogState, _utterance: &str) -> Option<Vec<f64>> {
        None
    }
}

/// The hand-crafted reference system.
#[derive(Debug, Clone, Copy, Default)]
pub struct RulePolicy;

impl SystemPolicy for RulePolicy {
    fn choose(&self, state: &DialogState, _: &str, mask: &ActionMask, _: &mut SimRng) -> SystemActKind {
        let kind = rule_policy(state);
        debug_assert!(mask.allows(kind), "rule policy chose a masked act");
        kind
    }
}

/// Everything around the policy: NLU, tracker, backend and system NLG.
#[derive(Debug, Clone)]
pub struct SystemCore {
    pub nlu: Nlu,
    pub backend: Backend,
    pub templates: TemplateBank,
}

impl SystemCore {
    pub fn new(db: RestaurantDb, ontology: &Ontology, templates: TemplateBank) -> Self {
        let annotator = Annotator::with_default_rules(Gazetteer::new(&db, ontology));
        SystemCore {
            nlu: Nlu::new(annotator),
            backend: Backend::new(db),
            templates,
        }
    }

    pub fn bundled() -> Self {
        SystemCore::new(RestaurantDb::bundled(), &Ontology::bundled(), TemplateBank::bundled_system())
    }

    pub fn with_nlu_noise(mut self, noise: f64) -> Self {
        self.nlu = self.nlu.with_noise(noise);
        self
    }

    /// Parses a user message and folds it into the state.
    pub fn understand<R: Rng>(&self, state: &DialogState, utterance: &str, rng: &mut R) -> (NluResult, DialogState) {
        let nlu = self.nlu.parse_noisy(utterance, rng);
        let next = track(state, &nlu);
        (nlu, next)
    }

    /// Executes `kind` against the state and renders it.
    pub fn respond(&self, kind: SystemActKind, state: &mut DialogState, goal_id: &str) -> Result<(SystemAct, String)> {
        let act = self.backend.execute(kind, state, goal_id);
        let text = render_system(&self.templates, &act)?;
        Ok((act, text))
    }
}

/// First template of the act's kind that can carry its details.
pub fn render_system(bank: &TemplateBank, act: &SystemAct) -> Result<String> {
    bank.render_first(act.kind.as_str(), &system_fill(act))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Slot, SlotMap};

    #[test]
    fn renders_presented_name_and_closing() {
        let core = SystemCore::bundled();
        let mut state = DialogState {
            filled_constraints: SlotMap::from([(Slot::Name, "caffe uno".to_string())]),
            ..Default::default()
        };
        let (_, text) = core.respond(SystemActKind::PresentResult, &mut state, "g").unwrap();
        assert!(text.contains("caffe uno"), "{text}");
        let (_, bye) = core.respond(SystemActKind::Goodbye, &mut state, "g").unwrap();
        assert_eq!(bye, "thank you for using our service , goodbye .");
    }
}
