//! The six user simulators behind one interface.

mod act_model;
mod agenda;
mod belief;
mod sle;
mod supervised;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use act_model::{
    corpus_examples, feature_names, features, sl_train, softmax, ActContext, ActModel, SlTrainConfig, FEATURES,
};
pub use agenda::{agenda_init, agenda_next, Agenda, AgendaConfig, AgendaItem};
pub use belief::belief_update;
pub use sle::{goal_values, sle_respond, SleSimulator};
pub use supervised::{goal_mask, masked_distribution, sl_next, SlSimulator, SlState};

use crate::corpus::{Annotator, Corpus, Gazetteer};
use crate::domain::{Goal, SystemAct, UserAct, UserActKind, MAX_TURNS};
use crate::error::{Error, Result};
use crate::nlg::{CondNgramLM, NlgKind, TemplateBank, TfIdfIndex, UserNlg};
use crate::SimRng;

/// One user turn as produced by a simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTurn {
    pub utterance: String,
    /// The act behind the utterance; `None` for the act-free simulator.
    pub act: Option<UserAct>,
    /// The user will not speak again.
    pub done: bool,
}

pub trait UserSimulator: Send {
    fn kind(&self) -> SimKind;

    /// Starts a new dialog for `goal`.
    fn reset(&mut self, goal: &Goal, rng: &mut SimRng);

    /// The next user turn; `system` is `None` for the opening turn.
    fn respond(&mut self, system: Option<(&SystemAct, &str)>, rng: &mut SimRng) -> Result<UserTurn>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SimKind {
    #[serde(rename = "agen-t")]
    AgenT,
    #[serde(rename = "agen-r")]
    AgenR,
    #[serde(rename = "agen-g")]
    AgenG,
    #[serde(rename = "sl-t")]
    SlT,
    #[serde(rename = "sl-r")]
    SlR,
    #[serde(rename = "sl-e")]
    SlE,
}

impl SimKind {
    pub const ALL: [SimKind; 6] = [
        SimKind::AgenT,
        SimKind::AgenR,
        SimKind::AgenG,
        SimKind::SlT,
        SimKind::SlR,
        SimKind::SlE,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimKind::AgenT => "agen-t",
            SimKind::AgenR => "agen-r",
            SimKind::AgenG => "agen-g",
            SimKind::SlT => "sl-t",
            SimKind::SlR => "sl-r",
            SimKind::SlE => "sl-e",
        }
    }

    pub fn is_agenda(self) -> bool {
        matches!(self, SimKind::AgenT | SimKind::AgenR | SimKind::AgenG)
    }

    /// `None` for the act-free simulator.
    pub fn nlg(self) -> Option<NlgKind> {
        match self {
            SimKind::AgenT | SimKind::SlT => Some(NlgKind::Template),
            SimKind::AgenR | SimKind::SlR => Some(NlgKind::Retrieval),
            SimKind::AgenG => Some(NlgKind::Generation),
            SimKind::SlE => None,
        }
    }
}

impl fmt::Display for SimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| Error::Unknown {
                what: "simulator",
                value: s.to_string(),
            })
    }
}

/// Agenda dialog manager plus an NLG strategy.
#[derive(Debug, Clone)]
pub struct AgendaSimulator {
    kind: SimKind,
    config: AgendaConfig,
    nlg: UserNlg,
    goal: Option<Goal>,
    agenda: Option<Agenda>,
    turns: u32,
    last_utterance: String,
}

impl AgendaSimulator {
    pub fn new(kind: SimKind, config: AgendaConfig, nlg: UserNlg) -> Self {
        AgendaSimulator {
            kind,
            config,
            nlg,
            goal: None,
            agenda: None,
            turns: 0,
            last_utterance: String::new(),
        }
    }

    pub fn agenda(&self) -> Option<&Agenda> {
        self.agenda.as_ref()
    }
}

impl UserSimulator for AgendaSimulator {
    fn kind(&self) -> SimKind {
        self.kind
    }

    fn reset(&mut self, goal: &Goal, rng: &mut SimRng) {
        self.agenda = Some(agenda_init(goal, self.config, rng));
        self.goal = Some(goal.clone());
        self.turns = 0;
        self.last_utterance.clear();
    }

    fn respond(&mut self, system: Option<(&SystemAct, &str)>, rng: &mut SimRng) -> Result<UserTurn> {
        let (Some(goal), Some(agenda)) = (&self.goal, &mut self.agenda) else {
            return Err(Error::InvalidGoal("simulator not reset".into()));
        };
        let act = agenda.next(goal, system.map(|(a, _)| a), rng);
        let context = [system.map_or("", |(_, u)| u), self.last_utterance.as_str()];
        let utterance = self.nlg.realize(&act, &context, rng)?;
        self.turns += 1;
        self.last_utterance = utterance.clone();
        Ok(UserTurn {
            utterance,
            done: act.kind == UserActKind::Goodbye || self.turns >= MAX_TURNS,
            act: Some(act),
        })
    }
}

/// Trained artifacts the simulators share.
#[derive(Debug, Clone)]
pub struct SimResources {
    pub gazetteer: Arc<Gazetteer>,
    pub annotator: Arc<Annotator>,
    pub templates: Arc<TemplateBank>,
    pub index: Arc<TfIdfIndex>,
    pub lm: Arc<CondNgramLM>,
    pub act_model: Arc<ActModel>,
    pub agenda: AgendaConfig,
}

impl SimResources {
    /// Trains the retrieval index, the generator and the act model on `corpus`.
    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        let gazetteer = corpus.gazetteer();
        let index = TfIdfIndex::from_dialogs(&corpus.dialogs, &gazetteer);
        let lm = CondNgramLM::from_dialogs(&corpus.dialogs, &gazetteer);
        let (act_model, _) = sl_train(&corpus_examples(&corpus.dialogs), SlTrainConfig::default())?;
        Ok(SimResources {
            annotator: Arc::new(Annotator::with_default_rules(gazetteer.clone())),
            gazetteer: Arc::new(gazetteer),
            templates: Arc::new(TemplateBank::bundled_user()),
            index: Arc::new(index),
            lm: Arc::new(lm),
            act_model: Arc::new(act_model),
            agenda: AgendaConfig::default(),
        })
    }

    fn nlg(&self, kind: NlgKind) -> UserNlg {
        let (t, g) = (self.templates.clone(), self.gazetteer.clone());
        match kind {
            NlgKind::Template => UserNlg::template(t, g),
            NlgKind::Retrieval => UserNlg::retrieval(t, self.index.clone(), g),
            NlgKind::Generation => UserNlg::generation(t, self.lm.clone(), g),
        }
    }

    pub fn build(&self, kind: SimKind) -> Box<dyn UserSimulator> {
        match (kind.is_agenda(), kind.nlg()) {
            (true, Some(nlg)) => Box::new(AgendaSimulator::new(kind, self.agenda, self.nlg(nlg))),
            (false, Some(nlg)) => Box::new(SlSimulator::new(kind, self.act_model.clone(), self.nlg(nlg))),
            _ => Box::new(SleSimulator::new(self.index.clone(), self.gazetteer.clone(), self.annotator.clone())),
        }
    }

    /// Writes the act model, index and generator as JSON.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("act_model.json"), serde_json::to_string(&*self.act_model)?)?;
        std::fs::write(dir.join("tfidf_index.json"), serde_json::to_string(&*self.index)?)?;
        std::fs::write(dir.join("ngram_lm.json"), serde_json::to_string(&*self.lm)?)?;
        Ok(())
    }
}
