//! Surface realization of dialog acts: templates, tf-idf retrieval and an
//! act-conditioned trigram generator, plus lexicalization.

mod lexicalize;
mod ngram;
mod retrieval;
mod template;

use std::str::FromStr;
use std::sync::Arc;

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use lexicalize::lexicalize;
pub use ngram::{ActSignature, CondNgramLM, BOS, EOS, MAX_TOKENS};
pub use retrieval::{Candidate, Doc, TfIdfIndex};
pub use template::{request_word, slot_values, system_fill, user_fill, Fill, TemplateBank, INFO, REQUEST, SLOTS};

use crate::corpus::Gazetteer;
use crate::domain::{UserAct, UserActKind};
use crate::error::{Error, Result};
use crate::text::placeholder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NlgKind {
    Template,
    Retrieval,
    Generation,
}

impl NlgKind {
    pub fn suffix(self) -> char {
        match self {
            NlgKind::Template => 't',
            NlgKind::Retrieval => 'r',
            NlgKind::Generation => 'g',
        }
    }
}

impl FromStr for NlgKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "template" => Ok(NlgKind::Template),
            "r" | "retrieval" => Ok(NlgKind::Retrieval),
            "g" | "generation" => Ok(NlgKind::Generation),
            _ => Err(Error::Unknown {
                what: "nlg kind",
                value: s.to_string(),
            }),
        }
    }
}

/// Turns user acts into text with one strategy, falling back to templates.
#[derive(Debug, Clone)]
pub struct UserNlg {
    pub kind: NlgKind,
    templates: Arc<TemplateBank>,
    index: Option<Arc<TfIdfIndex>>,
    lm: Option<Arc<CondNgramLM>>,
    gazetteer: Arc<Gazetteer>,
}

impl UserNlg {
    pub fn template(templates: Arc<TemplateBank>, gazetteer: Arc<Gazetteer>) -> Self {
        UserNlg {
            kind: NlgKind::Template,
            templates,
            index: None,
            lm: None,
            gazetteer,
        }
    }

    pub fn retrieval(templates: Arc<TemplateBank>, index: Arc<TfIdfIndex>, gazetteer: Arc<Gazetteer>) -> Self {
        UserNlg {
            kind: NlgKind::Retrieval,
            index: Some(index),
            ..UserNlg::template(templates, gazetteer)
        }
    }

    pub fn generation(templates: Arc<TemplateBank>, lm: Arc<CondNgramLM>, gazetteer: Arc<Gazetteer>) -> Self {
        UserNlg {
            kind: NlgKind::Generation,
            lm: Some(lm),
            ..UserNlg::template(templates, gazetteer)
        }
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    /// Realizes `act`. `context` holds the previous system utterance and the
    /// user's own previous utterance, as raw text.
    pub fn realize<R: Rng>(&self, act: &UserAct, context: &[&str], rng: &mut R) -> Result<String> {
        let delex = match self.kind {
            NlgKind::Template => None,
            NlgKind::Retrieval => {
                let tokens: Vec<String> = context.iter().flat_map(|c| self.gazetteer.delexicalize_text(c)).collect();
                let index = self.index.as_ref().ok_or(Error::EmptyIndex)?;
                index.retrieve(act, &tokens).map(|c| c.utterance.clone())
            }
            NlgKind::Generation => self
                .lm
                .as_ref()
                .and_then(|lm| lm.generate(act, 0.0, rng))
                .filter(|text| mentions_every_value(text, act)),
        };
        match delex {
            Some(d) => lexicalize(&d, act.slots(), None),
            None => {
                debug!("{:?} NLG has nothing for {act}; using templates", self.kind);
                self.templates.render_user(act, rng)
            }
        }
    }
}

/// Whether a generated utterance carries every value the act holds.
fn mentions_every_value(delex: &str, act: &UserAct) -> bool {
    if act.kind == UserActKind::RequestInfo {
        return act.slots().keys().all(|s| delex.contains(request_word(*s).split(' ').next().unwrap_or("")));
    }
    let present: Vec<&str> = delex.split(' ').filter_map(placeholder).collect();
    act.slots()
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .all(|(s, _)| present.contains(&s.as_str()))
}
