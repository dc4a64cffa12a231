use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::act::{SystemAct, UserAct};
use super::goal::Goal;
use super::state::{DialogState, Outcome};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Act {
    User(UserAct),
    System(SystemAct),
}

/// The coarse system act categories of corpus annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NativeCategory {
    Inform,
    Request,
    BookInform,
    Select,
    Recommend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    /// Normalized text; tokens are separated by single spaces.
    pub utterance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<Act>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub native: Vec<NativeCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<DialogState>,
}

impl Turn {
    pub fn user(utterance: impl Into<String>, act: Option<UserAct>) -> Self {
        Turn {
            speaker: Speaker::User,
            utterance: utterance.into(),
            act: act.map(Act::User),
            native: Vec::new(),
            state: None,
        }
    }

    pub fn system(utterance: impl Into<String>, act: SystemAct) -> Self {
        Turn {
            speaker: Speaker::System,
            utterance: utterance.into(),
            act: Some(Act::System(act)),
            native: Vec::new(),
            state: None,
        }
    }

    pub fn with_state(mut self, state: DialogState) -> Self {
        self.state = Some(state);
        self
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.utterance.split_whitespace()
    }

    pub fn user_act(&self) -> Option<&UserAct> {
        match &self.act {
            Some(Act::User(a)) => Some(a),
            _ => None,
        }
    }

    pub fn system_act(&self) -> Option<&SystemAct> {
        match &self.act {
            Some(Act::System(a)) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialog {
    pub id: String,
    pub goal: Goal,
    pub turns: Vec<Turn>,
    pub outcome: Outcome,
}

impl Dialog {
    pub fn user_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.speaker == Speaker::User)
    }

    pub fn system_turn_count(&self) -> usize {
        self.turns.iter().filter(|t| t.speaker == Speaker::System).count()
    }

    /// Speakers alternate and the user opens.
    pub fn is_well_formed(&self) -> bool {
        self.turns.iter().enumerate().all(|(i, t)| {
            t.speaker
                == if i % 2 == 0 {
                    Speaker::User
                } else {
                    Speaker::System
                }
        })
    }
}

/// Writes dialogs as one JSON object per line.
pub fn write_transcripts<W: Write>(mut out: W, dialogs: &[Dialog]) -> Result<()> {
    for d in dialogs {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_transcripts<R: BufRead>(input: R) -> Result<Vec<Dialog>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
