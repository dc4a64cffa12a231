use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Slot, SlotMap, SystemAct, SystemActKind, UserAct, UserActKind};
use crate::error::{Error, Result};
use crate::text::{join_list, normalize, placeholder};

const USER_BANK: &str = include_str!("../../data/user_templates.tsv");
const SYSTEM_BANK: &str = include_str!("../../data/system_templates.tsv");

/// `<request>`: the details a user asks for, as a phrase list.
pub const REQUEST: &str = "request";
/// `<slots>`: the details a system asks for, as a phrase list.
pub const SLOTS: &str = "slots";
/// `<info>`: the details a system provides, as clauses.
pub const INFO: &str = "info";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Template {
    text: String,
    placeholders: BTreeSet<String>,
}

/// Delexicalized templates keyed by act kind name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateBank {
    entries: BTreeMap<String, Vec<Template>>,
}

/// What a template may use and what it must mention.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fill {
    pub values: BTreeMap<String, String>,
    pub required: BTreeSet<String>,
}

impl Fill {
    fn set(&mut self, key: &str, value: String, required: bool) {
        if required {
            self.required.insert(key.to_string());
        }
        self.values.insert(key.to_string(), value);
    }
}

impl TemplateBank {
    /// Parses `act_kind<TAB>template` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Vec<Template>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((act, template)) = line.split_once('\t') else {
                return Err(Error::CorpusParse {
                    line: i + 1,
                    column: 1,
                    message: "expected `act_kind<TAB>template`".into(),
                });
            };
            let text = normalize(template);
            let placeholders = text
                .split(' ')
                .filter_map(placeholder)
                .map(str::to_string)
                .collect();
            entries.entry(act.trim().to_string()).or_default().push(Template { text, placeholders });
        }
        Ok(TemplateBank { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        TemplateBank::parse(&std::fs::read_to_string(path)?)
    }

    pub fn bundled_user() -> Self {
        TemplateBank::parse(USER_BANK).expect("bundled user templates parse")
    }

    pub fn bundled_system() -> Self {
        TemplateBank::parse(SYSTEM_BANK).expect("bundled system templates parse")
    }

    /// Act kinds with fewer than two templates.
    pub fn thin_acts(&self, kinds: &[&str]) -> Vec<String> {
        kinds
            .iter()
            .filter(|k| self.entries.get(**k).map_or(0, Vec::len) < 2)
            .map(|k| k.to_string())
            .collect()
    }

    pub fn templates(&self, act: &str) -> impl Iterator<Item = &str> {
        self.entries.get(act).into_iter().flatten().map(|t| t.text.as_str())
    }

    fn fillable<'a>(&'a self, act: &str, fill: &'a Fill) -> impl Iterator<Item = &'a Template> + 'a {
        self.entries.get(act).into_iter().flatten().filter(move |t| {
            t.placeholders.iter().all(|p| fill.values.contains_key(p)) && fill.required.is_subset(&t.placeholders)
        })
    }

    /// A uniformly drawn fillable template, filled in.
    pub fn render<R: Rng>(&self, act: &str, fill: &Fill, rng: &mut R) -> Result<String> {
        let options: Vec<&Template> = self.fillable(act, fill).collect();
        let t = options.choose(rng).ok_or_else(|| no_template(act, fill))?;
        Ok(substitute(&t.text, &fill.values))
    }

    /// The first fillable template in file order, filled in.
    pub fn render_first(&self, act: &str, fill: &Fill) -> Result<String> {
        let t = self.fillable(act, fill).next().ok_or_else(|| no_template(act, fill))?;
        Ok(substitute(&t.text, &fill.values))
    }

    pub fn render_user<R: Rng>(&self, act: &UserAct, rng: &mut R) -> Result<String> {
        self.render(act.kind.as_str(), &user_fill(act), rng)
    }
}

fn no_template(act: &str, fill: &Fill) -> Error {
    Error::NoTemplate {
        act: act.to_string(),
        slots: fill.values.keys().cloned().collect(),
    }
}

fn substitute(template: &str, values: &BTreeMap<String, String>) -> String {
    template
        .split(' ')
        .map(|tok| match placeholder(tok) {
            Some(p) => values.get(p).map(String::as_str).unwrap_or(tok),
            None => tok,
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// How a requested detail is named in a user request.
pub fn request_word(slot: Slot) -> &'static str {
    match slot {
        Slot::Phone => "phone number",
        Slot::Reference => "reference number",
        other => other.as_str(),
    }
}

/// Every value slot of a user act is required; requests become `<request>`.
pub fn user_fill(act: &UserAct) -> Fill {
    let mut fill = Fill::default();
    if act.kind == UserActKind::RequestInfo {
        let words: Vec<&str> = act.slots().keys().map(|s| request_word(*s)).collect();
        if !words.is_empty() {
            fill.set(REQUEST, join_list(&words), true);
        }
        return fill;
    }
    for (slot, value) in act.slots() {
        if !value.is_empty() {
            fill.set(slot.as_str(), value.clone(), true);
        }
    }
    fill
}

/// Values a system act may mention; the act's key detail is required.
pub fn system_fill(act: &SystemAct) -> Fill {
    let mut fill = Fill::default();
    match act.kind {
        SystemActKind::AskType | SystemActKind::AskReservationInfo => {
            let phrases: Vec<&str> = act.slots.keys().map(|s| s.phrase()).collect();
            if !phrases.is_empty() {
                fill.set(SLOTS, join_list(&phrases), true);
            }
        }
        SystemActKind::ProvideInfo => {
            let clauses: Vec<String> = act
                .slots
                .iter()
                .filter(|(s, _)| s.category() == crate::domain::SlotCategory::Requestable)
                .map(|(s, v)| format!("the {} is {v}", s.phrase()))
                .collect();
            let refs: Vec<&str> = clauses.iter().map(String::as_str).collect();
            if !refs.is_empty() {
                fill.set(INFO, join_list(&refs), true);
            }
            for (s, v) in &act.slots {
                fill.set(s.as_str(), v.clone(), false);
            }
        }
        _ => {
            for (s, v) in &act.slots {
                let key = matches!(s, Slot::Name | Slot::Reference);
                fill.set(s.as_str(), v.clone(), key);
            }
        }
    }
    fill
}

/// Slot values an act carries, with empty request markers dropped.
pub fn slot_values(slots: &SlotMap) -> BTreeMap<String, String> {
    slots
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(s, v)| (s.as_str().to_string(), v.clone()))
        .collect()
}
