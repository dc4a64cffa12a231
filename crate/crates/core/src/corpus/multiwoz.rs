//! Reading MultiWOZ-2.0-style `data.json` files.
//!
//! Only dialogs whose goal involves the restaurant domain and no other domain
//! are kept. System turns get their inline `dialog_act` annotation mapped both
//! onto the coarse native categories and onto the six system acts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domain::{
    Booking, ClockTime, Dialog, Goal, NativeCategory, Outcome, Slot, SlotMap, Speaker, Subtask,
    SystemAct, SystemActKind, Turn, Weekday,
};
use crate::error::{Error, Result};
use crate::text::{normalize, normalize_value};

const DOMAINS: &[&str] = &[
    "restaurant", "hotel", "attraction", "train", "taxi", "hospital", "police",
];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawDialog {
    pub goal: RawGoal,
    pub log: Vec<RawTurn>,
}

/// Goal record; any domain not listed is kept as raw JSON.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawGoal {
    #[serde(default)]
    pub restaurant: RawDomainGoal,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub message: Vec<String>,
    #[serde(flatten)]
    pub other: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawDomainGoal {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fail_info: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reqt: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub book: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fail_book: BTreeMap<String, Value>,
}

impl RawDomainGoal {
    pub fn is_empty(&self) -> bool {
        self.info.is_empty() && self.fail_info.is_empty() && self.reqt.is_empty() && self.book.is_empty()
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawTurn {
    pub text: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dialog_act: BTreeMap<String, Vec<(String, String)>>,
}

fn non_empty_domain(v: &Value) -> bool {
    v.as_object().is_some_and(|o| !o.is_empty())
}

/// Parses a corpus file and keeps restaurant-only dialogs, ordered by id.
pub fn load_corpus(path: &Path) -> Result<Vec<Dialog>> {
    let raw = std::fs::read_to_string(path)?;
    parse_corpus(&raw)
}

pub fn parse_corpus(json: &str) -> Result<Vec<Dialog>> {
    let parsed: BTreeMap<String, RawDialog> =
        serde_json::from_str(json).map_err(|e| Error::CorpusParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let mut out = Vec::new();
    for (id, raw) in parsed {
        let other_domain = raw
            .goal
            .other
            .iter()
            .any(|(k, v)| DOMAINS.contains(&k.as_str()) && non_empty_domain(v));
        if raw.goal.restaurant.is_empty() || other_domain {
            continue;
        }
        let goal = convert_goal(&id, &raw.goal.restaurant)?;
        let turns = raw
            .log
            .iter()
            .enumerate()
            .map(|(i, t)| convert_turn(i, t))
            .collect();
        out.push(Dialog {
            id: id.trim_end_matches(".json").to_string(),
            goal,
            turns,
            outcome: Outcome::Ongoing,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(out)
}

fn informable(key: &str) -> Option<Slot> {
    match key {
        "food" => Some(Slot::Food),
        "area" => Some(Slot::Area),
        "pricerange" | "price" => Some(Slot::Pricerange),
        "name" => Some(Slot::Name),
        _ => None,
    }
}

fn value_str(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Converts a native restaurant goal. A `fail_info` block is what the user asks
/// for first; `info` holds the values they fall back to.
pub fn convert_goal(id: &str, raw: &RawDomainGoal) -> Result<Goal> {
    let slots = |m: &BTreeMap<String, String>| -> SlotMap {
        m.iter()
            .filter_map(|(k, v)| Some((informable(k)?, normalize_value(v))))
            .filter(|(_, v)| !v.is_empty() && v != "dontcare")
            .collect()
    };
    let info = slots(&raw.info);
    let fail = slots(&raw.fail_info);
    let (constraints, relaxations) = if fail.is_empty() {
        (info, SlotMap::new())
    } else {
        let relax = info
            .iter()
            .filter(|(k, v)| fail.get(k) != Some(*v))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        let mut c = info.clone();
        c.extend(fail);
        (c, relax)
    };
    let requestables: BTreeSet<Slot> = raw
        .reqt
        .iter()
        .filter_map(|r| match r.as_str() {
            "address" => Some(Slot::Address),
            "phone" => Some(Slot::Phone),
            "postcode" => Some(Slot::Postcode),
            _ => None,
        })
        .collect();
    let booking = if raw.book.is_empty() {
        None
    } else {
        let get = |k: &str| raw.book.get(k).and_then(value_str);
        let people = get("people").and_then(|p| p.trim().parse().ok());
        let day = get("day").and_then(|d| d.parse::<Weekday>().ok());
        let time = get("time").and_then(|t| t.parse::<ClockTime>().ok());
        match (people, day, time) {
            (Some(people), Some(day), Some(time)) => Some(Booking { people, day, time }),
            _ => None,
        }
    };
    let failed_time = booking.and(
        raw.fail_book
            .get("time")
            .and_then(value_str)
            .and_then(|t| t.parse::<ClockTime>().ok()),
    );
    let mut requestables = requestables;
    if requestables.is_empty() && booking.is_none() {
        // A bare search goal still needs something to ask for.
        requestables.insert(Slot::Phone);
    }
    let mut subtasks = Vec::new();
    if !requestables.is_empty() {
        subtasks.push(Subtask::AskInfo);
    }
    if booking.is_some() {
        subtasks.push(Subtask::MakeReservation);
    }
    let goal = Goal {
        id: id.trim_end_matches(".json").to_string(),
        constraints,
        relaxations,
        requestables,
        booking,
        failed_time,
        subtasks,
    };
    goal.validate()?;
    Ok(goal)
}

fn convert_turn(index: usize, raw: &RawTurn) -> Turn {
    let utterance = normalize(&raw.text);
    if index.is_multiple_of(2) {
        return Turn::user(utterance, None);
    }
    let (native, act) = map_system_acts(&raw.dialog_act);
    Turn {
        speaker: Speaker::System,
        utterance,
        act: act.map(crate::domain::Act::System),
        native,
        state: None,
    }
}

fn native_slot(name: &str) -> Option<Slot> {
    match name {
        "Food" => Some(Slot::Food),
        "Area" => Some(Slot::Area),
        "Price" => Some(Slot::Pricerange),
        "Name" => Some(Slot::Name),
        "Addr" => Some(Slot::Address),
        "Phone" => Some(Slot::Phone),
        "Post" => Some(Slot::Postcode),
        "Ref" => Some(Slot::Reference),
        "People" => Some(Slot::People),
        "Day" => Some(Slot::Day),
        "Time" => Some(Slot::Time),
        _ => None,
    }
}

/// Maps native `Domain-Intent` acts onto coarse categories and one system act.
pub fn map_system_acts(
    acts: &BTreeMap<String, Vec<(String, String)>>,
) -> (Vec<NativeCategory>, Option<SystemAct>) {
    let mut categories = BTreeSet::new();
    let mut best: Option<(u8, SystemAct)> = None;
    for (key, pairs) in acts {
        let Some((domain, intent)) = key.split_once('-') else {
            continue;
        };
        let domain = domain.to_lowercase();
        if domain != "restaurant" && domain != "booking" && domain != "general" {
            continue;
        }
        let slots: SlotMap = pairs
            .iter()
            .filter_map(|(s, v)| Some((native_slot(s)?, normalize_value(v))))
            .map(|(s, v)| (s, if v == "?" || v == "none" { String::new() } else { v }))
            .collect();
        let category = match (domain.as_str(), intent) {
            ("restaurant", "Inform" | "NoOffer") => Some(NativeCategory::Inform),
            ("restaurant" | "booking", "Request") => Some(NativeCategory::Request),
            ("booking", "Book" | "NoBook" | "Inform") => Some(NativeCategory::BookInform),
            ("restaurant", "Select") => Some(NativeCategory::Select),
            ("restaurant", "Recommend") => Some(NativeCategory::Recommend),
            _ => None,
        };
        categories.extend(category);
        let has_name = slots.contains_key(&Slot::Name);
        let mapped = match (domain.as_str(), intent) {
            ("booking", "Book") => Some((7, SystemActKind::InformReservationResult)),
            ("booking", "NoBook") => Some((7, SystemActKind::InformReservationResult)),
            ("booking", "Request") => Some((6, SystemActKind::AskReservationInfo)),
            ("restaurant", "Request") => Some((5, SystemActKind::AskType)),
            ("restaurant", "Recommend" | "Select" | "NoOffer") => Some((4, SystemActKind::PresentResult)),
            ("restaurant", "Inform") if has_name => Some((4, SystemActKind::PresentResult)),
            ("restaurant", "Inform") => Some((3, SystemActKind::ProvideInfo)),
            ("booking", "Inform") => Some((2, SystemActKind::AskReservationInfo)),
            ("general", "bye") => Some((1, SystemActKind::Goodbye)),
            _ => None,
        };
        if let Some((rank, kind)) = mapped {
            let slots = match kind {
                SystemActKind::AskType | SystemActKind::AskReservationInfo => {
                    slots.into_keys().map(|s| (s, String::new())).collect()
                }
                _ => slots,
            };
            if best.as_ref().is_none_or(|(r, _)| rank > *r) {
                best = Some((rank, SystemAct::new(kind, slots)));
            }
        }
    }
    (categories.into_iter().collect(), best.map(|(_, a)| a))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"{
      "SNG0001.json": {
        "goal": {"restaurant": {"info": {"food": "italian", "area": "centre"}, "reqt": ["address"]}, "hotel": {}, "message": []},
        "log": [
          {"text": "I want an Italian place in the centre.", "metadata": {}},
          {"text": "Caffe Uno is a nice one.", "dialog_act": {"Restaurant-Inform": [["Name", "caffe uno"]]}}
        ]
      },
      "SNG0002.json": {
        "goal": {"restaurant": {}, "hotel": {"info": {"area": "north"}}},
        "log": [{"text": "I need a hotel."}]
      },
      "SNG0003.json": {
        "goal": {"restaurant": {"info": {"food": "indian"}, "book": {"people": "5", "day": "monday", "time": "12:15", "invalid": false}, "fail_book": {}}},
        "log": [
          {"text": "Indian food please."},
          {"text": "How many people?", "dialog_act": {"Booking-Request": [["People", "?"]]}}
        ]
      }
    }"#;

    #[test]
    fn keeps_restaurant_dialogs_only() {
        let dialogs = parse_corpus(FIXTURE).unwrap();
        let ids: Vec<_> = dialogs.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, vec!["SNG0001", "SNG0003"]);
        assert!(dialogs.iter().all(Dialog::is_well_formed));
        let present = dialogs[0].turns[1].system_act().unwrap();
        assert_eq!(present.kind, SystemActKind::PresentResult);
        assert_eq!(dialogs[0].turns[1].native, vec![NativeCategory::Inform]);
        assert_eq!(dialogs[1].turns[1].system_act().unwrap().kind, SystemActKind::AskReservationInfo);
        assert_eq!(dialogs[1].goal.booking.unwrap().people, 5);
    }

    #[test]
    fn hotel_only_is_an_empty_corpus() {
        let json = r#"{"a.json": {"goal": {"restaurant": {}, "hotel": {"info": {"area": "north"}}}, "log": []}}"#;
        assert!(matches!(parse_corpus(json), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn malformed_json_reports_position() {
        match parse_corpus("{\n  \"a\": [1,\n") {
            Err(Error::CorpusParse { line, .. }) => assert!(line >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn failed_info_becomes_constraints_with_relaxation() {
        let raw = RawDomainGoal {
            info: [("food".into(), "italian".into()), ("area".into(), "east".into())].into(),
            fail_info: [("food".into(), "catalan".into()), ("area".into(), "east".into())].into(),
            reqt: vec!["phone".into()],
            ..Default::default()
        };
        let g = convert_goal("x", &raw).unwrap();
        assert_eq!(g.constraints.get(&Slot::Food).unwrap(), "catalan");
        assert_eq!(g.relaxations, [(Slot::Food, "italian".to_string())].into());
    }
}
