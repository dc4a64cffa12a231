//! Deterministic generator of a MultiWOZ-2.0-format restaurant corpus.
//!
//! A scripted wizard and a scripted customer talk through sampled goals with
//! loosely human phrasing. The output is written in the native file layout so
//! it goes through exactly the same loading path as real data.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::db::{booking_available, Ontology, RestaurantDb};
use super::goals::random_time;
use super::multiwoz::{RawDialog, RawDomainGoal, RawGoal, RawTurn};
use crate::domain::{ClockTime, Restaurant, Slot, SlotMap, Weekday};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub restaurant_dialogs: usize,
    pub distractor_dialogs: usize,
    /// Share of goals that ask for details rather than book.
    pub ask_info_share: f64,
    pub name_goal_rate: f64,
    pub no_match_rate: f64,
    pub failed_booking_rate: f64,
    pub anything_else_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            restaurant_dialogs: 1310,
            distractor_dialogs: 190,
            ask_info_share: 2.0 / 3.0,
            name_goal_rate: 0.1,
            no_match_rate: 0.1,
            failed_booking_rate: 0.2,
            anything_else_rate: 0.04,
            seed: 2019,
        }
    }
}

/// Dialogs keyed by file-style id (`SNG0001.json`), in the native JSON shape.
pub fn synthesize(db: &RestaurantDb, ontology: &Ontology, config: &SynthConfig) -> BTreeMap<String, RawDialog> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let total = config.restaurant_dialogs + config.distractor_dialogs;
    let mut kinds: Vec<bool> = (0..total).map(|i| i < config.restaurant_dialogs).collect();
    kinds.shuffle(&mut rng);
    let mut out = BTreeMap::new();
    for (i, restaurant) in kinds.into_iter().enumerate() {
        let id = format!("SNG{:04}.json", i + 1);
        let dialog = if restaurant {
            let goal = sample_raw_goal(db, ontology, config, &mut rng);
            Conversation::new(db, &goal, config, &mut rng).run()
        } else {
            hotel_dialog(&mut rng)
        };
        out.insert(id, dialog);
    }
    out
}

/// Writes `data.json` and `restaurant_db.json` into `dir`.
pub fn write_corpus(dir: &Path, db: &RestaurantDb, ontology: &Ontology, config: &SynthConfig) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let dialogs = synthesize(db, ontology, config);
    std::fs::write(dir.join("data.json"), serde_json::to_string_pretty(&dialogs)?)?;
    std::fs::write(dir.join("restaurant_db.json"), serde_json::to_string_pretty(db.all())?)?;
    Ok(())
}

fn sample_raw_goal<R: Rng>(db: &RestaurantDb, ontology: &Ontology, config: &SynthConfig, rng: &mut R) -> RawDomainGoal {
    let r = db.all().choose(rng).expect("non-empty db");
    let mut goal = RawDomainGoal::default();
    if rng.gen_bool(config.name_goal_rate) {
        goal.info.insert("name".into(), r.name.clone());
    } else {
        let mut slots = Slot::SEARCH.to_vec();
        slots.shuffle(rng);
        let k = *[3, 3, 3, 2, 2, 1].choose(rng).unwrap();
        for s in &slots[..k] {
            goal.info.insert(s.as_str().into(), r.value(*s).unwrap().into());
        }
        if rng.gen_bool(config.no_match_rate) {
            let mut fail = goal.info.clone();
            let mut foods = ontology.food.clone();
            foods.shuffle(rng);
            let unmatched = foods.into_iter().find(|f| {
                let mut c: SlotMap = fail
                    .iter()
                    .filter_map(|(k, v)| Some((k.parse::<Slot>().ok()?, v.clone())))
                    .collect();
                c.insert(Slot::Food, f.clone());
                db.query(&c).is_empty()
            });
            if let Some(food) = unmatched {
                fail.insert("food".into(), food);
                goal.fail_info = fail;
            }
        }
    }
    let ask = rng.gen_bool(config.ask_info_share);
    if ask || rng.gen_bool(0.1) {
        let mut reqt = ["address", "phone", "postcode"];
        reqt.shuffle(rng);
        let k = *[1, 1, 1, 1, 2, 2, 2, 3].choose(rng).unwrap();
        goal.reqt = reqt[..k].iter().map(|s| s.to_string()).collect();
    }
    if !ask {
        let people = rng.gen_range(1..=8);
        let failed = rng.gen_bool(config.failed_booking_rate);
        let (day, time, fail_time) = if failed {
            let day = *[Weekday::Friday, Weekday::Saturday].choose(rng).unwrap();
            let bad = random_time(rng, 18, 20);
            let good = loop {
                let t = random_time(rng, 11, 22);
                if booking_available(day, t) {
                    break t;
                }
            };
            (day, good, Some(bad))
        } else {
            loop {
                let day = *Weekday::ALL.choose(rng).unwrap();
                let t = random_time(rng, 11, 22);
                if booking_available(day, t) {
                    break (day, t, None);
                }
            }
        };
        goal.book = BTreeMap::from([
            ("people".to_string(), json!(people.to_string())),
            ("day".to_string(), json!(day.as_str())),
            ("time".to_string(), json!(time.to_string())),
            ("invalid".to_string(), json!(false)),
            ("pre_invalid".to_string(), json!(true)),
        ]);
        if let Some(t) = fail_time {
            goal.fail_book.insert("time".into(), json!(t.to_string()));
        }
    }
    goal
}

fn hotel_dialog<R: Rng>(rng: &mut R) -> RawDialog {
    let area = *["north", "south", "east", "west", "centre"].choose(rng).unwrap();
    let stars = rng.gen_range(2..=5);
    let mut goal = RawGoal::default();
    goal.other.insert(
        "hotel".into(),
        json!({"info": {"area": area, "stars": stars.to_string()}, "reqt": ["phone"]}),
    );
    for d in ["attraction", "train", "taxi", "hospital", "police"] {
        goal.other.insert(d.into(), json!({}));
    }
    let user = |t: &str| RawTurn {
        text: t.to_string(),
        dialog_act: BTreeMap::new(),
    };
    let system = |t: &str, act: &str| RawTurn {
        text: t.to_string(),
        dialog_act: BTreeMap::from([(act.to_string(), vec![("none".to_string(), "none".to_string())])]),
    };
    RawDialog {
        goal,
        log: vec![
            user(&format!("I need a place to stay in the {area} with {stars} stars.")),
            system("I have several guesthouses there. Do you need parking?", "Hotel-Request"),
            user("No, I don't need parking. Can I get the phone number?"),
            system("Sure, their phone number is 01223312843.", "Hotel-Inform"),
            user("Thanks, that's all."),
            system("Have a good stay!", "general-bye"),
        ],
    }
}

fn pick<'a, R: Rng>(rng: &mut R, options: &[&'a str]) -> &'a str {
    options.choose(rng).copied().unwrap_or("")
}

fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in values {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn english_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

fn price_phrase<R: Rng>(rng: &mut R, price: &str) -> String {
    match price {
        "cheap" => pick(rng, &["cheap", "cheap", "inexpensive"]).into(),
        "expensive" => pick(rng, &["expensive", "expensive", "upscale", "pricey"]).into(),
        "moderate" => pick(rng, &["moderately priced", "moderately priced", "mid range"]).into(),
        other => other.into(),
    }
}

fn area_phrase<R: Rng>(rng: &mut R, area: &str) -> String {
    let t = if area == "centre" {
        pick(rng, &["in the centre", "in the centre of town", "in the city centre", "in the center", "in the centre area"])
    } else {
        pick(rng, &["in the {a}", "in the {a} of town", "in the {a} part of town", "on the {a} side of town", "in the {a} area"])
    };
    fill(t, &[("a", area)])
}

fn article(word: &str) -> &'static str {
    if word.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

/// A noun phrase naming the wanted kind of restaurant.
fn restaurant_np<R: Rng>(rng: &mut R, slots: &SlotMap) -> String {
    let food = slots.get(&Slot::Food);
    let area = slots.get(&Slot::Area).map(|a| area_phrase(rng, a));
    let price = slots.get(&Slot::Pricerange).map(|p| price_phrase(rng, p));
    let mut np = if rng.gen_bool(0.7) || food.is_none() {
        let head = match (&price, food) {
            (Some(p), Some(f)) => format!("{p} {f} restaurant"),
            (Some(p), None) => format!("{p} restaurant"),
            (None, Some(f)) => format!("{f} restaurant"),
            (None, None) => pick(rng, &["restaurant", "place to eat", "place to dine"]).to_string(),
        };
        format!("{} {head}", article(&head))
    } else {
        let f = food.unwrap();
        let head = match &price {
            Some(p) => format!("{} {p} place", article(p)),
            None => pick(rng, &["a place", "a restaurant", "somewhere"]).to_string(),
        };
        let serves = pick(rng, &["that serves {f} food", "serving {f} food", "with {f} food", "that has {f} cuisine"]);
        format!("{head} {}", fill(serves, &[("f", f)]))
    };
    if let Some(a) = area {
        np = format!("{np} {a}");
    }
    np
}

/// The act the scripted customer performs, before it is worded.
#[derive(Debug, Clone, PartialEq)]
enum UserMove {
    Inform(SlotMap),
    Change(SlotMap),
    Else,
    Request(Vec<Slot>),
    Book(SlotMap),
    ChangeTime(String),
    Bye,
}

struct Conversation<'a, R: Rng> {
    db: &'a RestaurantDb,
    raw: &'a RawDomainGoal,
    config: &'a SynthConfig,
    rng: &'a mut R,
    target: SlotMap,
    fallback: SlotMap,
    relaxed: bool,
    requests: Vec<Slot>,
    booking: Option<SlotMap>,
    failed_time: Option<String>,
    told: SlotMap,
    wizard_known: SlotMap,
    wizard_booking: SlotMap,
    presented: Option<&'a Restaurant>,
    offered: BTreeSet<String>,
    asked_else: bool,
    booked: bool,
    log: Vec<RawTurn>,
}

fn informables(m: &BTreeMap<String, String>) -> SlotMap {
    m.iter()
        .filter_map(|(k, v)| Some((k.parse::<Slot>().ok()?, v.clone())))
        .collect()
}

impl<'a, R: Rng> Conversation<'a, R> {
    fn new(db: &'a RestaurantDb, raw: &'a RawDomainGoal, config: &'a SynthConfig, rng: &'a mut R) -> Self {
        let info = informables(&raw.info);
        let (target, fallback) = if raw.fail_info.is_empty() {
            (info.clone(), info)
        } else {
            (informables(&raw.fail_info), info)
        };
        let requests = raw
            .reqt
            .iter()
            .filter_map(|r| r.parse().ok())
            .collect();
        let value = |m: &BTreeMap<String, Value>, k: &str| m.get(k).and_then(|v| v.as_str()).map(str::to_string);
        let booking = (!raw.book.is_empty()).then(|| {
            [Slot::People, Slot::Day, Slot::Time]
                .into_iter()
                .filter_map(|s| Some((s, value(&raw.book, s.as_str())?)))
                .collect()
        });
        let failed_time = value(&raw.fail_book, "time");
        Conversation {
            db,
            raw,
            config,
            rng,
            target,
            fallback,
            relaxed: false,
            requests,
            booking,
            failed_time,
            told: SlotMap::new(),
            wizard_known: SlotMap::new(),
            wizard_booking: SlotMap::new(),
            presented: None,
            offered: BTreeSet::new(),
            asked_else: false,
            booked: false,
            log: Vec::new(),
        }
    }

    fn run(mut self) -> RawDialog {
        let mut slots: Vec<Slot> = self.target.keys().copied().collect();
        slots.shuffle(self.rng);
        let k = if slots.len() > 1 && self.rng.gen_bool(0.35) {
            self.rng.gen_range(1..slots.len())
        } else {
            slots.len()
        };
        let first: SlotMap = slots[..k].iter().map(|s| (*s, self.target[s].clone())).collect();
        let mut mv = UserMove::Inform(first);
        for _ in 0..14 {
            let text = self.word_user(&mv);
            self.log.push(RawTurn {
                text,
                dialog_act: BTreeMap::new(),
            });
            let (text, acts, done) = self.wizard(&mv);
            self.log.push(RawTurn { text, dialog_act: acts });
            if done {
                break;
            }
            mv = self.next_move();
        }
        let mut goal = RawGoal {
            restaurant: self.raw.clone(),
            ..Default::default()
        };
        for d in ["hotel", "attraction", "train", "taxi", "hospital", "police"] {
            goal.other.insert(d.into(), json!({}));
        }
        RawDialog { goal, log: self.log }
    }

    fn current_target(&self) -> SlotMap {
        if self.relaxed {
            self.fallback.clone()
        } else {
            self.target.clone()
        }
    }

    fn next_move(&mut self) -> UserMove {
        let last = self.log.last().map(|t| t.dialog_act.clone()).unwrap_or_default();
        let has = |k: &str| last.contains_key(k);
        if has("Restaurant-NoOffer") {
            let change: SlotMap = self
                .fallback
                .iter()
                .filter(|(k, v)| self.target.get(k) != Some(*v))
                .map(|(k, v)| (*k, v.clone()))
                .collect();
            self.relaxed = true;
            return if change.is_empty() { UserMove::Bye } else { UserMove::Change(change) };
        }
        if has("Restaurant-Request") {
            let wanted: SlotMap = last["Restaurant-Request"]
                .iter()
                .filter_map(|(s, _)| native_to_slot(s))
                .filter_map(|s| Some((s, self.current_target().get(&s)?.clone())))
                .collect();
            if !wanted.is_empty() {
                return UserMove::Inform(wanted);
            }
            let rest: SlotMap = self
                .current_target()
                .into_iter()
                .filter(|(k, _)| !self.told.contains_key(k))
                .collect();
            return if rest.is_empty() { UserMove::Bye } else { UserMove::Inform(rest) };
        }
        if has("Booking-NoBook") {
            let t = self.booking.as_ref().and_then(|b| b.get(&Slot::Time).cloned()).unwrap_or_default();
            return UserMove::ChangeTime(t);
        }
        if has("Booking-Request") {
            let b = self.booking.clone().unwrap_or_default();
            let wanted: SlotMap = last["Booking-Request"]
                .iter()
                .filter_map(|(s, _)| native_to_slot(s))
                .filter_map(|s| Some((s, self.booking_value(&b, s)?)))
                .collect();
            return UserMove::Book(if wanted.is_empty() { self.full_booking() } else { wanted });
        }
        let presented_fits = self
            .presented
            .is_some_and(|r| r.matches(&self.current_target()));
        if self.presented.is_some() && !presented_fits {
            let rest: SlotMap = self
                .current_target()
                .into_iter()
                .filter(|(k, v)| self.wizard_known.get(k) != Some(v))
                .collect();
            if !rest.is_empty() {
                return UserMove::Inform(rest);
            }
        }
        if (has("Restaurant-Inform") || has("Restaurant-Recommend"))
            && last.get("Restaurant-Inform").is_none_or(|p| p.iter().any(|(s, _)| s == "Name"))
            && !self.asked_else
            && self.rng.gen_bool(self.config.anything_else_rate)
        {
            self.asked_else = true;
            return UserMove::Else;
        }
        if !self.requests.is_empty() && (self.booking.is_none() || self.booked || self.rng.gen_bool(0.5)) {
            let n = if self.requests.len() > 1 && self.rng.gen_bool(0.3) { 1 } else { self.requests.len() };
            return UserMove::Request(self.requests[..n].to_vec());
        }
        if self.booking.is_some() && !self.booked {
            let full = self.full_booking();
            if self.rng.gen_bool(0.35) {
                let mut keys: Vec<Slot> = full.keys().copied().collect();
                keys.shuffle(self.rng);
                let n = self.rng.gen_range(1..=2);
                return UserMove::Book(keys[..n].iter().map(|k| (*k, full[k].clone())).collect());
            }
            return UserMove::Book(full);
        }
        UserMove::Bye
    }

    fn booking_value(&self, b: &SlotMap, s: Slot) -> Option<String> {
        if s == Slot::Time && !self.wizard_booking.contains_key(&Slot::Time) {
            if let Some(t) = &self.failed_time {
                return Some(t.clone());
            }
        }
        b.get(&s).cloned()
    }

    fn full_booking(&self) -> SlotMap {
        let b = self.booking.clone().unwrap_or_default();
        Slot::BOOKING
            .into_iter()
            .filter(|s| !self.wizard_booking.contains_key(s))
            .filter_map(|s| Some((s, self.booking_value(&b, s)?)))
            .collect()
    }

    fn word_user(&mut self, mv: &UserMove) -> String {
        let rng = &mut *self.rng;
        match mv {
            UserMove::Inform(slots) => {
                self.told.extend(slots.clone());
                let opening = self.log.is_empty();
                if let Some(name) = slots.get(&Slot::Name) {
                    let t = pick(rng, &[
                        "I am looking for a restaurant called {n}.",
                        "Can you give me some information about {n}?",
                        "I'm looking for a particular restaurant. It is called {n}.",
                        "Do you know anything about a place called {n}?",
                        "I need to find {n}, can you help?",
                        "Hi, I'm trying to find the restaurant {n}.",
                    ]);
                    return fill(t, &[("n", name)]);
                }
                let greet = if opening {
                    pick(rng, &["", "", "Hi, ", "Hello, ", "Hi there! ", "Good afternoon. ", "Hello. ", "Hey, "])
                } else {
                    pick(rng, &["", "", "", "Sure. ", "Okay, ", "Hmm, "])
                };
                if !opening && (slots.len() == 1 || rng.gen_bool(0.4)) {
                    let parts: Vec<String> = slots.iter().map(|(s, v)| short_answer(rng, *s, v)).collect();
                    return format!("{greet}{}", capitalize_first(&parts.join(" ")));
                }
                let np = restaurant_np(rng, slots);
                let frame = pick(rng, &[
                    "I am looking for {np}.",
                    "I'm looking for {np}.",
                    "Can you help me find {np}?",
                    "I need {np}.",
                    "I would like to find {np}.",
                    "Please find me {np}.",
                    "I'm trying to find {np}.",
                    "Do you know of {np}?",
                    "I want to eat at {np}.",
                    "Is there {np}?",
                    "I'm hoping to find {np}, can you help me with that?",
                    "Could you recommend {np}?",
                    "We are visiting and would love {np}.",
                    "I am hungry, I want {np}.",
                ]);
                format!("{greet}{}", capitalize_first(&fill(frame, &[("np", &np)])))
            }
            UserMove::Change(slots) => {
                let (slot, value) = slots.iter().next().expect("non-empty change");
                let t = match slot {
                    Slot::Food => pick(rng, &[
                        "How about {v} food instead?",
                        "What about {v}?",
                        "Okay, then how about one that serves {v} food?",
                        "Could you try {v} instead?",
                        "Hmm, what about {v} food then?",
                        "Then how about {v}?",
                    ]),
                    Slot::Area => pick(rng, &["What about the {v}?", "How about in the {v} instead?", "Could you try the {v} instead?"]),
                    _ => pick(rng, &["How about a {v} one?", "What about something {v} instead?"]),
                };
                self.told.extend(slots.clone());
                fill(t, &[("v", value)])
            }
            UserMove::Else => pick(rng, &[
                "Is there anything else?",
                "Do you have any other options?",
                "Hmm, could you suggest something else?",
                "Are there any other restaurants like that?",
                "What else do you have?",
                "Is there another one you could recommend?",
            ])
            .into(),
            UserMove::Request(slots) => {
                let words: Vec<String> = slots
                    .iter()
                    .map(|s| match s {
                        Slot::Address => "address".to_string(),
                        Slot::Phone => pick(rng, &["phone number", "phone number", "phone", "telephone number"]).into(),
                        Slot::Postcode => pick(rng, &["postcode", "postcode", "post code"]).into(),
                        other => other.phrase().into(),
                    })
                    .collect();
                let ack = pick(rng, &["", "", "That sounds good. ", "Great. ", "Perfect! ", "Okay. ", "Sounds great, "]);
                let t = pick(rng, &[
                    "Can I get the {l}?",
                    "What is the {l}?",
                    "Could you give me their {l}, please?",
                    "May I have the {l}?",
                    "What's the {l}?",
                    "Can you tell me the {l}?",
                    "I'd like the {l}, please.",
                    "Please give me the {l}.",
                    "Yes, I need the {l}.",
                    "Could I have the {l} for that restaurant?",
                    "I just need the {l}.",
                ]);
                format!("{ack}{}", capitalize_first(&fill(t, &[("l", &english_list(&words))])))
            }
            UserMove::Book(slots) => {
                let people = slots.get(&Slot::People).cloned();
                let day = slots.get(&Slot::Day).map(|d| capitalize(d));
                let time = slots.get(&Slot::Time).map(|t| spoken_time(rng, t));
                let after_request = self.log.last().is_some_and(|t| t.dialog_act.contains_key("Booking-Request"));
                if after_request {
                    let mut parts = Vec::new();
                    if let Some(p) = &people {
                        let t = if p == "1" {
                            pick(rng, &["Just 1 person.", "For 1 person, please."])
                        } else {
                            pick(rng, &["There will be {p} of us.", "{p} people.", "For {p} people, please.", "We are {p} people."])
                        };
                        parts.push(fill(t, &[("p", p)]));
                    }
                    if let Some(d) = &day {
                        parts.push(fill(pick(rng, &["On {d}, please.", "{d}.", "We'd like to go on {d}."]), &[("d", d)]));
                    }
                    if let Some(t) = &time {
                        parts.push(fill(pick(rng, &["At {t}.", "We'd like to come at {t}.", "{t} would be great."]), &[("t", t)]));
                    }
                    return parts.join(" ");
                }
                let people_np = people.as_ref().map(|p| if p == "1" { "1 person".to_string() } else { format!("{p} people") });
                let mut tail = String::new();
                if let Some(p) = &people_np {
                    tail.push_str(&format!(" for {p}"));
                }
                let when: Vec<String> = match (&day, &time) {
                    (Some(d), Some(t)) if rng.gen_bool(0.5) => vec![format!("on {d}"), format!("at {t}")],
                    (Some(d), Some(t)) => vec![format!("at {t}"), format!("on {d}")],
                    (Some(d), None) => vec![format!("on {d}")],
                    (None, Some(t)) => vec![format!("at {t}")],
                    (None, None) => vec![],
                };
                for w in when {
                    tail.push(' ');
                    tail.push_str(&w);
                }
                let ack = pick(rng, &["", "", "Yes, ", "That sounds great. ", "Perfect, ", "Sure, "]);
                let t = pick(rng, &[
                    "please book a table{x}.",
                    "can you book a table{x}?",
                    "I'd like to make a reservation{x}.",
                    "please reserve a table{x}.",
                    "could you book it{x}?",
                    "I want to book a table there{x}.",
                    "book it{x}, please.",
                    "I would like a reservation{x}, please.",
                ]);
                format!("{ack}{}", capitalize_first(&fill(t, &[("x", &tail)])))
            }
            UserMove::ChangeTime(t) => {
                let t = spoken_time(rng, t);
                let frame = pick(rng, &[
                    "How about {t} instead?",
                    "Can you try {t}?",
                    "What about {t}?",
                    "Okay, could you try {t} then?",
                    "Let's try {t} instead.",
                    "Hmm, try {t} then, please.",
                    "Is {t} available?",
                ]);
                fill(frame, &[("t", &t)])
            }
            UserMove::Bye => pick(rng, &[
                "Thank you, goodbye.",
                "That's all I need, thanks!",
                "No, that will be all. Have a nice day.",
                "Thanks for your help!",
                "Great, thank you very much. Bye.",
                "Thank you so much, that's everything.",
                "No thanks, I'm all set. Goodbye!",
                "Perfect, thank you!",
                "Thanks, you've been very helpful.",
                "That is all, thank you.",
                "Nope, that's it. Thanks a lot!",
            ])
            .into(),
        }
    }

    fn wizard(&mut self, mv: &UserMove) -> (String, BTreeMap<String, Vec<(String, String)>>, bool) {
        let mut acts: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        let pair = |s: &str, v: &str| (s.to_string(), v.to_string());
        let text = match mv {
            UserMove::Inform(slots) | UserMove::Change(slots) => {
                if matches!(mv, UserMove::Change(_)) {
                    self.presented = None;
                }
                for (k, v) in slots {
                    if self.wizard_known.get(k) != Some(v) {
                        self.presented = None;
                    }
                    self.wizard_known.insert(*k, v.clone());
                }
                let missing: Vec<Slot> = if self.wizard_known.contains_key(&Slot::Name) {
                    Vec::new()
                } else {
                    Slot::SEARCH.into_iter().filter(|s| !self.wizard_known.contains_key(s)).collect()
                };
                let matches = self.db.query(&self.wizard_known);
                if matches.is_empty() {
                    acts.insert(
                        "Restaurant-NoOffer".into(),
                        self.wizard_known.iter().map(|(k, v)| pair(native_name(*k), v)).collect(),
                    );
                    self.no_offer_text()
                } else if !missing.is_empty() && self.rng.gen_bool(0.85) {
                    let n = if missing.len() > 1 && self.rng.gen_bool(0.4) { 2 } else { 1 };
                    let ask: Vec<Slot> = missing[..n].to_vec();
                    acts.insert("Restaurant-Request".into(), ask.iter().map(|s| pair(native_name(*s), "?")).collect());
                    self.request_text(&ask, matches.len())
                } else {
                    let r = *matches.choose(self.rng).unwrap();
                    self.present(r, matches.len(), &mut acts)
                }
            }
            UserMove::Else => {
                let known = self.wizard_known.clone();
                let others: Vec<&'a Restaurant> = self
                    .db
                    .query(&known)
                    .into_iter()
                    .filter(|r| !self.offered.contains(&r.name))
                    .collect();
                match others.choose(self.rng) {
                    Some(&r) => self.present(r, others.len(), &mut acts),
                    None => {
                        let name = self.presented.map(|r| r.name.clone()).unwrap_or_default();
                        acts.insert("Restaurant-Inform".into(), vec![pair("Name", &name)]);
                        fill(
                            pick(self.rng, &[
                                "I'm afraid {n} is the only one that matches. Would you like more information about it?",
                                "Sorry, {n} is the only restaurant that fits your request.",
                            ]),
                            &[("n", &name)],
                        )
                    }
                }
            }
            UserMove::Request(slots) => {
                let r = self.presented.expect("request after presentation");
                let mut parts = Vec::new();
                let mut pairs = Vec::new();
                for s in slots {
                    let v = r.value(*s).unwrap_or_default();
                    pairs.push(pair(native_name(*s), v));
                    let t = match s {
                        Slot::Address => pick(self.rng, &["the address is {v}", "they are located at {v}", "it is at {v}"]),
                        Slot::Phone => pick(self.rng, &["the phone number is {v}", "you can reach them at {v}", "their number is {v}"]),
                        _ => pick(self.rng, &["the postcode is {v}", "their postcode is {v}"]),
                    };
                    parts.push(fill(t, &[("v", v)]));
                }
                self.requests.retain(|s| !slots.contains(s));
                acts.insert("Restaurant-Inform".into(), pairs);
                let mut text = capitalize_first(&english_list(&parts)) + ".";
                if self.rng.gen_bool(0.5) {
                    acts.insert("general-reqmore".into(), vec![pair("none", "none")]);
                    text.push(' ');
                    text.push_str(pick(self.rng, &[
                        "Is there anything else I can help you with?",
                        "Can I help you with anything else?",
                        "Would you like me to book a table?",
                    ]));
                }
                text
            }
            UserMove::Book(_) | UserMove::ChangeTime(_) if self.presented.is_some() => {
                match mv {
                    UserMove::ChangeTime(t) => {
                        self.wizard_booking.insert(Slot::Time, t.clone());
                    }
                    UserMove::Book(slots) => self.wizard_booking.extend(slots.clone()),
                    _ => {}
                }
                let missing: Vec<Slot> = Slot::BOOKING
                    .into_iter()
                    .filter(|s| !self.wizard_booking.contains_key(s))
                    .collect();
                if !missing.is_empty() {
                    acts.insert("Booking-Request".into(), missing.iter().map(|s| pair(native_name(*s), "?")).collect());
                    let parts: Vec<&str> = missing
                        .iter()
                        .map(|s| match s {
                            Slot::People => pick(self.rng, &["how many people will be dining?", "for how many people?", "how many are in your party?"]),
                            Slot::Day => pick(self.rng, &["what day would you like the reservation for?", "which day?"]),
                            _ => pick(self.rng, &["what time would you like?", "at what time?"]),
                        })
                        .collect();
                    let lead = pick(self.rng, &["", "Sure, ", "I can do that. ", "Certainly. "]);
                    format!("{lead}{}", capitalize_first(&parts.join(" And ")))
                } else {
                    let b = &self.wizard_booking;
                    let (day, time) = (b[&Slot::Day].clone(), b[&Slot::Time].clone());
                    let ok = match (day.parse::<Weekday>(), time.parse::<ClockTime>()) {
                        (Ok(d), Ok(t)) => booking_available(d, t),
                        _ => false,
                    };
                    if ok {
                        let reference: String = (0..8)
                            .map(|_| {
                                let c = self.rng.gen_range(0..36u8);
                                if c < 10 { (b'0' + c) as char } else { (b'A' + c - 10) as char }
                            })
                            .collect();
                        acts.insert(
                            "Booking-Book".into(),
                            vec![pair("Ref", &reference), pair("People", &b[&Slot::People]), pair("Day", &day), pair("Time", &time)],
                        );
                        self.booked = true;
                        fill(
                            pick(self.rng, &[
                                "Booking was successful. The table will be reserved for 15 minutes. Reference number is : {r}.",
                                "I have booked your table for {d} at {t}. Your reference number is {r}.",
                                "Done! Your table is reserved and the reference number is {r}. Anything else?",
                                "You're all set. The reference number is {r}.",
                            ]),
                            &[("r", &reference), ("d", &capitalize(&day)), ("t", &time)],
                        )
                    } else {
                        acts.insert("Booking-NoBook".into(), vec![pair("Day", &day), pair("Time", &time)]);
                        self.wizard_booking.remove(&Slot::Time);
                        fill(
                            pick(self.rng, &[
                                "I'm sorry, they are fully booked at {t} on {d}. Would you like to try another time?",
                                "Unfortunately {t} is not available. Is there another time that would work for you?",
                                "Booking was unsuccessful, the restaurant is full at that time. Can we try a different time?",
                            ]),
                            &[("t", &time), ("d", &capitalize(&day))],
                        )
                    }
                }
            }
            UserMove::Book(_) | UserMove::ChangeTime(_) => {
                acts.insert("Restaurant-Request".into(), vec![pair("Food", "?")]);
                "Which restaurant would you like to book? What type of food are you after?".into()
            }
            UserMove::Bye => {
                acts.insert("general-bye".into(), vec![pair("none", "none")]);
                let t = pick(self.rng, &[
                    "You're welcome, have a great day!",
                    "Thank you for using our service. Goodbye!",
                    "Enjoy your meal!",
                    "Glad I could help. Goodbye.",
                    "Have a wonderful time!",
                ]);
                return (t.into(), acts, true);
            }
        };
        (text, acts, false)
    }

    fn present(&mut self, r: &'a Restaurant, choices: usize, acts: &mut BTreeMap<String, Vec<(String, String)>>) -> String {
        self.presented = Some(r);
        self.offered.insert(r.name.clone());
        let pairs = vec![
            ("Name".to_string(), r.name.clone()),
            ("Food".to_string(), r.food.clone()),
            ("Area".to_string(), r.area.clone()),
            ("Price".to_string(), r.pricerange.clone()),
        ];
        let recommend = self.rng.gen_bool(0.3);
        acts.insert(if recommend { "Restaurant-Recommend" } else { "Restaurant-Inform" }.into(), pairs);
        let body = if recommend {
            pick(self.rng, &[
                "I would recommend {n}. It serves {f} food in the {a}.",
                "How about {n}? It is a {p} {f} place in the {a}.",
                "I suggest {n}, a {p} restaurant in the {a}.",
            ])
        } else if choices > 1 {
            pick(self.rng, &[
                "There are {c} restaurants matching your request. {n} is a {p} {f} restaurant in the {a}.",
                "I have {c} options for you. {n} serves {f} food and is in the {p} price range.",
                "{n} is a nice {f} restaurant in the {a} of town.",
            ])
        } else {
            pick(self.rng, &[
                "{n} is a {p} {f} restaurant in the {a}.",
                "There is one match, {n}. It is located in the {a} and is {p}.",
                "{n} serves {f} food in the {a}.",
            ])
        };
        let tail = pick(self.rng, &["", " Would you like more information?", " Would you like me to book a table?", " Shall I make a reservation?"]);
        fill(
            &format!("{body}{tail}"),
            &[
                ("n", &r.name),
                ("f", &r.food),
                ("a", &r.area),
                ("p", &r.pricerange),
                ("c", &choices.to_string()),
            ],
        )
    }

    fn no_offer_text(&mut self) -> String {
        let k = &self.wizard_known;
        let desc = restaurant_np(self.rng, k);
        fill(
            pick(self.rng, &[
                "I'm sorry, I could not find {d}. Would you like to try something else?",
                "Unfortunately there is no {d}. Can I look for something different?",
                "There are no matches for {d}. Do you want to change your request?",
            ]),
            &[("d", &desc)],
        )
    }

    fn request_text(&mut self, ask: &[Slot], n: usize) -> String {
        let lead = if n > 1 && self.rng.gen_bool(0.4) {
            format!("There are {n} restaurants that match. ")
        } else {
            pick(self.rng, &["", "Sure, ", "I can help with that. ", "Certainly. "]).to_string()
        };
        let parts: Vec<&str> = ask
            .iter()
            .map(|s| match s {
                Slot::Food => pick(self.rng, &["what type of food would you like?", "what kind of cuisine are you interested in?", "do you have a food type in mind?"]),
                Slot::Area => pick(self.rng, &["what area of town would you like?", "which part of town do you prefer?", "is there an area you prefer?"]),
                _ => pick(self.rng, &["what price range are you looking for?", "do you have a price range in mind?"]),
            })
            .collect();
        format!("{lead}{}", capitalize_first(&parts.join(" And ")))
    }
}

fn short_answer<R: Rng>(rng: &mut R, slot: Slot, value: &str) -> String {
    let t = match slot {
        Slot::Area => pick(rng, &["The {v}, please.", "I'd like it to be in the {v}.", "Somewhere in the {v} would be great.", "{v} please."]),
        Slot::Food => pick(rng, &["{v} food, please.", "I'm in the mood for {v}.", "I would like {v} food.", "Let's go with {v}."]),
        _ => {
            let p = price_phrase(rng, value);
            return fill(
                pick(rng, &["Something {p}.", "I want it to be {p}.", "{p} would be best.", "{p}, please."]),
                &[("p", &p)],
            );
        }
    };
    fill(t, &[("v", value)])
}

fn capitalize_first(s: &str) -> String {
    capitalize(s)
}

fn spoken_time<R: Rng>(rng: &mut R, time: &str) -> String {
    match time.parse::<ClockTime>() {
        Ok(t) if t.minute == 0 && t.hour > 12 && rng.gen_bool(0.3) => format!("{}pm", t.hour - 12),
        _ => time.to_string(),
    }
}

fn native_name(slot: Slot) -> &'static str {
    match slot {
        Slot::Food => "Food",
        Slot::Area => "Area",
        Slot::Pricerange => "Price",
        Slot::Name => "Name",
        Slot::Address => "Addr",
        Slot::Phone => "Phone",
        Slot::Postcode => "Post",
        Slot::Reference => "Ref",
        Slot::People => "People",
        Slot::Day => "Day",
        Slot::Time => "Time",
    }
}

fn native_to_slot(name: &str) -> Option<Slot> {
    Slot::ALL.into_iter().find(|s| native_name(*s) == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::multiwoz::parse_corpus;

    fn small() -> SynthConfig {
        SynthConfig {
            restaurant_dialogs: 60,
            distractor_dialogs: 10,
            ..Default::default()
        }
    }

    #[test]
    fn output_round_trips_through_the_loader() {
        let raw = synthesize(&RestaurantDb::bundled(), &Ontology::bundled(), &small());
        assert_eq!(raw.len(), 70);
        let dialogs = parse_corpus(&serde_json::to_string(&raw).unwrap()).unwrap();
        assert_eq!(dialogs.len(), 60);
        assert!(dialogs.iter().all(|d| d.is_well_formed() && d.turns.len() >= 2));
    }

    #[test]
    fn synthesis_is_deterministic() {
        let a = serde_json::to_string(&synthesize(&RestaurantDb::bundled(), &Ontology::bundled(), &small())).unwrap();
        let b = serde_json::to_string(&synthesize(&RestaurantDb::bundled(), &Ontology::bundled(), &small())).unwrap();
        assert_eq!(a, b);
    }
}
