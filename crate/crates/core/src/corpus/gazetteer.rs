//! Value spotting over token sequences, and the delexicalizer built on it.

use std::collections::HashMap;

use super::db::{Ontology, RestaurantDb};
use crate::domain::{Slot, Weekday};
use crate::text::{placeholder, tokenize};

/// A recognised slot value covering `tokens[start..end]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub slot: Slot,
    /// Canonical value (e.g. `centre` for "center", `19:00` for "7pm").
    pub value: String,
}

const SYNONYMS: &[(&str, Slot, &str)] = &[
    ("center", Slot::Area, "centre"),
    ("city centre", Slot::Area, "centre"),
    ("town centre", Slot::Area, "centre"),
    ("moderately priced", Slot::Pricerange, "moderate"),
    ("moderately", Slot::Pricerange, "moderate"),
    ("mid range", Slot::Pricerange, "moderate"),
    ("mid - range", Slot::Pricerange, "moderate"),
    ("inexpensive", Slot::Pricerange, "cheap"),
    ("cheaply", Slot::Pricerange, "cheap"),
    ("pricey", Slot::Pricerange, "expensive"),
    ("upscale", Slot::Pricerange, "expensive"),
    ("post code", Slot::Postcode, ""),
];

const PEOPLE_AFTER: &[&str] = &["people", "persons", "person", "guests", "adults", "diners"];
const PEOPLE_BEFORE: &[&str] = &["for", "of"];

const NUMBER_WORDS: &[(&str, u32)] = &[
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
];

#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: HashMap<String, (Slot, String)>,
    /// Longest entry length starting with a given token.
    max_len: HashMap<String, usize>,
}

impl Gazetteer {
    pub fn new(db: &RestaurantDb, ontology: &Ontology) -> Self {
        let mut g = Gazetteer {
            entries: HashMap::new(),
            max_len: HashMap::new(),
        };
        for r in db.all() {
            for slot in [Slot::Name, Slot::Address, Slot::Phone, Slot::Postcode, Slot::Food, Slot::Area, Slot::Pricerange] {
                let value = r.value(slot).expect("restaurant field");
                g.add(value, slot, value);
            }
        }
        for slot in Slot::SEARCH {
            for v in ontology.values(slot) {
                g.add(v, slot, v);
            }
        }
        for day in Weekday::ALL {
            g.add(day.as_str(), Slot::Day, day.as_str());
        }
        for (alias, slot, value) in SYNONYMS {
            if !value.is_empty() {
                g.add(alias, *slot, value);
            }
        }
        g
    }

    fn add(&mut self, surface: &str, slot: Slot, value: &str) {
        let tokens = tokenize(surface);
        if tokens.is_empty() {
            return;
        }
        let len = self.max_len.entry(tokens[0].clone()).or_insert(0);
        *len = (*len).max(tokens.len());
        // Restaurant-specific entries win over generic values with the same surface.
        self.entries
            .entry(tokens.join(" "))
            .or_insert_with(|| (slot, value.to_string()));
    }

    /// Non-overlapping spans, scanning left to right and taking the longest match.
    pub fn spot<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Span> {
        let tokens: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
        let mut spans = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if let Some(span) = self.match_at(&tokens, i) {
                i = span.end;
                spans.push(span);
            } else {
                i += 1;
            }
        }
        spans
    }

    fn match_at(&self, tokens: &[&str], i: usize) -> Option<Span> {
        if let Some(&max) = self.max_len.get(tokens[i]) {
            for len in (1..=max.min(tokens.len() - i)).rev() {
                let key = tokens[i..i + len].join(" ");
                if let Some((slot, value)) = self.entries.get(&key) {
                    return Some(Span {
                        start: i,
                        end: i + len,
                        slot: *slot,
                        value: value.clone(),
                    });
                }
            }
        }
        if let Some(time) = parse_time(tokens[i]) {
            return Some(Span {
                start: i,
                end: i + 1,
                slot: Slot::Time,
                value: time,
            });
        }
        if let Some(&suffix @ ("pm" | "am")) = tokens.get(i + 1) {
            if let Some(time) = parse_time(&format!("{}{suffix}", tokens[i])) {
                return Some(Span {
                    start: i,
                    end: i + 2,
                    slot: Slot::Time,
                    value: time,
                });
            }
        }
        if let Some(n) = parse_count(tokens[i]) {
            let next = tokens.get(i + 1).copied();
            let prev = i.checked_sub(1).map(|p| tokens[p]);
            let after = next.is_some_and(|t| PEOPLE_AFTER.contains(&t))
                || (next == Some("of") && tokens.get(i + 2) == Some(&"us"));
            let before = prev.is_some_and(|t| PEOPLE_BEFORE.contains(&t))
                && !next.is_some_and(|t| t == "nights" || t == "night" || t == "days" || t == "stars");
            if after || before {
                return Some(Span {
                    start: i,
                    end: i + 1,
                    slot: Slot::People,
                    value: n.to_string(),
                });
            }
        }
        None
    }

    /// Replaces every spotted value with its `<slot>` placeholder.
    pub fn delexicalize<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        let spans = self.spot(tokens);
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        let mut spans = spans.into_iter().peekable();
        while i < tokens.len() {
            match spans.peek() {
                Some(span) if span.start == i => {
                    out.push(format!("<{}>", span.slot));
                    i = span.end;
                    spans.next();
                }
                _ => {
                    out.push(tokens[i].as_ref().to_string());
                    i += 1;
                }
            }
        }
        out
    }

    pub fn delexicalize_text(&self, text: &str) -> Vec<String> {
        self.delexicalize(&tokenize(text))
    }
}

fn parse_time(token: &str) -> Option<String> {
    if placeholder(token).is_some() {
        return None;
    }
    if let Some((h, m)) = token.split_once(':') {
        let (h, m): (u8, u8) = (h.parse().ok()?, m.parse().ok()?);
        return (h < 24 && m < 60).then(|| format!("{h:02}:{m:02}"));
    }
    let (digits, suffix) = token.split_at(token.find(|c: char| !c.is_ascii_digit())?);
    let h: u8 = digits.parse().ok()?;
    match suffix {
        "pm" if (1..=12).contains(&h) => Some(format!("{:02}:00", if h == 12 { 12 } else { h + 12 })),
        "am" if (1..=12).contains(&h) => Some(format!("{:02}:00", if h == 12 { 0 } else { h })),
        _ => None,
    }
}

fn parse_count(token: &str) -> Option<u32> {
    if let Ok(n) = token.parse::<u32>() {
        return (1..=20).contains(&n).then_some(n);
    }
    NUMBER_WORDS.iter().find(|(w, _)| *w == token).map(|(_, n)| *n)
}
