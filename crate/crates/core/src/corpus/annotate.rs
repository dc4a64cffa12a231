//! Regular-expression annotation of user turns with the seven user acts.
//!
//! Patterns run over the normalized, delexicalized utterance, so a rule can
//! say `<time>` instead of enumerating clock times.

use std::collections::BTreeMap;

use log::debug;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::gazetteer::{Gazetteer, Span};
use crate::domain::{Act, Dialog, Slot, SlotCategory, SlotMap, Speaker, UserAct, UserActKind};
use crate::error::{Error, Result};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRule {
    pub act: UserActKind,
    pub patterns: Vec<String>,
    /// Higher wins when several rules match.
    pub priority: u32,
}

impl AnnotationRule {
    fn new(act: UserActKind, priority: u32, patterns: &[&str]) -> Self {
        AnnotationRule {
            act,
            patterns: patterns.iter().map(|p| p.to_string()).collect(),
            priority,
        }
    }
}

const INFORMABLE: &str = r"<(?:food|area|pricerange|name)>";

/// The built-in rule set, most specific act first.
pub fn default_rules() -> Vec<AnnotationRule> {
    use UserActKind::*;
    vec![
        AnnotationRule::new(
            Goodbye,
            70,
            &[
                r"\b(?:good ?bye|bye)\b",
                r"\b(?:that's|that is|that will be|that'll be|it's) (?:all|it|everything)\b",
                r"\b(?:nothing else|(?:don't|do not) need anything (?:else|more))\b",
                r"\bhave a (?:good|nice|great|lovely) (?:day|night|evening|one)\b",
                r"^(?:(?:ok|okay|great|perfect|wonderful|awesome|alright|no|nope|cool) ,? )*(?:thanks|thank you)(?: so much| very much| a lot)?(?: for (?:your|the|all the) help)?(?: ,? (?:you have been|you've been) (?:very |really |so )?helpful)? ?[.!]?$",
            ],
        ),
        AnnotationRule::new(
            ReservationChangeTime,
            60,
            &[
                r"\b(?:how about|what about|try|is|at|for) <time> (?:instead|then)\b",
                r"\b(?:how about|what about|try|let's try|can we try|could you try)\b(?: booking| a booking| it)?(?: for| at)? <time>",
                r"\b(?:earlier|later|different|another) time\b",
                r"^(?:okay |ok |well |then )?(?:what about|how about) (?:at )?<time>",
            ],
        ),
        AnnotationRule::new(
            MakeReservation,
            50,
            &[
                r"\b(?:book|booking|reserve|reservation)\b",
                r"\btable for\b",
                r"<people> (?:people|persons?|guests|of us)\b",
                r"\b(?:for|it will be for|it'll be for) <people>(?:\s|$)",
                r"<day> at <time>|<time> on <day>",
                r"\bon <day>(?:\s|$)|^<day>(?:\s|$)",
                r"^(?:at )?<time>(?:\s|$)|\bat <time>(?:\s|$)",
            ],
        ),
        AnnotationRule::new(
            InformTypeChange,
            40,
            &[
                &format!(r"\b(?:how about|what about|try)\b(?: (?:a|an|one|the|some|something))*(?: [a-z]+)?(?: (?:in|with) the)? {INFORMABLE}"),
                &format!(r"{INFORMABLE}(?: [a-z]+){{0,3}} (?:instead|then)\b"),
                r"\b(?:then|instead) how about\b",
            ],
        ),
        AnnotationRule::new(
            AnythingElse,
            30,
            &[
                r"\b(?:anything|something) else\b",
                r"\bwhat else\b",
                r"\bany other\b",
                r"\b(?:another|different) (?:one|restaurant|place|option|suggestion|recommendation)\b",
                r"\bother (?:options|restaurants|places|suggestions)\b",
                r"\bis there another\b",
            ],
        ),
        AnnotationRule::new(
            RequestInfo,
            20,
            &[
                r"\baddress(?:es)?\b",
                r"\b(?:phone|telephone)\b",
                r"\b(?:their|the|its|your) number\b",
                r"\bpost ?codes?\b",
                r"\breference\b",
                r"\bwhere (?:is|are) (?:it|they|that)\b",
                r"\blocated\b",
            ],
        ),
        AnnotationRule::new(
            InformType,
            10,
            &[
                INFORMABLE,
                r"\b(?:restaurant|restaurants|food|place to (?:eat|dine)|somewhere to eat|cuisine)\b",
                r"\b(?:looking for|want|would like|i'd like|need|find)\b",
            ],
        ),
    ]
}

/// Why an utterance got its act.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub act: UserAct,
    /// `false` when no rule fired and the fallback act was used.
    pub matched: bool,
    /// Every value spotted in the utterance, whatever the act admits.
    pub mentioned: SlotMap,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    act: UserActKind,
    patterns: Vec<Regex>,
}

#[derive(Debug, Clone)]
pub struct Annotator {
    rules: Vec<CompiledRule>,
    gazetteer: Gazetteer,
    requestables: Vec<(Slot, Regex)>,
}

impl Annotator {
    pub fn new(rules: &[AnnotationRule], gazetteer: Gazetteer) -> Result<Self> {
        let mut priorities: Vec<u32> = rules.iter().map(|r| r.priority).collect();
        priorities.sort_unstable();
        priorities.dedup();
        if priorities.len() != rules.len() {
            return Err(Error::InsufficientData("annotation rule priorities must be unique".into()));
        }
        let mut compiled = rules
            .iter()
            .map(|r| {
                Ok((
                    r.priority,
                    CompiledRule {
                        act: r.act,
                        patterns: r.patterns.iter().map(|p| Regex::new(p)).collect::<Result<_, _>>()?,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        compiled.sort_by_key(|c| std::cmp::Reverse(c.0));
        let requestables = [
            (Slot::Address, r"\baddress(?:es)?\b|\bwhere (?:is|are) (?:it|they|that)\b|\blocated\b"),
            (Slot::Phone, r"\b(?:phone|telephone)\b|\b(?:their|the|its) number\b"),
            (Slot::Postcode, r"\bpost ?codes?\b"),
            (Slot::Reference, r"\breference\b"),
        ]
        .into_iter()
        .map(|(s, p)| Ok((s, Regex::new(p)?)))
        .collect::<Result<Vec<_>>>()?;
        Ok(Annotator {
            rules: compiled.into_iter().map(|(_, r)| r).collect(),
            gazetteer,
            requestables,
        })
    }

    pub fn with_default_rules(gazetteer: Gazetteer) -> Self {
        Annotator::new(&default_rules(), gazetteer).expect("default rules compile")
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn annotate(&self, utterance: &str) -> Annotation {
        let tokens = tokenize(utterance);
        let spans = self.gazetteer.spot(&tokens);
        let delex = self.gazetteer.delexicalize(&tokens).join(" ");
        let fired = self
            .rules
            .iter()
            .find(|r| r.patterns.iter().any(|p| p.is_match(&delex)))
            .map(|r| r.act);
        let kind = fired.unwrap_or(UserActKind::InformType);
        if fired.is_none() {
            debug!("no annotation rule matched `{delex}`");
        }
        let mentioned = span_values(&spans);
        let slots = match kind.slot_category() {
            Some(SlotCategory::Requestable) => self
                .requestables
                .iter()
                .filter(|(_, re)| re.is_match(&delex))
                .map(|(s, _)| (*s, String::new()))
                .collect(),
            Some(_) => mentioned.clone(),
            None => SlotMap::new(),
        };
        Annotation {
            act: UserAct::filtered(kind, &slots),
            matched: fired.is_some(),
            mentioned,
        }
    }

    /// Gives every user turn exactly one act, replacing any existing one.
    pub fn annotate_dialogs(&self, dialogs: &mut [Dialog]) -> AnnotationReport {
        let mut report = AnnotationReport::default();
        for dialog in dialogs.iter_mut() {
            for turn in dialog.turns.iter_mut().filter(|t| t.speaker == Speaker::User) {
                let a = self.annotate(&turn.utterance);
                report.record(a.act.kind, a.matched);
                turn.act = Some(Act::User(a.act));
            }
        }
        report.finish();
        report
    }
}

fn span_values(spans: &[Span]) -> SlotMap {
    let mut out = SlotMap::new();
    for s in spans {
        out.entry(s.slot).or_insert_with(|| s.value.clone());
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationReport {
    pub user_turns: usize,
    pub matched: usize,
    pub unmatched: usize,
    pub match_rate: f64,
    pub per_act: BTreeMap<UserActKind, usize>,
}

impl AnnotationReport {
    fn record(&mut self, kind: UserActKind, matched: bool) {
        self.user_turns += 1;
        if matched {
            self.matched += 1;
        } else {
            self.unmatched += 1;
        }
        *self.per_act.entry(kind).or_default() += 1;
    }

    fn finish(&mut self) {
        self.match_rate = if self.user_turns == 0 {
            0.0
        } else {
            self.matched as f64 / self.user_turns as f64
        };
    }
}
