#![allow(dead_code)]

use std::sync::OnceLock;

use usersim::lab::Lab;

/// The synthetic lab, built once per test binary.
pub fn lab() -> &'static Lab {
    static LAB: OnceLock<Lab> = OnceLock::new();
    LAB.get_or_init(|| Lab::synthetic().expect("synthetic corpus builds"))
}

/// The hand-labeled annotation sample: `(act, utterance)` pairs.
pub fn gold_acts() -> Vec<(usersim::domain::UserActKind, String)> {
    include_str!("../data/gold_acts.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (act, text) = l.split_once('\t').expect("act<TAB>utterance");
            (act.parse().expect("known act"), text.to_string())
        })
        .collect()
}
