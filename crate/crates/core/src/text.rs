//! The one tokenizer every module shares.
//!
//! Text is lowercased; punctuation becomes separate tokens; clock times
//! (`12:15`), contractions (`don't`) and `<slot>` placeholders stay whole.

use std::sync::LazyLock;

use regex::Regex;

static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"<[a-z_]+>|\d{1,2}:\d{2}|[a-z0-9]+(?:'[a-z]+)?|[^\sa-z0-9]").unwrap()
});

pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    TOKEN
        .find_iter(&lower)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Canonical surface form: tokens joined by single spaces.
pub fn normalize(text: &str) -> String {
    tokenize(text).join(" ")
}

/// Normalization used when comparing slot values: lowercase, collapsed whitespace.
pub fn normalize_value(value: &str) -> String {
    value
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Placeholder name if `token` looks like `<name>`.
pub fn placeholder(token: &str) -> Option<&str> {
    token
        .strip_prefix('<')
        .and_then(|t| t.strip_suffix('>'))
        .filter(|t| !t.is_empty() && t.bytes().all(|b| b.is_ascii_lowercase() || b == b'_'))
}

/// Joins phrases as an English list: "a", "a and b", "a , b and c".
pub fn join_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {}", init.join(" , "), last),
    }
}
