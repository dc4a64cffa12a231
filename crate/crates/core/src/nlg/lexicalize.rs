use crate::domain::{Restaurant, Slot, SlotMap};
use crate::error::{Error, Result};
use crate::text::placeholder;

/// Replaces `<slot>` placeholders with values from `slots`, then from `presented`.
pub fn lexicalize(delexicalized: &str, slots: &SlotMap, presented: Option<&Restaurant>) -> Result<String> {
    let mut out = Vec::new();
    for tok in delexicalized.split_whitespace() {
        match placeholder(tok) {
            Some(name) => {
                let slot: Option<Slot> = name.parse().ok();
                let value = slot
                    .and_then(|s| slots.get(&s).filter(|v| !v.is_empty()).map(String::as_str))
                    .or_else(|| slot.and_then(|s| presented.and_then(|r| r.value(s))))
                    .ok_or_else(|| Error::UnresolvedPlaceholder(name.to_string()))?;
                out.push(value.to_string());
            }
            None => out.push(tok.to_string()),
        }
    }
    Ok(out.join(" "))
}
