use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Food,
    Area,
    Pricerange,
    Name,
    Address,
    Phone,
    Postcode,
    Reference,
    People,
    Day,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotCategory {
    Informable,
    Requestable,
    Booking,
}

impl Slot {
    pub const ALL: [Slot; 11] = [
        Slot::Food,
        Slot::Area,
        Slot::Pricerange,
        Slot::Name,
        Slot::Address,
        Slot::Phone,
        Slot::Postcode,
        Slot::Reference,
        Slot::People,
        Slot::Day,
        Slot::Time,
    ];
    pub const INFORMABLE: [Slot; 4] = [Slot::Food, Slot::Area, Slot::Pricerange, Slot::Name];
    /// The informables a search is narrowed by when no name is given.
    pub const SEARCH: [Slot; 3] = [Slot::Food, Slot::Area, Slot::Pricerange];
    pub const REQUESTABLE: [Slot; 4] = [Slot::Address, Slot::Phone, Slot::Postcode, Slot::Reference];
    pub const BOOKING: [Slot; 3] = [Slot::People, Slot::Day, Slot::Time];

    pub fn category(self) -> SlotCategory {
        match self {
            Slot::Food | Slot::Area | Slot::Pricerange | Slot::Name => SlotCategory::Informable,
            Slot::Address | Slot::Phone | Slot::Postcode | Slot::Reference => {
                SlotCategory::Requestable
            }
            Slot::People | Slot::Day | Slot::Time => SlotCategory::Booking,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Food => "food",
            Slot::Area => "area",
            Slot::Pricerange => "pricerange",
            Slot::Name => "name",
            Slot::Address => "address",
            Slot::Phone => "phone",
            Slot::Postcode => "postcode",
            Slot::Reference => "reference",
            Slot::People => "people",
            Slot::Day => "day",
            Slot::Time => "time",
        }
    }

    /// How the slot is referred to in running text.
    pub fn phrase(self) -> &'static str {
        match self {
            Slot::Food => "food type",
            Slot::Area => "area",
            Slot::Pricerange => "price range",
            Slot::Name => "restaurant name",
            Slot::Address => "address",
            Slot::Phone => "phone number",
            Slot::Postcode => "postcode",
            Slot::Reference => "reference number",
            Slot::People => "number of people",
            Slot::Day => "day",
            Slot::Time => "time",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Slot::ALL
            .into_iter()
            .find(|slot| slot.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                what: "slot",
                value: s.to_string(),
            })
    }
}

pub type SlotMap = BTreeMap<Slot, String>;

macro_rules! act_kind {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: [$name; act_kind!(@count $($variant)+)] = [$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }

            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let wanted: String = s.chars().filter(|c| *c != '_').collect::<String>().to_lowercase();
                $name::ALL
                    .into_iter()
                    .find(|k| k.as_str().replace('_', "") == wanted)
                    .ok_or_else(|| Error::Unknown { what: stringify!($name), value: s.to_string() })
            }
        }
    };
    (@count $($t:ident)+) => { 0 $(+ act_kind!(@one $t))+ };
    (@one $t:ident) => { 1 };
}

act_kind!(UserActKind {
    InformType => "inform_type",
    InformTypeChange => "inform_type_change",
    AnythingElse => "anything_else",
    RequestInfo => "request_info",
    MakeReservation => "make_reservation",
    ReservationChangeTime => "reservation_change_time",
    Goodbye => "goodbye",
});

act_kind!(SystemActKind {
    AskType => "ask_type",
    PresentResult => "present_result",
    ProvideInfo => "provide_info",
    AskReservationInfo => "ask_reservation_info",
    InformReservationResult => "inform_reservation_result",
    Goodbye => "goodbye",
});

impl UserActKind {
    /// Slot category this act may carry, `None` for acts that carry no slots.
    pub fn slot_category(self) -> Option<SlotCategory> {
        match self {
            UserActKind::InformType | UserActKind::InformTypeChange => Some(SlotCategory::Informable),
            UserActKind::RequestInfo => Some(SlotCategory::Requestable),
            UserActKind::MakeReservation | UserActKind::ReservationChangeTime => {
                Some(SlotCategory::Booking)
            }
            UserActKind::AnythingElse | UserActKind::Goodbye => None,
        }
    }
}

/// A user dialog act. Slot categories are checked on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawUserAct")]
pub struct UserAct {
    pub kind: UserActKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    slots: SlotMap,
}

#[derive(Deserialize)]
struct RawUserAct {
    kind: UserActKind,
    #[serde(default)]
    slots: SlotMap,
}

impl TryFrom<RawUserAct> for UserAct {
    type Error = Error;

    fn try_from(raw: RawUserAct) -> Result<Self> {
        UserAct::new(raw.kind, raw.slots)
    }
}

impl UserAct {
    pub fn new(kind: UserActKind, slots: SlotMap) -> Result<Self> {
        for &slot in slots.keys() {
            if kind.slot_category() != Some(slot.category()) {
                return Err(Error::SlotNotAllowed { kind, slot });
            }
        }
        Ok(UserAct { kind, slots })
    }

    pub fn bare(kind: UserActKind) -> Self {
        UserAct {
            kind,
            slots: SlotMap::new(),
        }
    }

    /// Builds the act keeping only the slots its kind admits.
    pub fn filtered(kind: UserActKind, slots: &SlotMap) -> Self {
        let slots = slots
            .iter()
            .filter(|(s, _)| kind.slot_category() == Some(s.category()))
            .map(|(s, v)| (*s, v.clone()))
            .collect();
        UserAct { kind, slots }
    }

    pub fn slots(&self) -> &SlotMap {
        &self.slots
    }

    pub fn slot_names(&self) -> BTreeSet<Slot> {
        self.slots.keys().copied().collect()
    }
}

impl fmt::Display for UserAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        write_slots(f, &self.slots)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemAct {
    pub kind: SystemActKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub slots: SlotMap,
}

impl SystemAct {
    pub fn new(kind: SystemActKind, slots: SlotMap) -> Self {
        SystemAct { kind, slots }
    }

    pub fn bare(kind: SystemActKind) -> Self {
        SystemAct {
            kind,
            slots: SlotMap::new(),
        }
    }

    pub fn get(&self, slot: Slot) -> Option<&str> {
        self.slots.get(&slot).map(String::as_str)
    }
}

impl fmt::Display for SystemAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        write_slots(f, &self.slots)
    }
}

fn write_slots(f: &mut fmt::Formatter<'_>, slots: &SlotMap) -> fmt::Result {
    if slots.is_empty() {
        return Ok(());
    }
    f.write_str("{")?;
    for (i, (slot, value)) in slots.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        if value.is_empty() {
            write!(f, "{slot}")?;
        } else {
            write!(f, "{slot}: {value}")?;
        }
    }
    f.write_str("}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_partition_the_slots() {
        let informable: BTreeSet<_> = Slot::INFORMABLE.into_iter().collect();
        let requestable: BTreeSet<_> = Slot::REQUESTABLE.into_iter().collect();
        let booking: BTreeSet<_> = Slot::BOOKING.into_iter().collect();
        assert!(informable.is_disjoint(&requestable));
        assert!(informable.is_disjoint(&booking));
        assert!(requestable.is_disjoint(&booking));
        assert_eq!(informable.len() + requestable.len() + booking.len(), Slot::ALL.len());
        for slot in Slot::ALL {
            let expected = if informable.contains(&slot) {
                SlotCategory::Informable
            } else if requestable.contains(&slot) {
                SlotCategory::Requestable
            } else {
                SlotCategory::Booking
            };
            assert_eq!(slot.category(), expected);
        }
    }

    #[test]
    fn exactly_seven_user_and_six_system_acts() {
        assert_eq!(UserActKind::ALL.len(), 7);
        assert_eq!(SystemActKind::ALL.len(), 6);
        for (i, k) in UserActKind::ALL.iter().enumerate() {
            assert_eq!(k.index(), i);
        }
    }

    #[test]
    fn request_info_rejects_informables() {
        let mut slots = SlotMap::new();
        slots.insert(Slot::Food, "italian".into());
        assert!(UserAct::new(UserActKind::RequestInfo, slots.clone()).is_err());
        assert!(UserAct::new(UserActKind::InformType, slots).is_ok());
    }

    #[test]
    fn deserialization_validates_slots() {
        let bad = r#"{"kind":"make_reservation","slots":{"food":"thai"}}"#;
        assert!(serde_json::from_str::<UserAct>(bad).is_err());
        let good = r#"{"kind":"make_reservation","slots":{"people":"5"}}"#;
        let act: UserAct = serde_json::from_str(good).unwrap();
        assert_eq!(act.slots()[&Slot::People], "5");
    }

    #[test]
    fn kinds_parse_from_either_spelling() {
        assert_eq!("InformTypeChange".parse::<UserActKind>().unwrap(), UserActKind::InformTypeChange);
        assert_eq!("ask_reservation_info".parse::<SystemActKind>().unwrap(), SystemActKind::AskReservationInfo);
        assert!("hello".parse::<UserActKind>().is_err());
    }
}
