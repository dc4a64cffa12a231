use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::act::{Slot, SlotCategory, SlotMap};
use crate::error::{Error, Result};
use crate::text::normalize_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
        Weekday::Saturday,
        Weekday::Sunday,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Weekday::Monday => "monday",
            Weekday::Tuesday => "tuesday",
            Weekday::Wednesday => "wednesday",
            Weekday::Thursday => "thursday",
            Weekday::Friday => "friday",
            Weekday::Saturday => "saturday",
            Weekday::Sunday => "sunday",
        }
    }
}

impl fmt::Display for Weekday {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Weekday {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_lowercase();
        Weekday::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or(Error::Unknown {
                what: "weekday",
                value: s,
            })
    }
}

/// Wall-clock time, serialized as `hh:mm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClockTime {
    pub hour: u8,
    pub minute: u8,
}

impl ClockTime {
    pub fn new(hour: u8, minute: u8) -> Result<Self> {
        if hour > 23 || minute > 59 {
            return Err(Error::Unknown {
                what: "clock time",
                value: format!("{hour}:{minute}"),
            });
        }
        Ok(ClockTime { hour, minute })
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.hour, self.minute)
    }
}

impl FromStr for ClockTime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Unknown {
            what: "clock time",
            value: s.to_string(),
        };
        let (h, m) = s.trim().split_once(':').ok_or_else(bad)?;
        let hour = h.parse().map_err(|_| bad())?;
        let minute = m.parse().map_err(|_| bad())?;
        ClockTime::new(hour, minute)
    }
}

impl TryFrom<String> for ClockTime {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ClockTime> for String {
    fn from(t: ClockTime) -> String {
        t.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Booking {
    pub people: u32,
    pub day: Weekday,
    pub time: ClockTime,
}

impl Booking {
    pub fn value(&self, slot: Slot) -> Option<String> {
        match slot {
            Slot::People => Some(self.people.to_string()),
            Slot::Day => Some(self.day.to_string()),
            Slot::Time => Some(self.time.to_string()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialBooking {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub people: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub day: Option<Weekday>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<ClockTime>,
}

impl PartialBooking {
    pub fn is_complete(&self) -> bool {
        self.complete().is_some()
    }

    pub fn complete(&self) -> Option<Booking> {
        Some(Booking {
            people: self.people?,
            day: self.day?,
            time: self.time?,
        })
    }

    pub fn has(&self, slot: Slot) -> bool {
        match slot {
            Slot::People => self.people.is_some(),
            Slot::Day => self.day.is_some(),
            Slot::Time => self.time.is_some(),
            _ => false,
        }
    }

    pub fn missing(&self) -> Vec<Slot> {
        Slot::BOOKING.into_iter().filter(|s| !self.has(*s)).collect()
    }

    /// Writes a textual booking value; values that do not parse are ignored.
    pub fn set(&mut self, slot: Slot, value: &str) -> bool {
        match slot {
            Slot::People => value.trim().parse().ok().filter(|n| *n > 0).map(|n| self.people = Some(n)),
            Slot::Day => value.parse().ok().map(|d| self.day = Some(d)),
            Slot::Time => value.parse().ok().map(|t| self.time = Some(t)),
            _ => None,
        }
        .is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtask {
    AskInfo,
    MakeReservation,
}

/// The user's agenda: what to look for, what to ask, what to book.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGoal")]
pub struct Goal {
    pub id: String,
    /// Informable constraints the user starts from.
    pub constraints: SlotMap,
    /// Replacement values to switch to when the starting constraints match nothing.
    #[serde(default, skip_serializing_if = "SlotMap::is_empty")]
    pub relaxations: SlotMap,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub requestables: BTreeSet<Slot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub booking: Option<Booking>,
    /// A first booking time the restaurant turns down, before `booking.time` is tried.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_time: Option<ClockTime>,
    pub subtasks: Vec<Subtask>,
}

#[derive(Deserialize)]
struct RawGoal {
    id: String,
    constraints: SlotMap,
    #[serde(default)]
    relaxations: SlotMap,
    #[serde(default)]
    requestables: BTreeSet<Slot>,
    #[serde(default)]
    booking: Option<Booking>,
    #[serde(default)]
    failed_time: Option<ClockTime>,
    subtasks: Vec<Subtask>,
}

impl TryFrom<RawGoal> for Goal {
    type Error = Error;

    fn try_from(raw: RawGoal) -> Result<Self> {
        let goal = Goal {
            id: raw.id,
            constraints: raw.constraints,
            relaxations: raw.relaxations,
            requestables: raw.requestables,
            booking: raw.booking,
            failed_time: raw.failed_time,
            subtasks: raw.subtasks,
        };
        goal.validate()?;
        Ok(goal)
    }
}

impl Goal {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidGoal(format!("{}: {msg}", self.id)));
        if self.subtasks.is_empty() {
            return bad("no sub-tasks");
        }
        let has = |t: Subtask| self.subtasks.contains(&t);
        if has(Subtask::AskInfo) != !self.requestables.is_empty() {
            return bad("ask-info sub-task must coincide with requestables");
        }
        if has(Subtask::MakeReservation) != self.booking.is_some() {
            return bad("reservation sub-task must coincide with a booking");
        }
        let informable = |s: &Slot| s.category() == SlotCategory::Informable;
        if !self.constraints.keys().all(informable) || !self.relaxations.keys().all(informable) {
            return bad("constraints must be informable slots");
        }
        if !self.requestables.iter().all(|s| s.category() == SlotCategory::Requestable) {
            return bad("requestables must be requestable slots");
        }
        if self.failed_time.is_some() && self.booking.is_none() {
            return bad("failed booking time without a booking");
        }
        Ok(())
    }

    /// Constraints after every relaxation has been applied.
    pub fn relaxed_constraints(&self) -> SlotMap {
        let mut c = self.constraints.clone();
        c.extend(self.relaxations.iter().map(|(k, v)| (*k, v.clone())));
        c
    }

    /// Value the user holds for an informable slot, honouring an applied relaxation.
    pub fn constraint(&self, slot: Slot, relaxed: bool) -> Option<&str> {
        if relaxed {
            if let Some(v) = self.relaxations.get(&slot) {
                return Some(v);
            }
        }
        self.constraints.get(&slot).map(String::as_str)
    }

    /// Booking slot value; before the turn-down the failed time is the one asked for.
    pub fn booking_value(&self, slot: Slot, after_failure: bool) -> Option<String> {
        let booking = self.booking.as_ref()?;
        match (slot, self.failed_time) {
            (Slot::Time, Some(t)) if !after_failure => Some(t.to_string()),
            _ => booking.value(slot),
        }
    }

    pub fn has_subtask(&self, t: Subtask) -> bool {
        self.subtasks.contains(&t)
    }

    /// Instruction text shown to a human playing this goal.
    pub fn instructions(&self) -> String {
        let mut out = String::new();
        let c = &self.constraints;
        if let Some(name) = c.get(&Slot::Name) {
            out.push_str(&format!("You are looking for a particular restaurant. Its name is called {name}."));
        } else {
            out.push_str("You are looking for a");
            if let Some(food) = c.get(&Slot::Food) {
                let article = if food.starts_with(['a', 'e', 'i', 'o', 'u']) { "n" } else { "" };
                out.push_str(&format!("{article} {food} restaurant"));
            } else {
                out.push_str(" restaurant");
            }
            if let Some(price) = c.get(&Slot::Pricerange) {
                out.push_str(&format!(" in the {price} price range"));
            }
            if let Some(area) = c.get(&Slot::Area) {
                out.push_str(&format!(" in the {area}"));
            }
            out.push('.');
        }
        for (slot, value) in &self.relaxations {
            out.push_str(&format!(
                " If there is no such restaurant, how about one that serves {value} {}?",
                if *slot == Slot::Food { "food" } else { slot.phrase() }
            ));
        }
        if !self.requestables.is_empty() {
            let wanted: Vec<&str> = self.requestables.iter().map(|s| s.phrase()).collect();
            out.push_str(&format!(
                " Once you find a restaurant, make sure you get the {}.",
                crate::text::join_list(&wanted)
            ));
        }
        if let Some(b) = &self.booking {
            let first = self.failed_time.unwrap_or(b.time);
            out.push_str(&format!(
                " Once you find the restaurant, you want to book a table for {} people at {} on {}.",
                b.people,
                first,
                capitalize(b.day.as_str())
            ));
            if self.failed_time.is_some() {
                out.push_str(&format!(" If the booking fails how about {}?", b.time));
            }
            out.push_str(" Make sure you get the reference number.");
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Restaurant {
    pub name: String,
    pub food: String,
    pub area: String,
    pub pricerange: String,
    pub address: String,
    pub phone: String,
    pub postcode: String,
}

impl Restaurant {
    pub fn value(&self, slot: Slot) -> Option<&str> {
        Some(match slot {
            Slot::Name => &self.name,
            Slot::Food => &self.food,
            Slot::Area => &self.area,
            Slot::Pricerange => &self.pricerange,
            Slot::Address => &self.address,
            Slot::Phone => &self.phone,
            Slot::Postcode => &self.postcode,
            _ => return None,
        })
    }

    /// Whether every constraint holds; a `name` constraint alone decides when present.
    pub fn matches(&self, constraints: &SlotMap) -> bool {
        if let Some(name) = constraints.get(&Slot::Name) {
            return normalize_value(name) == normalize_value(&self.name);
        }
        constraints.iter().all(|(slot, want)| {
            self.value(*slot)
                .is_some_and(|have| normalize_value(have) == normalize_value(want))
        })
    }

    pub fn is_well_formed(&self) -> bool {
        [
            &self.name,
            &self.food,
            &self.area,
            &self.pricerange,
            &self.address,
            &self.phone,
            &self.postcode,
        ]
        .iter()
        .all(|f| !f.trim().is_empty())
    }
}
