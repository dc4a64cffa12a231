use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::act::{Slot, SlotMap, UserActKind};
use super::goal::{Goal, PartialBooking, Restaurant};

/// Maximum number of system turns in a dialog.
pub const MAX_TURNS: u32 = 10;

/// What the system side has tracked so far.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogState {
    pub filled_constraints: SlotMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presented: Option<Restaurant>,
    /// The last search came back empty.
    #[serde(default)]
    pub no_match: bool,
    #[serde(default)]
    pub provided_requestables: BTreeSet<Slot>,
    /// Requests the user made that have not been answered yet.
    #[serde(default)]
    pub requested: BTreeSet<Slot>,
    #[serde(default)]
    pub booking_filled: PartialBooking,
    #[serde(default)]
    pub booking_requested: bool,
    #[serde(default)]
    pub booking_failed: bool,
    #[serde(default)]
    pub reservation_confirmed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Names already presented, skipped when the user asks for something else.
    #[serde(default)]
    pub offered: BTreeSet<String>,
    #[serde(default)]
    pub alternative_requested: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_user_act: Option<UserActKind>,
    pub turn: u32,
}

impl DialogState {
    /// A name, or all three search slots.
    pub fn constraints_complete(&self) -> bool {
        self.filled_constraints.contains_key(&Slot::Name)
            || Slot::SEARCH.iter().all(|s| self.filled_constraints.contains_key(s))
    }

    pub fn missing_constraints(&self) -> Vec<Slot> {
        if self.filled_constraints.contains_key(&Slot::Name) {
            return Vec::new();
        }
        Slot::SEARCH
            .into_iter()
            .filter(|s| !self.filled_constraints.contains_key(s))
            .collect()
    }

    /// Whether the presented restaurant still agrees with what the user asked for.
    pub fn presented_is_current(&self) -> bool {
        self.presented
            .as_ref()
            .is_some_and(|r| r.matches(&self.filled_constraints))
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.provided_requestables.is_empty() && self.presented.is_none() {
            return Err("requestables provided without a presented restaurant".into());
        }
        if self.reservation_confirmed && !self.booking_filled.is_complete() {
            return Err("reservation confirmed with an incomplete booking".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
    Ongoing,
}

/// Success once the presented restaurant fits the goal, every requested detail has
/// been given and any booking is confirmed as asked; failure at the turn cap.
pub fn goal_satisfied(goal: &Goal, state: &DialogState) -> Outcome {
    if task_complete(goal, state) {
        Outcome::Success
    } else if state.turn >= MAX_TURNS {
        Outcome::Failure
    } else {
        Outcome::Ongoing
    }
}

fn task_complete(goal: &Goal, state: &DialogState) -> bool {
    let Some(presented) = &state.presented else {
        return false;
    };
    let venue_ok = presented.matches(&goal.constraints)
        || (!goal.relaxations.is_empty() && presented.matches(&goal.relaxed_constraints()));
    if !venue_ok {
        return false;
    }
    if !goal.requestables.is_subset(&state.provided_requestables) {
        return false;
    }
    match &goal.booking {
        None => true,
        Some(wanted) => {
            state.reservation_confirmed && state.booking_filled.complete() == Some(*wanted)
        }
    }
}

/// The user-side memory of a model-based simulator.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefSpan {
    /// Values the system has offered (name, phone, ...).
    pub inform: SlotMap,
    /// Details the user still waits for.
    pub request: BTreeSet<Slot>,
    pub book: PartialBooking,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Booking, ClockTime, Subtask, Weekday};

    fn caffe_uno() -> Restaurant {
        Restaurant {
            name: "caffe uno".into(),
            food: "italian".into(),
            area: "centre".into(),
            pricerange: "expensive".into(),
            address: "32 bridge street".into(),
            phone: "01223448620".into(),
            postcode: "cb21uj".into(),
        }
    }

    fn goal(requestables: &[Slot], booking: Option<Booking>) -> Goal {
        let mut subtasks = Vec::new();
        if !requestables.is_empty() {
            subtasks.push(Subtask::AskInfo);
        }
        if booking.is_some() {
            subtasks.push(Subtask::MakeReservation);
        }
        Goal {
            id: "g".into(),
            constraints: [(Slot::Food, "italian".to_string())].into(),
            relaxations: SlotMap::new(),
            requestables: requestables.iter().copied().collect(),
            booking,
            failed_time: None,
            subtasks,
        }
    }

    #[test]
    fn vacuous_subtasks_succeed_on_matching_presentation() {
        let g = goal(&[], None);
        let state = DialogState {
            presented: Some(caffe_uno()),
            turn: 2,
            ..Default::default()
        };
        assert_eq!(goal_satisfied(&g, &state), Outcome::Success);
    }

    #[test]
    fn unanswered_request_at_cap_fails() {
        let g = goal(&[Slot::Phone], None);
        let state = DialogState {
            presented: Some(caffe_uno()),
            turn: 10,
            ..Default::default()
        };
        assert_eq!(goal_satisfied(&g, &state), Outcome::Failure);
    }

    #[test]
    fn address_request_answered_by_turn_four() {
        // presented matches food=italian; {address} ⊆ provided; no booking; turn 4 < 10.
        let g = goal(&[Slot::Address], None);
        let state = DialogState {
            presented: Some(caffe_uno()),
            provided_requestables: [Slot::Address].into(),
            turn: 4,
            ..Default::default()
        };
        assert_eq!(goal_satisfied(&g, &state), Outcome::Success);
        let earlier = DialogState {
            provided_requestables: BTreeSet::new(),
            ..state
        };
        assert_eq!(goal_satisfied(&g, &earlier), Outcome::Ongoing);
    }

    #[test]
    fn booking_must_match_goal() {
        let booking = Booking {
            people: 5,
            day: Weekday::Monday,
            time: ClockTime::new(12, 15).unwrap(),
        };
        let g = goal(&[], Some(booking));
        let mut state = DialogState {
            presented: Some(caffe_uno()),
            reservation_confirmed: true,
            booking_filled: PartialBooking {
                people: Some(4),
                day: Some(Weekday::Monday),
                time: Some(booking.time),
            },
            turn: 5,
            ..Default::default()
        };
        assert_eq!(goal_satisfied(&g, &state), Outcome::Ongoing);
        state.booking_filled.people = Some(5);
        assert_eq!(goal_satisfied(&g, &state), Outcome::Success);
    }

    #[test]
    fn relaxed_constraints_count_as_success() {
        let mut g = goal(&[], None);
        g.constraints.insert(Slot::Food, "catalan".into());
        let state = DialogState {
            presented: Some(caffe_uno()),
            turn: 3,
            ..Default::default()
        };
        assert_eq!(goal_satisfied(&g, &state), Outcome::Ongoing);
        g.relaxations.insert(Slot::Food, "italian".into());
        assert_eq!(goal_satisfied(&g, &state), Outcome::Success);
    }
}
