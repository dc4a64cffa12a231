use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{booking_available, RestaurantDb};
use crate::domain::{DialogState, Slot, SlotMap, SystemAct, SystemActKind, UserActKind};

/// Which of the six system acts are possible in a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionMask(pub [bool; 6]);

impl ActionMask {
    pub fn allows(&self, kind: SystemActKind) -> bool {
        self.0[kind.index()]
    }

    pub fn allowed(&self) -> Vec<SystemActKind> {
        SystemActKind::ALL.into_iter().filter(|k| self.allows(*k)).collect()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|a| **a).count()
    }
}

/// Nothing can be told about or booked at a restaurant before one is presented.
pub fn mask(state: &DialogState) -> ActionMask {
    let presented = state.presented.is_some();
    let mut m = [true; 6];
    m[SystemActKind::ProvideInfo.index()] = presented;
    m[SystemActKind::AskReservationInfo.index()] = presented;
    m[SystemActKind::InformReservationResult.index()] = presented && state.booking_filled.is_complete();
    ActionMask(m)
}

fn answerable(state: &DialogState) -> Vec<Slot> {
    state
        .requested
        .iter()
        .copied()
        .filter(|s| *s != Slot::Reference || state.reservation_confirmed)
        .collect()
}

/// The hand-written reference policy.
pub fn rule_policy(state: &DialogState) -> SystemActKind {
    use SystemActKind::*;
    if state.last_user_act == Some(UserActKind::Goodbye) {
        return Goodbye;
    }
    if !state.constraints_complete() {
        return AskType;
    }
    if state.alternative_requested || !state.presented_is_current() {
        return PresentResult;
    }
    if !answerable(state).is_empty() {
        return ProvideInfo;
    }
    if state.booking_requested && !state.reservation_confirmed {
        if state.booking_filled.is_complete() && !state.booking_failed {
            return InformReservationResult;
        }
        return AskReservationInfo;
    }
    AskType
}

/// Turns a chosen act kind into a concrete act and applies its effect on the state.
#[derive(Debug, Clone)]
pub struct Backend {
    pub db: RestaurantDb,
}

impl Backend {
    pub fn new(db: RestaurantDb) -> Self {
        Backend { db }
    }

    pub fn execute(&self, kind: SystemActKind, state: &mut DialogState, goal_id: &str) -> SystemAct {
        let mut slots = SlotMap::new();
        match kind {
            SystemActKind::AskType => {
                for s in state.missing_constraints() {
                    slots.insert(s, String::new());
                }
            }
            SystemActKind::PresentResult => {
                let matches = self.db.query(&state.filled_constraints);
                let fresh: Vec<_> = matches.iter().filter(|r| !state.offered.contains(&r.name)).collect();
                let pick = fresh.first().copied().or(matches.first()).copied();
                state.alternative_requested = false;
                match pick {
                    Some(r) => {
                        for s in [Slot::Name, Slot::Food, Slot::Area, Slot::Pricerange] {
                            slots.insert(s, r.value(s).unwrap_or_default().to_string());
                        }
                        state.offered.insert(r.name.clone());
                        state.presented = Some(r.clone());
                        state.no_match = false;
                    }
                    None => {
                        slots = state.filled_constraints.clone();
                        state.no_match = true;
                    }
                }
            }
            SystemActKind::ProvideInfo => {
                if let Some(r) = &state.presented {
                    slots.insert(Slot::Name, r.name.clone());
                    for s in answerable(state) {
                        let value = match s {
                            Slot::Reference => state.reference.clone().unwrap_or_default(),
                            other => r.value(other).unwrap_or_default().to_string(),
                        };
                        slots.insert(s, value);
                        state.provided_requestables.insert(s);
                        state.requested.remove(&s);
                    }
                }
            }
            SystemActKind::AskReservationInfo => {
                let mut missing = state.booking_filled.missing();
                if missing.is_empty() && state.booking_failed {
                    missing.push(Slot::Time);
                }
                for s in missing {
                    slots.insert(s, String::new());
                }
            }
            SystemActKind::InformReservationResult => {
                if let (Some(b), Some(r)) = (state.booking_filled.complete(), &state.presented) {
                    for s in Slot::BOOKING {
                        slots.insert(s, b.value(s).unwrap_or_default());
                    }
                    if booking_available(b.day, b.time) {
                        let reference = reference_number(goal_id, &r.name);
                        slots.insert(Slot::Reference, reference.clone());
                        state.reference = Some(reference);
                        state.reservation_confirmed = true;
                        state.booking_failed = false;
                    } else {
                        state.booking_failed = true;
                    }
                }
            }
            SystemActKind::Goodbye => {}
        }
        SystemAct::new(kind, slots)
    }
}

/// Eight lowercase alphanumerics derived from the goal and the restaurant.
pub fn reference_number(goal_id: &str, restaurant: &str) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    let digest = Sha256::new().chain_update(goal_id).chain_update([0u8]).chain_update(restaurant).finalize();
    digest[..8]
        .iter()
        .map(|b| ALPHABET[*b as usize % ALPHABET.len()] as char)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PartialBooking;

    #[test]
    fn initial_state_masks_reservation_result() {
        let m = mask(&DialogState::default());
        assert!(!m.allows(SystemActKind::InformReservationResult));
        assert!(m.allows(SystemActKind::AskType));
        assert_eq!(rule_policy(&DialogState::default()), SystemActKind::AskType);
    }

    #[test]
    fn presented_with_complete_booking_allows_everything() {
        let db = RestaurantDb::bundled();
        let state = DialogState {
            presented: db.get("caffe uno").cloned(),
            booking_filled: PartialBooking {
                people: Some(2),
                day: "monday".parse().ok(),
                time: "12:00".parse().ok(),
            },
            ..Default::default()
        };
        assert_eq!(mask(&state).count(), 6);
    }

    #[test]
    fn reference_numbers_are_stable_and_well_formed() {
        let a = reference_number("g1", "caffe uno");
        assert_eq!(a, reference_number("g1", "caffe uno"));
        assert_ne!(a, reference_number("g2", "caffe uno"));
        assert!(regex::Regex::new("^[a-z0-9]{8}$").unwrap().is_match(&a));
    }
}
