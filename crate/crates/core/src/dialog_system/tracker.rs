use crate::domain::{DialogState, Slot, SlotCategory, UserActKind};

use super::nlu::NluResult;

/// Folds one understood user turn into the state and advances the turn counter.
pub fn track(state: &DialogState, nlu: &NluResult) -> DialogState {
    let mut s = state.clone();
    s.turn += 1;
    s.last_user_act = Some(nlu.act.kind);
    let slots = nlu.act.slots();
    for (slot, value) in &nlu.mentioned {
        if slot.category() == SlotCategory::Booking {
            s.booking_filled.set(*slot, value);
        }
    }
    match nlu.act.kind {
        UserActKind::InformType | UserActKind::InformTypeChange => {
            let overwrite = nlu.act.kind == UserActKind::InformTypeChange;
            let mut changed = false;
            for (slot, value) in slots.iter().filter(|(_, v)| !v.is_empty()) {
                let known = s.filled_constraints.get(slot);
                if known.is_none() || (overwrite && known != Some(value)) {
                    s.filled_constraints.insert(*slot, value.clone());
                    changed = true;
                }
            }
            if changed {
                s.no_match = false;
            }
        }
        UserActKind::AnythingElse => s.alternative_requested = true,
        UserActKind::RequestInfo => s.requested.extend(slots.keys().copied()),
        UserActKind::MakeReservation | UserActKind::ReservationChangeTime => {
            s.booking_requested = true;
            if slots.contains_key(&Slot::Time) {
                s.booking_failed = false;
            }
        }
        UserActKind::Goodbye => {}
    }
    s
}
