use crate::domain::{BeliefSpan, Slot, SlotCategory, SystemAct, SystemActKind, UserAct, UserActKind};

/// Updates the user-side belief span with the user's last act and the system's reply.
///
/// Requests the user makes are remembered until the system supplies them; every
/// value the system offers is kept in `inform`.
pub fn belief_update(prev: &BeliefSpan, user: Option<&UserAct>, system: &SystemAct) -> BeliefSpan {
    let mut b = prev.clone();
    if let Some(u) = user {
        match u.kind {
            UserActKind::RequestInfo => b.request.extend(u.slots().keys().copied()),
            UserActKind::MakeReservation | UserActKind::ReservationChangeTime => {
                for (s, v) in u.slots() {
                    b.book.set(*s, v);
                }
            }
            _ => {}
        }
    }
    let offers = match system.kind {
        SystemActKind::PresentResult => system.slots.contains_key(&Slot::Name),
        SystemActKind::ProvideInfo => true,
        SystemActKind::InformReservationResult => system.slots.contains_key(&Slot::Reference),
        _ => false,
    };
    if offers {
        for (s, v) in &system.slots {
            if v.is_empty() {
                continue;
            }
            if s.category() == SlotCategory::Booking {
                b.book.set(*s, v);
            } else {
                b.inform.insert(*s, v.clone());
            }
        }
    }
    b.request.retain(|s| !b.inform.contains_key(s));
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SlotMap;

    #[test]
    fn provided_phone_leaves_request() {
        let ask = UserAct::new(UserActKind::RequestInfo, [(Slot::Phone, String::new())].into()).unwrap();
        let after_ask = belief_update(&BeliefSpan::default(), Some(&ask), &SystemAct::bare(SystemActKind::AskType));
        assert!(after_ask.request.contains(&Slot::Phone));
        let give = SystemAct::new(
            SystemActKind::ProvideInfo,
            SlotMap::from([(Slot::Phone, "01223448620".to_string())]),
        );
        let b = belief_update(&after_ask, None, &give);
        assert!(b.request.is_empty());
        assert_eq!(b.inform[&Slot::Phone], "01223448620");
    }

    #[test]
    fn ask_type_changes_nothing() {
        let b = BeliefSpan {
            request: [Slot::Address].into(),
            ..Default::default()
        };
        let asked = SystemAct::new(SystemActKind::AskType, [(Slot::Food, String::new())].into());
        assert_eq!(belief_update(&b, None, &asked), b);
    }
}
