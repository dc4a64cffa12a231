//! The stack-driven user simulator.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Goal, Slot, SlotCategory, SlotMap, SystemAct, SystemActKind, UserAct, UserActKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgendaConfig {
    /// Chance of asking for something else after a fitting result.
    pub p_else: f64,
    /// Range of constraints, or of booking details, volunteered in one unprompted turn.
    pub min_inform: usize,
    pub max_inform: usize,
}

impl Default for AgendaConfig {
    fn default() -> Self {
        AgendaConfig {
            p_else: 0.2,
            min_inform: 1,
            max_inform: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgendaItem {
    pub kind: UserActKind,
    pub slots: Vec<Slot>,
}

impl AgendaItem {
    fn new(kind: UserActKind, slots: Vec<Slot>) -> Self {
        AgendaItem { kind, slots }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agenda {
    /// Pending sub-tasks; the top is the last element, the bottom is Goodbye.
    pub stack: Vec<AgendaItem>,
    /// Informable values already conveyed.
    pub constraint_memory: SlotMap,
    pub config: AgendaConfig,
    relaxed: bool,
    after_failure: bool,
    booked: bool,
    asked: BTreeSet<Slot>,
    received: BTreeSet<Slot>,
    last_informed: Option<Slot>,
}

/// Builds the stack bottom-up: Goodbye, the reservation, one request per
/// requestable, then one inform per constraint in seeded random order.
pub fn agenda_init<R: Rng>(goal: &Goal, config: AgendaConfig, rng: &mut R) -> Agenda {
    let mut stack = vec![AgendaItem::new(UserActKind::Goodbye, Vec::new())];
    if goal.booking.is_some() {
        stack.push(AgendaItem::new(UserActKind::MakeReservation, Slot::BOOKING.to_vec()));
    }
    for s in goal.requestables.iter().rev() {
        stack.push(AgendaItem::new(UserActKind::RequestInfo, vec![*s]));
    }
    let mut informs: Vec<Slot> = goal.constraints.keys().copied().collect();
    informs.shuffle(rng);
    for s in informs {
        stack.push(AgendaItem::new(UserActKind::InformType, vec![s]));
    }
    Agenda {
        stack,
        constraint_memory: SlotMap::new(),
        config,
        relaxed: false,
        after_failure: false,
        booked: false,
        asked: BTreeSet::new(),
        received: BTreeSet::new(),
        last_informed: None,
    }
}

/// Free-function form of [`Agenda::next`].
pub fn agenda_next<R: Rng>(agenda: &mut Agenda, goal: &Goal, system: Option<&SystemAct>, rng: &mut R) -> UserAct {
    agenda.next(goal, system, rng)
}

fn act(kind: UserActKind, slots: SlotMap) -> UserAct {
    UserAct::filtered(kind, &slots)
}

impl Agenda {
    pub fn top(&self) -> Option<&AgendaItem> {
        self.stack.last()
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    fn value(&self, goal: &Goal, slot: Slot) -> Option<String> {
        goal.constraint(slot, self.relaxed).map(str::to_string)
    }

    fn pending_inform(&self, slot: Slot) -> bool {
        self.stack.iter().any(|i| i.kind == UserActKind::InformType && i.slots.contains(&slot))
    }

    fn remove_items(&mut self, kind: UserActKind, slot: Option<Slot>) {
        self.stack
            .retain(|i| i.kind != kind || slot.is_some_and(|s| !i.slots.contains(&s)));
        if self.stack.is_empty() {
            self.stack.push(AgendaItem::new(UserActKind::Goodbye, Vec::new()));
        }
    }

    fn inform(&mut self, goal: &Goal, kind: UserActKind, slots: &[Slot]) -> UserAct {
        let mut out = SlotMap::new();
        for &s in slots {
            if let Some(v) = self.value(goal, s) {
                self.remove_items(UserActKind::InformType, Some(s));
                self.constraint_memory.insert(s, v.clone());
                self.last_informed = Some(s);
                out.insert(s, v);
            }
        }
        act(kind, out)
    }

    /// Pops between `min_inform` and `max_inform` pending constraints.
    fn volunteer<R: Rng>(&mut self, goal: &Goal, rng: &mut R) -> Option<UserAct> {
        let run: Vec<Slot> = self
            .stack
            .iter()
            .rev()
            .take_while(|i| i.kind == UserActKind::InformType)
            .flat_map(|i| i.slots.iter().copied())
            .collect();
        if run.is_empty() {
            return None;
        }
        let hi = self.config.max_inform.clamp(1, run.len());
        let lo = self.config.min_inform.clamp(1, hi);
        let n = rng.gen_range(lo..=hi);
        Some(self.inform(goal, UserActKind::InformType, &run[..n]))
    }

    fn booking_act(&self, goal: &Goal, slots: &[Slot]) -> UserAct {
        let values = slots
            .iter()
            .filter_map(|s| Some((*s, goal.booking_value(*s, self.after_failure)?)))
            .collect();
        act(UserActKind::MakeReservation, values)
    }

    /// Works through the stack until something is worth saying.
    fn advance<R: Rng>(&mut self, goal: &Goal, rng: &mut R) -> UserAct {
        loop {
            let Some(top) = self.stack.last().cloned() else {
                return UserAct::bare(UserActKind::Goodbye);
            };
            match top.kind {
                UserActKind::InformType => {
                    if let Some(a) = self.volunteer(goal, rng) {
                        return a;
                    }
                }
                UserActKind::RequestInfo => {
                    let mut wanted = BTreeSet::new();
                    while let Some(i) = self.stack.last().filter(|i| i.kind == UserActKind::RequestInfo) {
                        wanted.extend(i.slots.iter().filter(|s| !self.received.contains(s)));
                        self.stack.pop();
                    }
                    if !wanted.is_empty() {
                        self.asked.extend(wanted.iter().copied());
                        return act(UserActKind::RequestInfo, wanted.into_iter().map(|s| (s, String::new())).collect());
                    }
                }
                UserActKind::MakeReservation => {
                    self.stack.pop();
                    if !self.booked && goal.booking.is_some() {
                        let mut slots = Slot::BOOKING.to_vec();
                        slots.shuffle(rng);
                        let hi = self.config.max_inform.clamp(1, slots.len());
                        let n = rng.gen_range(self.config.min_inform.clamp(1, hi)..=hi);
                        slots.truncate(n);
                        slots.sort();
                        return self.booking_act(goal, &slots);
                    }
                }
                UserActKind::Goodbye => {
                    self.stack.truncate(1);
                    return UserAct::bare(UserActKind::Goodbye);
                }
                _ => {
                    self.stack.pop();
                }
            }
            if self.stack.is_empty() {
                self.stack.push(AgendaItem::new(UserActKind::Goodbye, Vec::new()));
            }
        }
    }

    fn outstanding(&self) -> Vec<Slot> {
        self.asked.difference(&self.received).copied().collect()
    }

    /// The next user act given the system's last act (`None` opens the dialog).
    pub fn next<R: Rng>(&mut self, goal: &Goal, system: Option<&SystemAct>, rng: &mut R) -> UserAct {
        let Some(sys) = system else {
            return self.advance(goal, rng);
        };
        match sys.kind {
            SystemActKind::Goodbye => UserAct::bare(UserActKind::Goodbye),
            SystemActKind::AskType => {
                let asked: Vec<Slot> = sys
                    .slots
                    .keys()
                    .copied()
                    .filter(|s| s.category() == SlotCategory::Informable && goal.constraints.contains_key(s))
                    .collect();
                if asked.is_empty() {
                    self.advance(goal, rng)
                } else {
                    self.inform(goal, UserActKind::InformType, &asked)
                }
            }
            SystemActKind::PresentResult if sys.get(Slot::Name).is_some() => {
                let wrong: Vec<Slot> = Slot::INFORMABLE
                    .into_iter()
                    .filter(|s| {
                        let want = self.value(goal, *s);
                        let have = sys.get(*s);
                        matches!((want, have), (Some(w), Some(h)) if crate::text::normalize_value(&w) != crate::text::normalize_value(h))
                    })
                    .collect();
                if !wrong.is_empty() {
                    let (pending, told): (Vec<Slot>, Vec<Slot>) =
                        wrong.into_iter().partition(|s| self.pending_inform(*s));
                    if !told.is_empty() {
                        return self.inform(goal, UserActKind::InformTypeChange, &told);
                    }
                    return self.inform(goal, UserActKind::InformType, &pending);
                }
                if rng.gen::<f64>() < self.config.p_else {
                    return UserAct::bare(UserActKind::AnythingElse);
                }
                self.remove_items(UserActKind::InformType, None);
                self.advance(goal, rng)
            }
            SystemActKind::PresentResult => {
                if !self.relaxed && !goal.relaxations.is_empty() {
                    self.relaxed = true;
                    let mut slots: Vec<Slot> = goal.relaxations.keys().copied().collect();
                    if let Some(last) = self.last_informed.filter(|s| goal.relaxations.contains_key(s)) {
                        slots.retain(|s| *s != last);
                        slots.push(last);
                    }
                    return self.inform(goal, UserActKind::InformTypeChange, &slots);
                }
                if let Some(a) = self.volunteer(goal, rng) {
                    return a;
                }
                match self.last_informed {
                    Some(s) => self.inform(goal, UserActKind::InformTypeChange, &[s]),
                    None => self.advance(goal, rng),
                }
            }
            SystemActKind::ProvideInfo => {
                for (s, v) in &sys.slots {
                    if s.category() == SlotCategory::Requestable && !v.is_empty() {
                        self.received.insert(*s);
                    }
                }
                let missing = self.outstanding();
                if missing.is_empty() {
                    self.advance(goal, rng)
                } else {
                    act(UserActKind::RequestInfo, missing.into_iter().map(|s| (s, String::new())).collect())
                }
            }
            SystemActKind::AskReservationInfo => {
                if goal.booking.is_none() || self.booked {
                    return self.advance(goal, rng);
                }
                self.remove_items(UserActKind::MakeReservation, None);
                let mut asked: Vec<Slot> = sys
                    .slots
                    .keys()
                    .copied()
                    .filter(|s| s.category() == SlotCategory::Booking)
                    .collect();
                if asked.is_empty() {
                    asked = Slot::BOOKING.to_vec();
                }
                if self.after_failure && asked == [Slot::Time] {
                    return self.change_time(goal);
                }
                self.booking_act(goal, &asked)
            }
            SystemActKind::InformReservationResult => {
                if goal.booking.is_none() {
                    return self.advance(goal, rng);
                }
                if sys.get(Slot::Reference).is_some() {
                    let agreed = Slot::BOOKING.iter().all(|s| {
                        sys.get(*s).is_none_or(|v| Some(v.to_string()) == goal.booking_value(*s, self.after_failure))
                    });
                    if !agreed {
                        return self.booking_act(goal, &Slot::BOOKING);
                    }
                    self.booked = true;
                    self.remove_items(UserActKind::MakeReservation, None);
                    return self.advance(goal, rng);
                }
                if goal.failed_time.is_some() && !self.after_failure {
                    self.after_failure = true;
                    return self.change_time(goal);
                }
                UserAct::bare(UserActKind::Goodbye)
            }
        }
    }

    fn change_time(&self, goal: &Goal) -> UserAct {
        let time = goal.booking_value(Slot::Time, true).unwrap_or_default();
        act(UserActKind::ReservationChangeTime, [(Slot::Time, time)].into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Subtask;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn italian_address() -> Goal {
        Goal {
            id: "g".into(),
            constraints: [(Slot::Food, "italian".to_string())].into(),
            relaxations: SlotMap::new(),
            requestables: [Slot::Address].into(),
            booking: None,
            failed_time: None,
            subtasks: vec![Subtask::AskInfo],
        }
    }

    #[test]
    fn stack_is_built_bottom_up() {
        let a = agenda_init(&italian_address(), AgendaConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
        let top_down: Vec<_> = a.stack.iter().rev().map(|i| (i.kind, i.slots.clone())).collect();
        assert_eq!(
            top_down,
            vec![
                (UserActKind::InformType, vec![Slot::Food]),
                (UserActKind::RequestInfo, vec![Slot::Address]),
                (UserActKind::Goodbye, vec![]),
            ]
        );
    }

    #[test]
    fn system_goodbye_gets_goodbye() {
        let g = italian_address();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = agenda_init(&g, AgendaConfig::default(), &mut rng);
        let bye = SystemAct::bare(SystemActKind::Goodbye);
        assert_eq!(a.next(&g, Some(&bye), &mut rng).kind, UserActKind::Goodbye);
    }
}
