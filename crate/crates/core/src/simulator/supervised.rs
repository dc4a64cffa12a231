//! The learned next-act dialog manager.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::act_model::{features, ActContext, ActModel};
use super::belief::belief_update;
use super::{SimKind, UserSimulator, UserTurn};
use crate::domain::{
    BeliefSpan, Goal, Slot, SlotCategory, SlotMap, SystemAct, SystemActKind, UserAct, UserActKind, MAX_TURNS,
};
use crate::error::Result;
use crate::nlg::UserNlg;
use crate::SimRng;

/// Memory of the supervised dialog manager across one dialog.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlState {
    pub belief: BeliefSpan,
    pub informed: BTreeSet<Slot>,
    pub prev_user: Option<UserAct>,
    pub relaxed: bool,
    pub no_match_seen: bool,
    pub booking_failed: bool,
    pub after_failure: bool,
    pub turn: usize,
}

impl SlState {
    /// Folds in the system's reply to the last user act.
    pub fn observe(&mut self, system: &SystemAct) {
        self.belief = belief_update(&self.belief, self.prev_user.as_ref(), system);
        match system.kind {
            SystemActKind::PresentResult if system.get(Slot::Name).is_none() => self.no_match_seen = true,
            SystemActKind::InformReservationResult => self.booking_failed = system.get(Slot::Reference).is_none(),
            _ => {}
        }
    }

    fn offered(&self) -> bool {
        self.belief.inform.contains_key(&Slot::Name)
    }

    fn booked(&self) -> bool {
        self.belief.inform.contains_key(&Slot::Reference)
    }

    /// An offer has been made and none of its details contradict the goal.
    fn offer_fits(&self, goal: &Goal) -> bool {
        self.offered()
            && Slot::INFORMABLE.into_iter().all(|s| {
                match (goal.constraint(s, self.relaxed), self.belief.inform.get(&s)) {
                    (Some(want), Some(have)) => {
                        crate::text::normalize_value(want) == crate::text::normalize_value(have)
                    }
                    _ => true,
                }
            })
    }

    fn requests_left(&self, goal: &Goal) -> Vec<Slot> {
        goal.requestables
            .iter()
            .copied()
            .filter(|s| !self.belief.inform.contains_key(s))
            .collect()
    }
}

/// Constraint values the user would need to correct or relax.
fn changes(goal: &Goal, state: &SlState, system: Option<&SystemAct>) -> SlotMap {
    if state.no_match_seen && !state.relaxed && !goal.relaxations.is_empty() {
        return goal.relaxations.clone();
    }
    let Some(sys) = system.filter(|s| s.kind == SystemActKind::PresentResult && s.get(Slot::Name).is_some()) else {
        return SlotMap::new();
    };
    Slot::INFORMABLE
        .into_iter()
        .filter(|s| state.informed.contains(s))
        .filter_map(|s| {
            let want = goal.constraint(s, state.relaxed)?;
            let have = sys.get(s)?;
            (crate::text::normalize_value(want) != crate::text::normalize_value(have)).then(|| (s, want.to_string()))
        })
        .collect()
}

fn asked_slots(system: Option<&SystemAct>, kind: SystemActKind, category: SlotCategory) -> Vec<Slot> {
    system
        .filter(|s| s.kind == kind)
        .map(|s| s.slots.keys().copied().filter(|k| k.category() == category).collect())
        .unwrap_or_default()
}

/// Which user acts are consistent with the goal and what has happened so far.
pub fn goal_mask(goal: &Goal, state: &SlState, system: Option<&SystemAct>) -> [bool; 7] {
    use UserActKind::*;
    let mut m = [false; 7];
    let asked_informable = asked_slots(system, SystemActKind::AskType, SlotCategory::Informable)
        .iter()
        .any(|s| goal.constraints.contains_key(s));
    let uninformed = goal.constraints.keys().any(|s| !state.informed.contains(s));
    m[InformType.index()] = uninformed || asked_informable;
    m[InformTypeChange.index()] = !changes(goal, state, system).is_empty();
    let fits = state.offer_fits(goal);
    m[AnythingElse.index()] = state.offered();
    m[RequestInfo.index()] = fits && !state.requests_left(goal).is_empty();
    let booking_open = goal.booking.is_some() && !state.booked();
    m[MakeReservation.index()] = fits && booking_open;
    m[ReservationChangeTime.index()] = fits && booking_open && state.booking_failed;
    let pending = !fits || !state.requests_left(goal).is_empty() || booking_open;
    m[Goodbye.index()] = !pending;
    m
}

/// Model distribution restricted to goal-consistent acts and renormalized;
/// all zeros when every act is masked.
pub fn masked_distribution(model: &ActModel, ctx: &ActContext, mask: &[bool; 7]) -> Vec<f64> {
    let p = model.distribution(&features(ctx));
    let kept: Vec<f64> = p.iter().zip(mask).map(|(p, m)| if *m { *p } else { 0.0 }).collect();
    let z: f64 = kept.iter().sum();
    if z > 0.0 {
        kept.into_iter().map(|p| p / z).collect()
    } else {
        kept
    }
}

/// Samples the next user act from the masked model and attaches goal values.
pub fn sl_next<R: Rng + ?Sized>(
    model: &ActModel,
    state: &SlState,
    goal: &Goal,
    system: Option<&SystemAct>,
    rng: &mut R,
) -> UserAct {
    if system.is_some_and(|s| s.kind == SystemActKind::Goodbye) {
        return UserAct::bare(UserActKind::Goodbye);
    }
    let ctx = ActContext {
        goal,
        belief: &state.belief,
        system,
        prev_user: state.prev_user.as_ref().map(|a| a.kind),
        informed: &state.informed,
        turn: state.turn,
        booking_failed: state.booking_failed,
    };
    let mask = goal_mask(goal, state, system);
    let p = masked_distribution(model, &ctx, &mask);
    if p.iter().all(|x| *x == 0.0) {
        return UserAct::bare(UserActKind::Goodbye);
    }
    let mut u = rng.gen::<f64>();
    let mut kind = UserActKind::Goodbye;
    for (k, pk) in UserActKind::ALL.iter().zip(&p) {
        if *pk > 0.0 {
            kind = *k;
            if u < *pk {
                break;
            }
            u -= pk;
        }
    }
    attach_slots(kind, state, goal, system, rng)
}

fn attach_slots<R: Rng + ?Sized>(
    kind: UserActKind,
    state: &SlState,
    goal: &Goal,
    system: Option<&SystemAct>,
    rng: &mut R,
) -> UserAct {
    let value = |s: Slot| goal.constraint(s, state.relaxed).map(str::to_string);
    let slots: SlotMap = match kind {
        UserActKind::InformType => {
            let asked: Vec<Slot> = asked_slots(system, SystemActKind::AskType, SlotCategory::Informable)
                .into_iter()
                .filter(|s| goal.constraints.contains_key(s))
                .collect();
            let chosen = if asked.is_empty() {
                let mut open: Vec<Slot> = goal.constraints.keys().copied().filter(|s| !state.informed.contains(s)).collect();
                open.shuffle(rng);
                let n = rng.gen_range(1..=open.len().clamp(1, 3));
                open.truncate(n);
                open
            } else {
                asked
            };
            chosen.into_iter().filter_map(|s| Some((s, value(s)?))).collect()
        }
        UserActKind::InformTypeChange => changes(goal, state, system),
        UserActKind::RequestInfo => state.requests_left(goal).into_iter().map(|s| (s, String::new())).collect(),
        UserActKind::MakeReservation => {
            let mut asked = asked_slots(system, SystemActKind::AskReservationInfo, SlotCategory::Booking);
            if asked.is_empty() {
                asked = Slot::BOOKING.to_vec();
            }
            asked
                .into_iter()
                .filter_map(|s| Some((s, goal.booking_value(s, state.after_failure)?)))
                .collect()
        }
        UserActKind::ReservationChangeTime => goal
            .booking_value(Slot::Time, true)
            .map(|t| SlotMap::from([(Slot::Time, t)]))
            .unwrap_or_default(),
        UserActKind::AnythingElse | UserActKind::Goodbye => SlotMap::new(),
    };
    UserAct::filtered(kind, &slots)
}

/// Supervised dialog manager plus an NLG strategy.
#[derive(Debug, Clone)]
pub struct SlSimulator {
    kind: SimKind,
    model: Arc<ActModel>,
    nlg: UserNlg,
    goal: Option<Goal>,
    state: SlState,
    last_utterance: String,
}

impl SlSimulator {
    pub fn new(kind: SimKind, model: Arc<ActModel>, nlg: UserNlg) -> Self {
        SlSimulator {
            kind,
            model,
            nlg,
            goal: None,
            state: SlState::default(),
            last_utterance: String::new(),
        }
    }

    pub fn state(&self) -> &SlState {
        &self.state
    }
}

impl UserSimulator for SlSimulator {
    fn kind(&self) -> SimKind {
        self.kind
    }

    fn reset(&mut self, goal: &Goal, _rng: &mut SimRng) {
        self.goal = Some(goal.clone());
        self.state = SlState::default();
        self.last_utterance.clear();
    }

    fn respond(&mut self, system: Option<(&SystemAct, &str)>, rng: &mut SimRng) -> Result<UserTurn> {
        let goal = self.goal.clone().ok_or_else(|| crate::Error::InvalidGoal("simulator not reset".into()))?;
        if let Some((act, _)) = system {
            self.state.observe(act);
        }
        let act = sl_next(&self.model, &self.state, &goal, system.map(|(a, _)| a), rng);
        match act.kind {
            UserActKind::InformTypeChange if self.state.no_match_seen && !goal.relaxations.is_empty() => {
                self.state.relaxed = true
            }
            UserActKind::ReservationChangeTime => {
                self.state.after_failure = true;
                self.state.booking_failed = false;
            }
            _ => {}
        }
        self.state
            .informed
            .extend(act.slots().keys().filter(|s| s.category() == SlotCategory::Informable));
        let context = [system.map_or("", |(_, u)| u), self.last_utterance.as_str()];
        let utterance = self.nlg.realize(&act, &context, rng)?;
        self.state.prev_user = Some(act.clone());
        self.state.turn += 1;
        self.last_utterance = utterance.clone();
        let done = act.kind == UserActKind::Goodbye || self.state.turn >= MAX_TURNS as usize;
        Ok(UserTurn {
            utterance,
            act: Some(act),
            done,
        })
    }
}
