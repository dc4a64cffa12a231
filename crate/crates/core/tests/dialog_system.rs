mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use usersim::dialog_system::*;
use usersim::domain::*;
use usersim::rl::{run_episode, success_rate, EpisodeConfig};
use usersim::simulator::SimKind;
use usersim::{seeded, SimRng};

fn slots(pairs: &[(Slot, &str)]) -> SlotMap {
    pairs.iter().map(|(s, v)| (*s, v.to_string())).collect()
}

#[test]
fn booking_request_is_parsed_with_its_details() {
    let nlu = &common::lab().core.nlu;
    let r = nlu.parse("book a table for 5 people at 12:15 on monday");
    assert_eq!(r.act.kind, UserActKind::MakeReservation);
    assert_eq!(
        r.act.slots(),
        &slots(&[(Slot::People, "5"), (Slot::Time, "12:15"), (Slot::Day, "monday")])
    );
    assert_eq!(r.confidence, 1.0);
    assert_eq!(nlu.parse("goodbye").act.kind, UserActKind::Goodbye);
    let unknown = nlu.parse("hmm");
    assert_eq!(unknown.act, UserAct::bare(UserActKind::InformType));
    assert_eq!(unknown.confidence, 0.0);
}

#[test]
fn nlu_gold_accuracy() {
    let nlu = &common::lab().core.nlu;
    let gold = common::gold_acts();
    let hits = gold.iter().filter(|(act, text)| nlu.parse(text).act.kind == *act).count();
    assert!(hits as f64 / gold.len() as f64 >= 0.9, "{hits}/{}", gold.len());
}

#[test]
fn nlu_noise_flips_acts() {
    let lab = common::lab();
    let noisy = lab.core.clone().with_nlu_noise(1.0);
    let mut rng = seeded(3);
    for _ in 0..50 {
        let (r, _) = noisy.understand(&DialogState::default(), "goodbye", &mut rng);
        assert_ne!(r.act.kind, UserActKind::Goodbye);
        assert_eq!(r.confidence, 0.0);
    }
    let (mut a, b) = (seeded(9), seeded(9));
    lab.core.understand(&DialogState::default(), "goodbye", &mut a);
    assert_eq!(a, b, "clean NLU must not consume randomness");
}

fn understood(kind: UserActKind, pairs: &[(Slot, &str)]) -> NluResult {
    NluResult {
        act: UserAct::new(kind, slots(pairs)).unwrap(),
        confidence: 1.0,
        mentioned: slots(pairs),
    }
}

#[test]
fn scripted_tracker_trace() {
    use UserActKind::*;
    let turns = [
        understood(InformType, &[(Slot::Food, "italian")]),
        understood(InformType, &[(Slot::Area, "centre"), (Slot::Pricerange, "cheap")]),
        understood(InformTypeChange, &[(Slot::Food, "chinese")]),
        understood(RequestInfo, &[(Slot::Phone, "")]),
        understood(MakeReservation, &[(Slot::People, "2"), (Slot::Day, "friday")]),
        understood(Goodbye, &[]),
    ];
    let mut s = DialogState::default();
    let mut states = Vec::new();
    for t in &turns {
        s = track(&s, t);
        states.push(s.clone());
    }
    assert_eq!(states[0].filled_constraints, slots(&[(Slot::Food, "italian")]));
    assert!(!states[0].constraints_complete());
    assert_eq!(
        states[1].filled_constraints,
        slots(&[(Slot::Food, "italian"), (Slot::Area, "centre"), (Slot::Pricerange, "cheap")])
    );
    assert!(states[1].constraints_complete());
    assert_eq!(states[2].filled_constraints[&Slot::Food], "chinese");
    assert_eq!(states[3].requested, [Slot::Phone].into());
    assert!(states[4].booking_requested);
    assert_eq!(states[4].booking_filled.missing(), vec![Slot::Time]);
    let mut expected = states[4].clone();
    expected.turn = 6;
    expected.last_user_act = Some(Goodbye);
    assert_eq!(states[5], expected);
    for (i, st) in states.iter().enumerate() {
        assert_eq!(st.turn, i as u32 + 1);
    }
}

#[test]
fn rule_policy_branches() {
    use SystemActKind::*;
    assert_eq!(rule_policy(&DialogState::default()), AskType);
    let core = &common::lab().core;
    let mut s = track(
        &DialogState::default(),
        &understood(
            UserActKind::InformType,
            &[(Slot::Food, "italian"), (Slot::Area, "centre"), (Slot::Pricerange, "cheap")],
        ),
    );
    assert_eq!(rule_policy(&s), PresentResult);
    let (act, text) = core.respond(PresentResult, &mut s, "g").unwrap();
    let top = &core.backend.db.query(&s.filled_constraints)[0].name;
    assert_eq!(act.get(Slot::Name), Some(top.as_str()));
    assert!(text.contains(top.as_str()));

    s = track(&s, &understood(UserActKind::RequestInfo, &[(Slot::Phone, "")]));
    assert_eq!(rule_policy(&s), ProvideInfo);
    core.respond(ProvideInfo, &mut s, "g").unwrap();
    s = track(&s, &understood(UserActKind::MakeReservation, &[(Slot::People, "3")]));
    assert_eq!(rule_policy(&s), AskReservationInfo);
    s = track(&s, &understood(UserActKind::MakeReservation, &[(Slot::Day, "monday"), (Slot::Time, "12:00")]));
    assert_eq!(rule_policy(&s), InformReservationResult);
    let (act, text) = core.respond(InformReservationResult, &mut s, "g").unwrap();
    let reference = act.get(Slot::Reference).unwrap();
    assert!(Regex::new("^[a-z0-9]{8}$").unwrap().is_match(reference));
    assert_eq!(reference, reference_number("g", top));
    assert!(text.contains(reference));
    s = track(&s, &understood(UserActKind::Goodbye, &[]));
    assert_eq!(rule_policy(&s), Goodbye);
}

#[test]
fn mask_examples() {
    let m = mask(&DialogState::default());
    assert!(!m.allows(SystemActKind::InformReservationResult));
    assert!(!m.allows(SystemActKind::ProvideInfo));
    let full = DialogState {
        presented: Some(common::lab().corpus.db.all()[0].clone()),
        booking_filled: PartialBooking {
            people: Some(2),
            day: Some(Weekday::Monday),
            time: Some("12:00".parse().unwrap()),
        },
        ..Default::default()
    };
    assert_eq!(mask(&full).count(), 6);
}

/// Picks uniformly among allowed acts and checks the mask on the way.
struct Checking;

impl SystemPolicy for Checking {
    fn choose(&self, state: &DialogState, _: &str, mask: &ActionMask, rng: &mut SimRng) -> SystemActKind {
        assert!(mask.count() >= 1);
        assert!(mask.allows(rule_policy(state)), "rule act masked in {state:?}");
        assert_eq!(*mask, usersim::dialog_system::mask(state));
        *mask.allowed().choose(rng).unwrap()
    }
}

#[test]
fn random_episodes_never_mask_everything() {
    let lab = common::lab();
    let mut rng = seeded(21);
    for kind in [SimKind::AgenT, SimKind::SlT] {
        let mut sim = lab.simulator(kind);
        for _ in 0..5000 {
            let goal = &lab.goals()[rng.gen_range(0..lab.goals().len())];
            let ep = run_episode(sim.as_mut(), &lab.core, &Checking, goal, &mut rng, &EpisodeConfig::default());
            assert!(ep.aborted.is_none(), "{:?}", ep.aborted);
            for t in &ep.dialog.turns {
                if let Some(s) = &t.state {
                    s.check_invariants().unwrap();
                }
            }
        }
    }
}

#[test]
fn rule_system_is_competent_against_agenda_users() {
    let lab = common::lab();
    for kind in [SimKind::AgenT, SimKind::AgenR, SimKind::AgenG] {
        let mut sim = lab.simulator(kind);
        let rate = success_rate(sim.as_mut(), &lab.core, &RulePolicy, lab.goals(), 500, 13);
        assert!(rate >= 0.95, "{kind}: {rate}");
    }
}

proptest! {
    #[test]
    fn tracking_twice_only_moves_the_turn(
        kind in 0usize..7,
        food in prop::sample::select(vec!["thai", "italian", "indian"]),
        people in 1u32..8,
    ) {
        let kind = UserActKind::ALL[kind];
        let pairs: Vec<(Slot, String)> = match kind.slot_category() {
            Some(SlotCategory::Informable) => vec![(Slot::Food, food.to_string())],
            Some(SlotCategory::Requestable) => vec![(Slot::Phone, String::new())],
            Some(SlotCategory::Booking) => vec![(Slot::People, people.to_string())],
            None => vec![],
        };
        let refs: Vec<(Slot, &str)> = pairs.iter().map(|(s, v)| (*s, v.as_str())).collect();
        let r = understood(kind, &refs);
        let once = track(&DialogState::default(), &r);
        let mut twice = track(&once, &r);
        prop_assert_eq!(twice.turn, once.turn + 1);
        twice.turn = once.turn;
        prop_assert_eq!(twice, once);
    }
}
