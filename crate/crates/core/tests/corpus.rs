mod common;

use proptest::prelude::*;
use usersim::corpus::*;
use usersim::domain::*;
use usersim::error::Error;
use usersim::seeded;

#[test]
fn gold_sample_accuracy() {
    let annotator = common::lab().corpus.annotator();
    let gold = common::gold_acts();
    assert_eq!(gold.len(), 100);
    let hits = gold.iter().filter(|(act, text)| annotator.annotate(text).act.kind == *act).count();
    assert!(hits >= 90, "{hits}/100");
}

#[test]
fn request_for_address_and_phone() {
    let annotator = common::lab().corpus.annotator();
    let a = annotator.annotate("can i get the address and phone number ?");
    assert!(a.matched);
    assert_eq!(a.act.kind, UserActKind::RequestInfo);
    assert_eq!(a.act.slot_names(), [Slot::Address, Slot::Phone].into());
    assert_eq!(annotator.annotate("goodbye").act.kind, UserActKind::Goodbye);
}

#[test]
fn annotation_is_deterministic() {
    let lab = common::lab();
    let mut a = lab.corpus.dialogs[..50].to_vec();
    let mut b = a.clone();
    let annotator = lab.corpus.annotator();
    let ra = annotator.annotate_dialogs(&mut a);
    let rb = annotator.annotate_dialogs(&mut b);
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    for d in &a {
        for t in d.user_turns() {
            assert!(t.user_act().is_some());
        }
    }
}

#[test]
fn synthetic_goals_are_skewed_then_balanced() {
    let goals = &common::lab().corpus.goals;
    assert!((goals.pre_balance.ask_info - 2.0 / 3.0).abs() < 0.05, "{:?}", goals.pre_balance);
    assert!((0.45..=0.55).contains(&goals.post_balance.make_reservation), "{:?}", goals.post_balance);
    assert_eq!(goals.subtask_counts, subtask_counts(&goals.goals));
    let ask = goals.subtask_counts[&Subtask::AskInfo] as f64;
    let book = goals.subtask_counts[&Subtask::MakeReservation] as f64;
    assert!((ask - book).abs() / goals.len() as f64 <= 0.1);
    for g in &goals.goals {
        g.validate().unwrap();
    }
}

#[test]
fn uniform_goal_sampling() {
    let goals = common::lab().goals();
    let db = GoalDb::from_goals(goals[..2].to_vec());
    let mut rng = seeded(17);
    let first = (0..10_000)
        .filter(|_| sample_goal(&db, &mut rng).unwrap().id == goals[0].id)
        .count() as f64
        / 10_000.0;
    assert!((0.47..=0.53).contains(&first), "{first}");

    let one = GoalDb::from_goals(goals[..1].to_vec());
    assert_eq!(sample_goal(&one, &mut rng).unwrap(), &goals[0]);
    let a = sample_goal(&GoalDb::from_goals(goals.to_vec()), &mut seeded(3)).unwrap().clone();
    let b = sample_goal(&GoalDb::from_goals(goals.to_vec()), &mut seeded(3)).unwrap().clone();
    assert_eq!(a, b);
    assert!(matches!(sample_goal(&GoalDb::from_goals(Vec::new()), &mut rng), Err(Error::EmptyGoalDb)));
}

#[test]
fn delexicalize_fixture() {
    let gaz = common::lab().corpus.gazetteer();
    assert_eq!(
        gaz.delexicalize_text("caffe uno is at 32 bridge street").join(" "),
        "<name> is at <address>"
    );
    assert_eq!(gaz.delexicalize_text("hello there , thanks").join(" "), "hello there , thanks");
}

#[test]
fn east_italian_by_linear_scan() {
    let db = &common::lab().corpus.db;
    let c: SlotMap = [(Slot::Food, "italian".to_string()), (Slot::Area, "east".to_string())].into();
    let hits: Vec<&str> = db.query(&c).iter().map(|r| r.name.as_str()).collect();
    let mut scan: Vec<&str> = db
        .all()
        .iter()
        .filter(|r| r.food == "italian" && r.area == "east")
        .map(|r| r.name.as_str())
        .collect();
    scan.sort_unstable();
    assert_eq!(hits, scan);
    assert_eq!(db.query(&SlotMap::new()).len(), db.len());
}

fn constraints() -> impl Strategy<Value = SlotMap> {
    let ont = Ontology::bundled();
    let pick = |slot: Slot, values: Vec<String>| {
        prop::option::of(prop::sample::select(values)).prop_map(move |v| v.map(|v| (slot, v)))
    };
    (
        pick(Slot::Food, ont.values(Slot::Food).to_vec()),
        pick(Slot::Area, ont.values(Slot::Area).to_vec()),
        pick(Slot::Pricerange, ont.values(Slot::Pricerange).to_vec()),
    )
        .prop_map(|(a, b, c)| [a, b, c].into_iter().flatten().collect())
}

proptest! {
    #[test]
    fn query_equals_brute_force_filter(c in constraints(), extra in constraints()) {
        let db = &common::lab().corpus.db;
        let hits: Vec<String> = db.query(&c).iter().map(|r| r.name.clone()).collect();
        let mut scan: Vec<String> = db.all().iter().filter(|r| r.matches(&c)).map(|r| r.name.clone()).collect();
        scan.sort();
        prop_assert_eq!(&hits, &scan);

        let mut wider = extra.clone();
        wider.extend(c.clone());
        for r in db.query(&wider) {
            prop_assert!(hits.contains(&r.name));
        }
    }

    #[test]
    fn delexicalize_is_idempotent(
        picks in prop::collection::vec((0usize..30, 0usize..7), 1..4),
        filler in prop::collection::vec(prop::sample::select(vec!["the", "is", "at", "a", "place", "i", "want", "?"]), 0..6),
    ) {
        let lab = common::lab();
        let gaz = lab.corpus.gazetteer();
        let rows = lab.corpus.db.all();
        let fields = [Slot::Name, Slot::Food, Slot::Area, Slot::Pricerange, Slot::Address, Slot::Phone, Slot::Postcode];
        let mut words: Vec<String> = filler.iter().map(|s| s.to_string()).collect();
        for (i, (r, f)) in picks.iter().enumerate() {
            let v = rows[r % rows.len()].value(fields[*f]).unwrap().to_string();
            words.insert(i.min(words.len()), v);
        }
        let once = gaz.delexicalize_text(&words.join(" "));
        let twice = gaz.delexicalize(&once);
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn ingest_writes_the_documented_artifacts_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw");
    let config = synth::SynthConfig {
        restaurant_dialogs: 120,
        distractor_dialogs: 10,
        ..Default::default()
    };
    synth::write_corpus(&raw, &RestaurantDb::bundled(), &Ontology::bundled(), &config).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let summary = ingest(&raw.join("data.json"), &a, 7).unwrap();
    ingest(&raw.join("data.json"), &b, 7).unwrap();
    assert_eq!(summary.dialogs, 120);
    assert!(summary.match_rate > 0.9);
    for f in ["annotated.jsonl", "goals.json", "restaurants.json", "annotation_report.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let back = Corpus::load(&a).unwrap();
    assert_eq!(back.dialogs.len(), 120);
    assert_eq!(back.goals.len(), summary.goals);
    assert!(back.dialogs.iter().all(Dialog::is_well_formed));
}

#[test]
fn too_few_goals_is_an_error() {
    let dialogs = common::lab().corpus.dialogs[..3].to_vec();
    let err = build_goal_db(&dialogs, &RestaurantDb::bundled(), &mut seeded(0)).unwrap_err();
    assert!(matches!(err, Error::InsufficientData(_)), "{err:?}");
}

#[test]
fn filled_user_templates_annotate_to_their_own_act() {
    let annotator = common::lab().corpus.annotator();
    let bank = usersim::nlg::TemplateBank::bundled_user();
    let values = [
        ("<food>", "italian"),
        ("<area>", "centre"),
        ("<pricerange>", "cheap"),
        ("<name>", "caffe uno"),
        ("<people>", "4"),
        ("<day>", "monday"),
        ("<time>", "18:30"),
        ("<request>", "phone number and address"),
    ];
    let mut misses = Vec::new();
    for kind in UserActKind::ALL {
        for t in bank.templates(kind.as_str()) {
            let text = values.iter().fold(t.to_string(), |s, (k, v)| s.replace(k, v));
            let got = annotator.annotate(&text).act.kind;
            if got != kind {
                misses.push(format!("{kind}: `{text}` -> {got}"));
            }
        }
    }
    assert!(misses.is_empty(), "{misses:#?}");
}
