mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;
use usersim::domain::*;
use usersim::nlg::*;
use usersim::simulator::SimKind;
use usersim::seeded;

fn inform(pairs: &[(Slot, &str)]) -> UserAct {
    UserAct::new(UserActKind::InformType, pairs.iter().map(|(s, v)| (*s, v.to_string())).collect()).unwrap()
}

#[test]
fn every_user_and_system_act_has_two_templates() {
    let user: Vec<&str> = UserActKind::ALL.iter().map(|k| k.as_str()).collect();
    assert!(TemplateBank::bundled_user().thin_acts(&user).is_empty());
    let system: Vec<&str> = SystemActKind::ALL.iter().map(|k| k.as_str()).collect();
    assert!(TemplateBank::bundled_system().thin_acts(&system).is_empty());
}

#[test]
fn forced_fills() {
    let bank = TemplateBank::bundled_user();
    let bye = user_fill(&UserAct::bare(UserActKind::Goodbye));
    assert_eq!(bank.render_first("goodbye", &bye).unwrap(), "thank you , goodbye .");
    let food = user_fill(&inform(&[(Slot::Food, "italian")]));
    assert_eq!(bank.render_first("inform_type", &food).unwrap(), "i am looking for a italian restaurant .");
}

#[test]
fn renders_stay_within_the_fill_closure() {
    let bank = TemplateBank::bundled_user();
    let act = inform(&[(Slot::Food, "italian"), (Slot::Area, "centre")]);
    let closure: BTreeSet<String> = bank
        .templates("inform_type")
        .filter(|t| {
            let holes: BTreeSet<&str> = t.split(' ').filter(|w| w.starts_with('<')).collect();
            holes == ["<food>", "<area>"].into()
        })
        .map(|t| t.replace("<food>", "italian").replace("<area>", "centre"))
        .collect();
    assert!(closure.len() >= 2);
    let mut rng = seeded(1);
    let mut seen = BTreeSet::new();
    for _ in 0..1000 {
        let s = bank.render_user(&act, &mut rng).unwrap();
        assert!(closure.contains(&s), "{s}");
        seen.insert(s);
    }
    assert_eq!(seen, closure);
    assert_eq!(
        bank.render_user(&act, &mut seeded(5)).unwrap(),
        bank.render_user(&act, &mut seeded(5)).unwrap()
    );
}

#[test]
fn unfillable_acts_are_errors() {
    let bank = TemplateBank::parse("goodbye\tbye .\ngoodbye\tsee you .\n").unwrap();
    let err = bank.render_user(&inform(&[(Slot::Food, "thai")]), &mut seeded(0)).unwrap_err();
    assert!(matches!(err, usersim::Error::NoTemplate { .. }));
    assert!(TemplateBank::parse("no tab here").is_err());
}

fn doc(context: &str, utterance: &str) -> Doc {
    Doc {
        context: context.split(' ').map(String::from).collect(),
        kind: UserActKind::Goodbye,
        slots: BTreeSet::new(),
        utterance: utterance.into(),
    }
}

/// Dense tf-idf cosine, computed from scratch.
fn dense_cosine(docs: &[&str], a: &str, b: &str) -> f64 {
    let n = docs.len() as f64;
    let vocab: BTreeSet<&str> = docs.iter().flat_map(|d| d.split(' ')).collect();
    let vec = |text: &str| -> Vec<f64> {
        let words: Vec<&str> = text.split(' ').collect();
        let v: Vec<f64> = vocab
            .iter()
            .map(|w| {
                let df = docs.iter().filter(|d| d.split(' ').any(|x| x == *w)).count() as f64;
                words.iter().filter(|x| *x == w).count() as f64 * (n / df).ln()
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| if norm > 0.0 { x / norm } else { 0.0 }).collect()
    };
    vec(a).iter().zip(vec(b)).map(|(x, y)| x * y).sum()
}

#[test]
fn four_candidate_retrieval() {
    let contexts = [
        "is there anything else",
        "the booking was successful",
        "booking was successful the reference is ready",
        "sorry the booking failed",
    ];
    let index = TfIdfIndex::build(contexts.iter().enumerate().map(|(i, c)| doc(c, &i.to_string())).collect());
    let query = "booking was successful reference";
    let q = index.vectorize(&query.split(' ').collect::<Vec<_>>());
    // by hand: 0, 0.5710, 0.7376, 0.0240
    let by_hand = [0.0, 0.5710, 0.7376, 0.0240];
    for (c, expected) in index.candidates().iter().zip(by_hand) {
        let cos = index.cosine(&q, c);
        assert!((cos - expected).abs() < 1e-4, "candidate {}: {cos}", c.id);
        assert!((cos - dense_cosine(&contexts, query, contexts[c.id])).abs() < 1e-12);
    }
    let words: Vec<&str> = query.split(' ').collect();
    let bye = UserAct::bare(UserActKind::Goodbye);
    assert_eq!(index.retrieve(&bye, &words).unwrap().id, 2);

    let exact: Vec<&str> = contexts[3].split(' ').collect();
    assert_eq!(index.retrieve(&bye, &exact).unwrap().id, 3);
    let nothing: Vec<&str> = vec!["zzz"];
    assert_eq!(index.retrieve(&bye, &nothing).unwrap().id, 0);
    assert!(index.retrieve(&UserAct::bare(UserActKind::AnythingElse), &words).is_none());
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_scale_free(
        a in prop::collection::vec(prop::sample::select(vec!["what", "food", "area", "would", "like", "book"]), 1..8),
        b in prop::collection::vec(prop::sample::select(vec!["what", "food", "area", "would", "like", "book"]), 1..8),
        scale in 1usize..4,
    ) {
        let docs = vec![
            doc("what food would you like", "x"),
            doc("what area would you like", "y"),
            doc("shall i book it", "z"),
        ];
        let index = TfIdfIndex::build(docs);
        let va = index.vectorize(&a);
        let vb = index.vectorize(&b);
        let ab: f64 = va.iter().map(|(i, x)| vb.iter().find(|(j, _)| j == i).map_or(0.0, |(_, y)| x * y)).sum();
        let ba: f64 = vb.iter().map(|(i, x)| va.iter().find(|(j, _)| j == i).map_or(0.0, |(_, y)| x * y)).sum();
        prop_assert!((ab - ba).abs() < 1e-12);
        let repeated: Vec<&str> = a.iter().cycle().take(a.len() * scale).copied().collect();
        for c in index.candidates() {
            prop_assert!((index.cosine(&va, c) - index.cosine(&index.vectorize(&repeated), c)).abs() < 1e-12);
        }
    }
}

fn toks(s: &str) -> Vec<String> {
    s.split(' ').map(String::from).collect()
}

#[test]
fn three_sentence_trigram_by_hand() {
    let sig = ActSignature::of(&UserAct::bare(UserActKind::Goodbye));
    let lm = CondNgramLM::train(
        ["thank you", "thank you very much", "bye now"].map(|s| (sig.clone(), toks(s))),
        0.1,
        1,
    );
    // predicted tokens: thank you very much bye now </s>
    let p = |u: &str, v: &str| -> BTreeMap<String, f64> {
        lm.distribution(&sig, u, v).unwrap().into_iter().map(|(w, p)| (w.to_string(), p)).collect()
    };
    let start = p(BOS, BOS);
    assert_eq!(start.len(), 7);
    assert!((start["thank"] - 2.1 / 3.7).abs() < 1e-12);
    assert!((start["bye"] - 1.1 / 3.7).abs() < 1e-12);
    assert!((start["now"] - 0.1 / 3.7).abs() < 1e-12);
    let after = p("thank", "you");
    assert!((after[EOS] - 1.1 / 2.7).abs() < 1e-12);
    assert!((after["very"] - 1.1 / 2.7).abs() < 1e-12);
    assert!((p("much", "bye")["now"] - 1.0 / 7.0).abs() < 1e-12);
    for ctx in [(BOS, BOS), (BOS, "thank"), ("thank", "you"), ("very", "much"), ("x", "y")] {
        let total: f64 = p(ctx.0, ctx.1).values().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    let bye = UserAct::bare(UserActKind::Goodbye);
    assert_eq!(lm.generate(&bye, 0.0, &mut seeded(0)).unwrap(), "thank you");
}

#[test]
fn single_path_generation_is_exact() {
    let sig = ActSignature::of(&UserAct::bare(UserActKind::Goodbye));
    let lm = CondNgramLM::train([(sig.clone(), toks("good bye ."))], 0.1, 1);
    let bye = UserAct::bare(UserActKind::Goodbye);
    for seed in 0..5 {
        assert_eq!(lm.generate(&bye, 0.0, &mut seeded(seed)).unwrap(), "good bye .");
    }
    assert!(lm.generate(&UserAct::bare(UserActKind::AnythingElse), 0.0, &mut seeded(0)).is_none());
}

#[test]
fn generation_falls_back_to_templates_for_unknown_acts() {
    let lab = common::lab();
    let sig = ActSignature::of(&UserAct::bare(UserActKind::Goodbye));
    let lm = CondNgramLM::train([(sig, toks("good bye ."))], 0.1, 1);
    let nlg = UserNlg::generation(
        Arc::new(TemplateBank::bundled_user()),
        Arc::new(lm),
        Arc::new(lab.corpus.gazetteer()),
    );
    let act = inform(&[(Slot::Food, "thai")]);
    let text = nlg.realize(&act, &[], &mut seeded(0)).unwrap();
    assert!(text.contains("thai"), "{text}");
    assert_eq!(nlg.realize(&UserAct::bare(UserActKind::Goodbye), &[], &mut seeded(0)).unwrap(), "good bye .");
}

#[test]
fn lexicalize_inverts_delexicalize_on_the_database() {
    let lab = common::lab();
    let gaz = lab.corpus.gazetteer();
    for r in lab.corpus.db.all() {
        for text in [
            format!("{} is a {} restaurant in the {} .", r.name, r.food, r.area),
            format!("the phone is {} and the postcode is {} .", r.phone, r.postcode),
            format!("it is at {} , {} .", r.address, r.pricerange),
        ] {
            let delex = gaz.delexicalize_text(&text).join(" ");
            assert!(delex.contains('<'), "{delex}");
            assert_eq!(lexicalize(&delex, &SlotMap::new(), Some(r)).unwrap(), text);
        }
    }
}

#[test]
fn retrieval_uses_more_words_than_templates() {
    let lab = common::lab();
    let (template, template_len) = vocab_of(SimKind::AgenT);
    let (retrieval, retrieval_len) = vocab_of(SimKind::AgenR);
    assert!(retrieval > template, "{retrieval} vs {template}");
    assert!(retrieval_len > template_len);
    assert!(lab.resources.lm.signatures() > 0);
}

fn vocab_of(kind: SimKind) -> (usize, f64) {
    let lab = common::lab();
    let mut sim = lab.simulator(kind);
    let dialogs = usersim::eval::simulate_corpus(sim.as_mut(), &lab.core, lab.goals(), 100, 2).unwrap();
    usersim::eval::vocab_and_len(&dialogs)
}
