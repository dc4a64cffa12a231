mod common;

use std::collections::BTreeMap;

use usersim::domain::*;
use usersim::error::Error;
use usersim::eval::*;
use usersim::rl::{train, RlAgent, TrainConfig};
use usersim::simulator::SimKind;
use usersim::seeded;

fn sentences(lines: &[&str]) -> Vec<Vec<String>> {
    lines.iter().map(|l| l.split_whitespace().map(String::from).collect()).collect()
}

#[test]
fn uniform_model_perplexity_is_the_vocabulary_size() {
    let lm = TrigramLm::with_vocab(["i", "want", "thai", "food", "."], ADD_K);
    let v = lm.vocab_size() as f64;
    assert_eq!(v, 7.0);
    let test = sentences(&["i want thai food .", "cheap please", "food food food"]);
    assert!((lm.perplexity(&test).unwrap() - v).abs() < 1e-6);
}

#[test]
fn two_sentence_corpus_by_hand() {
    let lm = TrigramLm::train(&sentences(&["a b", "a c"]), 0.1, 1).unwrap();
    // vocabulary a, b, c, </s>, <unk>
    assert_eq!(lm.vocab_size(), 5);
    assert!((lm.prob(BOS, BOS, "a") - 2.1 / 2.5).abs() < 1e-12);
    assert!((lm.prob(BOS, "a", "b") - 1.1 / 2.5).abs() < 1e-12);
    assert!((lm.prob("a", "b", EOS) - 1.1 / 1.5).abs() < 1e-12);

    let ln_ab = (2.1f64 / 2.5).ln() + (1.1f64 / 2.5).ln() + (1.1f64 / 1.5).ln();
    let expected = (-ln_ab / 3.0).exp();
    let ppl = lm.perplexity(&sentences(&["a b"])).unwrap();
    assert!((ppl - expected).abs() < 1e-12, "{ppl} vs {expected}");

    // "z" is unknown; its trigram context has never been seen.
    let ln_z = (0.1f64 / 2.5).ln() + (0.1f64 / 0.5).ln();
    let expected = (-(ln_ab + ln_z) / 5.0).exp();
    let ppl = lm.perplexity(&sentences(&["a b", "z"])).unwrap();
    assert!((ppl - expected).abs() < 1e-12, "{ppl} vs {expected}");
}

#[test]
fn language_model_rejects_empty_input() {
    let empty: Vec<Vec<String>> = vec![vec![]];
    assert!(matches!(TrigramLm::train(&empty, ADD_K, 1), Err(Error::EmptyInput(_))));
    let lm = TrigramLm::train(&sentences(&["a"]), ADD_K, 1).unwrap();
    let none: Vec<Vec<String>> = Vec::new();
    assert!(matches!(lm.perplexity(&none), Err(Error::EmptyInput(_))));
    // an empty sentence still predicts its end marker
    assert!((lm.perplexity(&empty).unwrap() - 1.0 / lm.prob(BOS, BOS, EOS)).abs() < 1e-12);
}

#[test]
fn perplexity_falls_as_the_training_corpus_grows() {
    let lab = common::lab();
    let mut sim = lab.simulator(SimKind::AgenT);
    let dialogs = simulate_corpus(sim.as_mut(), &lab.core, lab.goals(), 500, 11).unwrap();
    let (train_pool, held_out) = dialogs.split_at(400);
    let test: Vec<String> = held_out.iter().flat_map(|d| d.user_turns()).map(|t| t.utterance.clone()).collect();
    let mut last = f64::INFINITY;
    for size in [25, 50, 100, 200, 400] {
        let ppl = trigram_ppl(&train_pool[..size], &test, ADD_K, 1).unwrap();
        assert!(ppl <= last + 1e-9, "{size} dialogs: {ppl} after {last}");
        last = ppl;
    }
}

fn fixture_dialog(user: &[(&str, Option<UserActKind>)]) -> Dialog {
    let goal = common::lab().goals()[0].clone();
    let mut turns = Vec::new();
    for (utterance, kind) in user {
        turns.push(Turn::user(*utterance, kind.map(UserAct::bare)));
        turns.push(Turn::system("ok .", SystemAct::bare(SystemActKind::AskType)));
    }
    Dialog {
        id: "fixture".into(),
        goal,
        turns,
        outcome: Outcome::Ongoing,
    }
}

#[test]
fn vocabulary_and_length_by_hand() {
    let one = fixture_dialog(&[("hello .", None)]);
    assert_eq!(vocab_and_len(&[one]), (2, 2.0));
    let three = fixture_dialog(&[
        ("i want thai food .", None),
        ("what is the phone ?", None),
        ("thai food please", None),
    ]);
    // i want thai food . what is the phone ? please
    let (vocab, len) = vocab_and_len(&[three]);
    assert_eq!(vocab, 11);
    assert!((len - 13.0 / 3.0).abs() < 1e-12);
}

#[test]
fn act_histogram_by_hand() {
    use UserActKind::*;
    let d = fixture_dialog(&[
        ("x", Some(InformType)),
        ("x", Some(InformType)),
        ("x", Some(InformType)),
        ("x", Some(InformType)),
        ("x", Some(RequestInfo)),
        ("x", Some(RequestInfo)),
        ("x", Some(MakeReservation)),
        ("x", Some(AnythingElse)),
        ("x", Some(Goodbye)),
        ("thank you , goodbye .", None),
    ]);
    let hist = act_histogram(&[d], &common::lab().resources.annotator);
    let expected: BTreeMap<UserActKind, f64> = [
        (InformType, 0.4),
        (InformTypeChange, 0.0),
        (AnythingElse, 0.1),
        (RequestInfo, 0.2),
        (MakeReservation, 0.1),
        (ReservationChangeTime, 0.0),
        (Goodbye, 0.2),
    ]
    .into();
    for (k, v) in &expected {
        assert!((hist[k] - v).abs() < 1e-12, "{k}: {} vs {v}", hist[k]);
    }
    assert!((hist.values().sum::<f64>() - 1.0).abs() < 1e-9);

    let byes = fixture_dialog(&[("x", Some(Goodbye)), ("x", Some(Goodbye))]);
    let hist = act_histogram(&[byes], &common::lab().resources.annotator);
    assert_eq!(hist[&Goodbye], 1.0);
}

fn brute_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Two-sided tail of a Student t with 4 degrees of freedom, by Simpson's rule
/// on the density 0.375 (1 + t^2 / 4)^(-5/2).
fn t4_two_sided(t: f64) -> f64 {
    let f = |x: f64| 0.375 * (1.0 + x * x / 4.0).powf(-2.5);
    let (a, steps) = (t.abs(), 200_000);
    let b = a + 4000.0;
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * s * h / 3.0
}

#[test]
fn pearson_matches_direct_formulas() {
    let xs = [3.1, 4.2, 2.0, 4.8, 3.6, 2.9];
    let ys = [0.61, 0.74, 0.41, 0.90, 0.55, 0.62];
    let (r, p) = pearson(&xs, &ys).unwrap();
    assert!((r - brute_pearson(&xs, &ys)).abs() < 1e-12);
    let t = r * (4.0 / (1.0 - r * r)).sqrt();
    assert!((p - t4_two_sided(t)).abs() < 1e-6, "p {p} vs {}", t4_two_sided(t));

    let weak = [0.4, 0.1, 0.3, 0.5, 0.2, 0.6];
    let (r, p) = pearson(&xs, &weak).unwrap();
    assert!((r - brute_pearson(&xs, &weak)).abs() < 1e-12);
    assert!(p > 0.05);
}

#[test]
fn pearson_extremes_and_errors() {
    assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), (1.0, 0.0));
    assert_eq!(pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap(), (-1.0, 0.0));
    for (xs, ys) in [
        (vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]),
        (vec![1.0, 2.0], vec![1.0, 2.0]),
        (vec![1.0, 2.0, 3.0], vec![1.0, 2.0]),
    ] {
        assert!(matches!(pearson(&xs, &ys), Err(Error::UndefinedCorrelation(_))));
    }
}

#[test]
fn simulated_corpora_are_seeded_and_capped() {
    let lab = common::lab();
    let mut sim = lab.simulator(SimKind::AgenT);
    assert!(simulate_corpus(sim.as_mut(), &lab.core, lab.goals(), 0, 1).unwrap().is_empty());
    assert!(matches!(simulate_corpus(sim.as_mut(), &lab.core, &[], 3, 1), Err(Error::EmptyGoalDb)));
    let a = simulate_corpus(sim.as_mut(), &lab.core, lab.goals(), 200, 3).unwrap();
    let b = simulate_corpus(sim.as_mut(), &lab.core, lab.goals(), 200, 3).unwrap();
    assert_eq!(a.len(), 200);
    assert_eq!(a, b);
    for d in &a {
        assert!(d.is_well_formed());
        assert!(d.user_turns().count() <= MAX_TURNS as usize);
    }
}

#[test]
fn metrics_are_deterministic_and_embed_their_config() {
    let lab = common::lab();
    let config = MetricsConfig {
        dialogs: 20,
        test_utterances: 300,
        seed: 9,
        ..Default::default()
    };
    let a = lab.metrics(&[SimKind::AgenT, SimKind::SlE], &config).unwrap();
    let b = lab.metrics(&[SimKind::AgenT, SimKind::SlE], &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, 9);
    assert_eq!(a.config_hash, config_hash(&config));

    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    a.write(d1.path()).unwrap();
    b.write(d2.path()).unwrap();
    for f in ["metrics.json", "act_hist.csv"] {
        assert_eq!(
            std::fs::read(d1.path().join(f)).unwrap(),
            std::fs::read(d2.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let back: MetricsFile = serde_json::from_slice(&std::fs::read(d1.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(back, a);
    let csv = std::fs::read_to_string(d1.path().join("act_hist.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 7);
}

fn quick_agent(kind: SimKind, seed: u64) -> RlAgent {
    let lab = common::lab();
    let config = TrainConfig {
        episodes: 1000,
        eval_every: 500,
        eval_dialogs: 20,
        seed,
        ..Default::default()
    };
    lab.train(kind, &config).unwrap().agent
}

#[test]
fn identical_rows_agree_within_sampling_noise() {
    let lab = common::lab();
    let policies: BTreeMap<SimKind, RlAgent> = [
        (SimKind::AgenT, quick_agent(SimKind::AgenT, 1)),
        (SimKind::SlT, RlAgent::new(lab.featurizer(), None, &mut seeded(2))),
    ]
    .into();
    let config = CrossConfig {
        simulators: vec![SimKind::AgenT; 4],
        systems: vec![SimKind::AgenT, SimKind::SlT],
        episodes: 200,
        seed: 5,
    };
    let m = lab.cross(&policies, &config).unwrap();
    for j in 0..2 {
        let col: Vec<f64> = m.cells.iter().map(|r| r[j]).collect();
        let (lo, hi) = col.iter().fold((1.0f64, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(hi - lo <= 0.14, "column {j}: {col:?}");
        for v in &col {
            assert!((0.0..=1.0).contains(v));
        }
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        assert!((m.averages[j] - mean).abs() < 1e-12);
    }
}

#[test]
fn parallel_cells_equal_a_serial_run() {
    let lab = common::lab();
    let agent = quick_agent(SimKind::AgenT, 3);
    let policies: BTreeMap<SimKind, RlAgent> = [(SimKind::AgenT, agent.clone()), (SimKind::SlT, agent)].into();
    let config = CrossConfig {
        simulators: vec![SimKind::AgenT, SimKind::SlT, SimKind::AgenR],
        systems: vec![SimKind::AgenT, SimKind::SlT],
        episodes: 40,
        seed: 8,
    };
    let m = lab.cross(&policies, &config).unwrap();
    for (i, sim_kind) in config.simulators.iter().enumerate() {
        for (j, sys) in config.systems.iter().enumerate() {
            let mut sim = lab.simulator(*sim_kind);
            let frozen = policies[sys].frozen();
            let v = success_rate(sim.as_mut(), &lab.core, &frozen, lab.goals(), 40, config.cell_seed(i, j));
            assert_eq!(m.cells[i][j], v, "cell {i},{j}");
        }
    }
    assert_eq!(lab.cross(&policies, &config).unwrap(), m);

    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    CrossFile::new(m.clone()).write(d1.path()).unwrap();
    CrossFile::new(m).write(d2.path()).unwrap();
    for f in ["cross_matrix.csv", "cross_matrix.json"] {
        assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap());
    }
}

#[test]
fn missing_policies_are_named() {
    let lab = common::lab();
    let policies: BTreeMap<SimKind, RlAgent> =
        [(SimKind::AgenT, RlAgent::new(lab.featurizer(), None, &mut seeded(0)))].into();
    match lab.cross(&policies, &CrossConfig::default()) {
        Err(Error::MissingPolicies(missing)) => {
            assert_eq!(missing, vec!["agen-r", "agen-g", "sl-t", "sl-r", "sl-e"]);
        }
        other => panic!("expected missing policies, got {other:?}"),
    }
}

#[test]
fn training_directly_matches_the_lab() {
    let lab = common::lab();
    let config = TrainConfig {
        episodes: 200,
        eval_every: 100,
        eval_dialogs: 10,
        seed: 4,
        ..Default::default()
    };
    let mut sim = lab.simulator(SimKind::SlT);
    let direct = train(sim.as_mut(), &lab.core, lab.goals(), lab.featurizer(), &config).unwrap();
    let via_lab = lab.train(SimKind::SlT, &config).unwrap();
    assert_eq!(direct.curve, via_lab.curve);
}
