//! Builds the synthetic corpus, annotates its user turns and prints the goal balance.

use usersim::corpus::{synth::SynthConfig, Corpus};

fn main() -> usersim::Result<()> {
    let corpus = Corpus::synthetic(&SynthConfig::default())?;
    let report = &corpus.report;
    println!("{} restaurant dialogs, rule match rate {:.3}", corpus.dialogs.len(), report.match_rate);
    for (act, n) in &report.per_act {
        println!("  {act:<24} {n}");
    }

    let annotator = corpus.annotator();
    for text in [
        "i want a cheap restaurant in the north",
        "can i get the address and phone number ?",
        "book a table for 5 people at 12:15 on monday",
        "is there anything else ?",
    ] {
        let a = annotator.annotate(text);
        println!("{text:<48} -> {} {:?}", a.act.kind, a.act.slots());
    }

    let goals = &corpus.goals;
    println!(
        "{} goals; reservation share {:.3} before balancing, {:.3} after",
        goals.len(),
        goals.pre_balance.make_reservation,
        goals.post_balance.make_reservation
    );
    println!("example goal: {}", goals.goals[0].instructions());
    Ok(())
}
