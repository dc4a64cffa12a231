//! Perplexity, vocabulary, utterance length and the AnythingElse share for every simulator.

use usersim::domain::UserActKind;
use usersim::eval::MetricsConfig;
use usersim::lab::Lab;
use usersim::simulator::SimKind;

fn main() -> usersim::Result<()> {
    let lab = Lab::synthetic()?;
    let file = lab.metrics(&SimKind::ALL, &MetricsConfig::default())?;
    println!("{:<7} {:>7} {:>6} {:>5} {:>8} {:>14}", "sim", "ppl", "vocab", "len", "success", "anything_else");
    for r in &file.reports {
        println!(
            "{:<7} {:>7.2} {:>6} {:>5.2} {:>8.3} {:>14.4}",
            r.simulator, r.ppl, r.vocab, r.avg_utt_len, r.success, r.act_hist[&UserActKind::AnythingElse]
        );
    }
    Ok(())
}
