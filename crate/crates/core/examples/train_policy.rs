//! Trains a system against one simulator and prints its learning curve.
//!
//! cargo run --release --example train_policy -- sl-t 6000

use usersim::lab::Lab;
use usersim::rl::TrainConfig;
use usersim::simulator::SimKind;

fn main() -> usersim::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: SimKind = args.next().as_deref().unwrap_or("agen-t").parse()?;
    let episodes = args.next().and_then(|s| s.parse().ok()).unwrap_or(5000);

    let lab = Lab::synthetic()?;
    let config = TrainConfig {
        episodes,
        ..Default::default()
    };
    let out = lab.train(kind, &config)?;
    println!("episode  success");
    for c in &out.curve {
        let bar = "#".repeat((c.success * 40.0).round() as usize);
        println!("{:>7}  {:.3} {bar}", c.episode, c.success);
    }
    match out.checkpoints_to(0.9) {
        Some(n) => println!("reached 0.9 at checkpoint {n}"),
        None => println!("did not reach 0.9"),
    }
    Ok(())
}
