//! One dialog from each of the six user simulators against the rule system.

use usersim::dialog_system::RulePolicy;
use usersim::domain::Speaker;
use usersim::lab::Lab;
use usersim::rl::{run_episode, EpisodeConfig};
use usersim::simulator::SimKind;
use usersim::seeded;

fn main() -> usersim::Result<()> {
    let lab = Lab::synthetic()?;
    let goal = &lab.goals()[7];
    println!("goal: {}\n", goal.instructions());
    let config = EpisodeConfig { close_on_success: true };
    for kind in SimKind::ALL {
        let mut sim = lab.simulator(kind);
        let ep = run_episode(sim.as_mut(), &lab.core, &RulePolicy, goal, &mut seeded(1), &config);
        println!("[{kind}] {:?}", ep.dialog.outcome);
        for t in &ep.dialog.turns {
            let who = if t.speaker == Speaker::User { "user" } else { "sys " };
            println!("  {who}: {}", t.utterance);
        }
        println!();
    }
    Ok(())
}
