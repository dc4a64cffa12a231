//! Trains one system per simulator and evaluates every system against every simulator.

use std::collections::BTreeMap;

use usersim::eval::CrossConfig;
use usersim::lab::Lab;
use usersim::rl::TrainConfig;
use usersim::simulator::SimKind;

fn main() -> usersim::Result<()> {
    let lab = Lab::synthetic()?;
    let config = TrainConfig {
        episodes: 4000,
        ..Default::default()
    };
    let mut agents = BTreeMap::new();
    for kind in SimKind::ALL {
        let out = lab.train(kind, &config)?;
        println!("sys-{kind}: final success {:.3}", out.final_success());
        agents.insert(kind, out.agent);
    }
    let cross = CrossConfig {
        episodes: 100,
        ..Default::default()
    };
    let matrix = lab.cross(&agents, &cross)?;
    matrix.write_csv(std::io::stdout())?;
    let dominant: Vec<&str> = matrix.diagonal_dominant().into_iter().map(|k| k.as_str()).collect();
    println!("diagonal dominant: {}", dominant.join(" "));
    if let Some((sys, avg)) = matrix.best_system() {
        println!("best average: sys-{sys} {avg:.3}");
    }
    Ok(())
}
