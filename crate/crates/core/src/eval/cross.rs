//! Every trained system against every simulator.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dialog_system::SystemCore;
use crate::domain::Goal;
use crate::error::{Error, Result};
use crate::rl::{success_rate, RlAgent};
use crate::simulator::{SimKind, SimResources};
use crate::derive_seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossConfig {
    /// Row simulators; repeats are allowed.
    pub simulators: Vec<SimKind>,
    /// Column systems, named by the simulator each was trained against.
    pub systems: Vec<SimKind>,
    pub episodes: usize,
    pub seed: u64,
}

impl Default for CrossConfig {
    fn default() -> Self {
        CrossConfig {
            simulators: SimKind::ALL.to_vec(),
            systems: SimKind::ALL.to_vec(),
            episodes: 200,
            seed: 0,
        }
    }
}

impl CrossConfig {
    /// Seed of the cell at `row`, `col`; independent of evaluation order.
    pub fn cell_seed(&self, row: usize, col: usize) -> u64 {
        derive_seed(
            self.seed,
            &format!("cross/{row}/{}/{}", self.simulators[row], self.systems[col]),
        )
    }
}

/// Success rates with one row per simulator and one column per system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub config: CrossConfig,
    pub cells: Vec<Vec<f64>>,
    pub averages: Vec<f64>,
}

impl CrossMatrix {
    pub fn from_cells(config: CrossConfig, cells: Vec<Vec<f64>>) -> Self {
        let rows = cells.len().max(1) as f64;
        let averages = (0..config.systems.len())
            .map(|j| cells.iter().map(|r| r[j]).sum::<f64>() / rows)
            .collect();
        CrossMatrix {
            config,
            cells,
            averages,
        }
    }

    pub fn cell(&self, sim: SimKind, system: SimKind) -> Option<f64> {
        let i = self.config.simulators.iter().position(|s| *s == sim)?;
        let j = self.config.systems.iter().position(|s| *s == system)?;
        Some(self.cells[i][j])
    }

    /// Systems whose own-simulator cell is at least the mean of their other cells.
    pub fn diagonal_dominant(&self) -> Vec<SimKind> {
        let sims = &self.config.simulators;
        self.config
            .systems
            .iter()
            .enumerate()
            .filter(|(j, sys)| {
                let Some(i) = sims.iter().position(|s| s == *sys) else {
                    return false;
                };
                let others: Vec<f64> = (0..sims.len()).filter(|r| *r != i).map(|r| self.cells[r][*j]).collect();
                others.is_empty() || self.cells[i][*j] >= others.iter().sum::<f64>() / others.len() as f64
            })
            .map(|(_, s)| *s)
            .collect()
    }

    /// The column with the highest average; the first one on ties.
    pub fn best_system(&self) -> Option<(SimKind, f64)> {
        self.config
            .systems
            .iter()
            .zip(&self.averages)
            .fold(None, |best: Option<(SimKind, f64)>, (s, a)| match best {
                Some((_, b)) if b >= *a => best,
                _ => Some((*s, *a)),
            })
    }

    /// Header `simulator,<systems>`, one row per simulator and a final `average` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["simulator".to_string()];
        header.extend(self.config.systems.iter().map(|s| format!("sys-{s}")));
        w.write_record(&header)?;
        for (sim, row) in self.config.simulators.iter().zip(&self.cells) {
            let mut rec = vec![sim.to_string()];
            rec.extend(row.iter().map(|v| format!("{v:.4}")));
            w.write_record(&rec)?;
        }
        let mut rec = vec!["average".to_string()];
        rec.extend(self.averages.iter().map(|v| format!("{v:.4}")));
        w.write_record(&rec)?;
        w.flush()?;
        Ok(())
    }
}

/// Runs `config.episodes` frozen-policy dialogs per cell. Cells run in
/// parallel, each on its own simulator and derived seed.
pub fn cross_study(
    resources: &SimResources,
    core: &SystemCore,
    goals: &[Goal],
    policies: &BTreeMap<SimKind, RlAgent>,
    config: &CrossConfig,
) -> Result<CrossMatrix> {
    let missing: Vec<String> = config
        .systems
        .iter()
        .filter(|s| !policies.contains_key(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPolicies(missing));
    }
    if goals.is_empty() {
        return Err(Error::EmptyGoalDb);
    }
    let frozen: Vec<RlAgent> = config.systems.iter().map(|s| policies[s].frozen()).collect();
    let cols = config.systems.len();
    let flat: Vec<f64> = (0..config.simulators.len() * cols)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / cols, cell % cols);
            let mut sim = resources.build(config.simulators[i]);
            success_rate(sim.as_mut(), core, &frozen[j], goals, config.episodes, config.cell_seed(i, j))
        })
        .collect();
    let cells = flat.chunks(cols.max(1)).map(<[f64]>::to_vec).collect();
    Ok(CrossMatrix::from_cells(config.clone(), cells))
}
