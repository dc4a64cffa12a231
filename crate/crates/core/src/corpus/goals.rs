//! The goal database: goals extracted from corpus dialogs, normalized against
//! the restaurant database and balanced between the two sub-tasks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::db::{booking_available, RestaurantDb};
use crate::domain::{Booking, ClockTime, Dialog, Goal, Slot, Subtask, Weekday};
use crate::error::{Error, Result};

/// Share of each sub-task among all sub-task occurrences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SubtaskShares {
    pub ask_info: f64,
    pub make_reservation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalDb {
    pub goals: Vec<Goal>,
    pub subtask_counts: BTreeMap<Subtask, usize>,
    pub pre_balance: SubtaskShares,
    pub post_balance: SubtaskShares,
}

impl GoalDb {
    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    /// Wraps goals without balancing them.
    pub fn from_goals(goals: Vec<Goal>) -> Self {
        let shares = shares(&goals);
        GoalDb {
            subtask_counts: subtask_counts(&goals),
            goals,
            pre_balance: shares,
            post_balance: shares,
        }
    }
}

pub fn subtask_counts(goals: &[Goal]) -> BTreeMap<Subtask, usize> {
    let mut counts = BTreeMap::from([(Subtask::AskInfo, 0), (Subtask::MakeReservation, 0)]);
    for g in goals {
        for t in &g.subtasks {
            *counts.entry(*t).or_default() += 1;
        }
    }
    counts
}

pub fn shares(goals: &[Goal]) -> SubtaskShares {
    let counts = subtask_counts(goals);
    let total: usize = counts.values().sum();
    if total == 0 {
        return SubtaskShares::default();
    }
    SubtaskShares {
        ask_info: counts[&Subtask::AskInfo] as f64 / total as f64,
        make_reservation: counts[&Subtask::MakeReservation] as f64 / total as f64,
    }
}

/// Extracts, normalizes and balances the goals of `dialogs`.
pub fn build_goal_db<R: Rng>(dialogs: &[Dialog], db: &RestaurantDb, rng: &mut R) -> Result<GoalDb> {
    let goals: Vec<Goal> = dialogs
        .iter()
        .filter_map(|d| normalize_goal(&d.goal, db))
        .collect();
    let mut distinct: Vec<_> = goals
        .iter()
        .map(|g| serde_json::to_string(&(&g.constraints, &g.requestables, &g.booking)).unwrap_or_default())
        .collect();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} distinct goals, at least 10 needed",
            distinct.len()
        )));
    }
    let pre_balance = shares(&goals);
    let goals = balance(goals, rng);
    Ok(GoalDb {
        subtask_counts: subtask_counts(&goals),
        post_balance: shares(&goals),
        pre_balance,
        goals,
    })
}

/// Pins a goal to values the database can satisfy; `None` when it cannot be.
///
/// Search slots the goal leaves open are filled from a restaurant that fits the
/// rest, so a user can always answer when asked about them.
pub fn normalize_goal(goal: &Goal, db: &RestaurantDb) -> Option<Goal> {
    let mut g = goal.clone();
    if let Some(b) = &g.booking {
        if !booking_available(b.day, b.time) {
            return None;
        }
        if g.failed_time.is_some_and(|t| booking_available(b.day, t)) {
            g.failed_time = None;
        }
    }
    if let Some(name) = g.constraints.get(&Slot::Name).cloned() {
        let r = db.get(&name)?;
        g.constraints = [(Slot::Name, r.name.clone())].into();
        g.relaxations.clear();
        return Some(g);
    }
    g.relaxations.remove(&Slot::Name);
    let target = g.relaxed_constraints();
    let candidates = db.query(&target);
    if candidates.is_empty() {
        return None;
    }
    let pick = candidates[stable_hash(&g.id) as usize % candidates.len()];
    for slot in Slot::SEARCH {
        g.constraints
            .entry(slot)
            .or_insert_with(|| pick.value(slot).unwrap_or_default().to_string());
    }
    if !g.relaxations.is_empty() && !db.query(&g.constraints).is_empty() {
        g.relaxations.clear();
    }
    if db.query(&g.relaxed_constraints()).is_empty() {
        return None;
    }
    g.validate().ok()?;
    Some(g)
}

fn stable_hash(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// Duplicates reservation goals with fresh booking details until the
/// reservation sub-task is at least as common as the ask-info one.
pub fn balance<R: Rng>(mut goals: Vec<Goal>, rng: &mut R) -> Vec<Goal> {
    let counts = subtask_counts(&goals);
    let (mut ask, mut book) = (counts[&Subtask::AskInfo], counts[&Subtask::MakeReservation]);
    let pure: Vec<usize> = (0..goals.len())
        .filter(|&i| goals[i].subtasks == [Subtask::MakeReservation])
        .collect();
    let any: Vec<usize> = (0..goals.len())
        .filter(|&i| goals[i].has_subtask(Subtask::MakeReservation))
        .collect();
    let pool = if pure.is_empty() { any } else { pure };
    if pool.is_empty() {
        return goals;
    }
    let mut k = 0;
    while book < ask {
        let source = &goals[*pool.choose(rng).expect("non-empty pool")];
        let mut g = source.clone();
        g.id = format!("{}#aug{k}", source.id);
        resample_booking(&mut g, rng);
        if g.has_subtask(Subtask::AskInfo) {
            ask += 1;
        }
        book += 1;
        k += 1;
        goals.push(g);
    }
    goals
}

pub fn random_time<R: Rng>(rng: &mut R, from_hour: u8, to_hour: u8) -> ClockTime {
    let slots = (to_hour - from_hour) as u32 * 4;
    let i = rng.gen_range(0..slots);
    ClockTime::new(from_hour + (i / 4) as u8, (i % 4) as u8 * 15).expect("valid clock time")
}

/// New booking details; a goal that had a turned-down time gets a new one.
pub fn resample_booking<R: Rng>(goal: &mut Goal, rng: &mut R) {
    let people = rng.gen_range(1..=8);
    if goal.failed_time.is_some() {
        let day = *[Weekday::Friday, Weekday::Saturday].choose(rng).unwrap();
        goal.failed_time = Some(random_time(rng, 18, 20));
        let time = loop {
            let t = random_time(rng, 11, 22);
            if booking_available(day, t) {
                break t;
            }
        };
        goal.booking = Some(Booking { people, day, time });
    } else {
        let (day, time) = loop {
            let day = *Weekday::ALL.choose(rng).unwrap();
            let t = random_time(rng, 11, 22);
            if booking_available(day, t) {
                break (day, t);
            }
        };
        goal.booking = Some(Booking { people, day, time });
    }
}

/// Uniform draw from the database.
pub fn sample_goal<'a, R: Rng>(db: &'a GoalDb, rng: &mut R) -> Result<&'a Goal> {
    if db.goals.is_empty() {
        return Err(Error::EmptyGoalDb);
    }
    Ok(&db.goals[rng.gen_range(0..db.goals.len())])
}
