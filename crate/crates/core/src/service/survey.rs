use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::Outcome;
use crate::error::{Error, Result};

/// Whether the person felt their task was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub enum Solved {
    Yes,
    Partially,
    No,
}

impl Solved {
    pub fn score(self) -> f64 {
        match self {
            Solved::Yes => 1.0,
            Solved::Partially => 0.5,
            Solved::No => 0.0,
        }
    }
}

impl TryFrom<f64> for Solved {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Solved::Yes)
        } else if v == 0.5 {
            Ok(Solved::Partially)
        } else if v == 0.0 {
            Ok(Solved::No)
        } else {
            Err(Error::InvalidSurvey(format!("solved must be 1, 0.5 or 0, got {v}")))
        }
    }
}

impl From<Solved> for f64 {
    fn from(s: Solved) -> f64 {
        s.score()
    }
}

/// The form as posted, before validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyForm {
    pub solved: f64,
    pub satisfaction: i64,
    pub efficiency: i64,
    pub naturalness: i64,
    pub rule_likeness: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SurveyForm", into = "SurveyForm")]
pub struct SurveyResult {
    pub solved: Solved,
    pub satisfaction: u8,
    pub efficiency: u8,
    pub naturalness: u8,
    pub rule_likeness: u8,
}

impl TryFrom<SurveyForm> for SurveyResult {
    type Error = Error;

    fn try_from(f: SurveyForm) -> Result<Self> {
        let likert = |name: &str, v: i64| -> Result<u8> {
            if (1..=5).contains(&v) {
                Ok(v as u8)
            } else {
                Err(Error::InvalidSurvey(format!("{name} must be between 1 and 5, got {v}")))
            }
        };
        Ok(SurveyResult {
            solved: Solved::try_from(f.solved)?,
            satisfaction: likert("satisfaction", f.satisfaction)?,
            efficiency: likert("efficiency", f.efficiency)?,
            naturalness: likert("naturalness", f.naturalness)?,
            rule_likeness: likert("rule_likeness", f.rule_likeness)?,
        })
    }
}

impl From<SurveyResult> for SurveyForm {
    fn from(s: SurveyResult) -> Self {
        SurveyForm {
            solved: s.solved.score(),
            satisfaction: s.satisfaction.into(),
            efficiency: s.efficiency.into(),
            naturalness: s.naturalness.into(),
            rule_likeness: s.rule_likeness.into(),
        }
    }
}

/// A mean with the half-width of its normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` with fewer than two observations.
    pub ci95: Option<f64>,
}

impl Estimate {
    /// Uses the sample standard deviation.
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let ci95 = (xs.len() > 1).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            1.96 * var.sqrt() / n.sqrt()
        });
        Some(Estimate { mean, ci95 })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemReport {
    pub sessions: usize,
    pub abandoned: usize,
    /// Goal completion over finished, non-abandoned sessions.
    pub auto_success: Option<f64>,
    pub surveys: usize,
    pub solved: Option<Estimate>,
    pub satisfaction: Option<Estimate>,
    pub efficiency: Option<Estimate>,
    pub naturalness: Option<Estimate>,
    pub rule_likeness: Option<Estimate>,
}

/// What the report needs to know about one closed session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub system_id: String,
    pub abandoned: bool,
    pub outcome: Outcome,
    pub survey: Option<SurveyResult>,
}

/// Per-system aggregates. Abandoned sessions count towards `abandoned` only.
pub fn aggregate<'a, I>(systems: &[String], sessions: I) -> BTreeMap<String, SystemReport>
where
    I: IntoIterator<Item = &'a SessionSummary>,
{
    let mut grouped: BTreeMap<&str, Vec<&SessionSummary>> = systems.iter().map(|s| (s.as_str(), Vec::new())).collect();
    for s in sessions {
        grouped.entry(&s.system_id).or_default().push(s);
    }
    grouped
        .into_iter()
        .map(|(id, all)| {
            let done: Vec<&SessionSummary> = all.iter().copied().filter(|s| !s.abandoned).collect();
            let surveys: Vec<SurveyResult> = done.iter().filter_map(|s| s.survey).collect();
            let column = |f: fn(&SurveyResult) -> f64| Estimate::of(&surveys.iter().map(f).collect::<Vec<_>>());
            let wins = done.iter().filter(|s| s.outcome == Outcome::Success).count();
            let report = SystemReport {
                sessions: all.len(),
                abandoned: all.len() - done.len(),
                auto_success: (!done.is_empty()).then(|| wins as f64 / done.len() as f64),
                surveys: surveys.len(),
                solved: column(|s| s.solved.score()),
                satisfaction: column(|s| s.satisfaction.into()),
                efficiency: column(|s| s.efficiency.into()),
                naturalness: column(|s| s.naturalness.into()),
                rule_likeness: column(|s| s.rule_likeness.into()),
            };
            (id.to_string(), report)
        })
        .collect()
}
