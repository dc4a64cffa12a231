//! On-disk layout:
//!
//! ```text
//! <dir>/sessions/<yyyy-mm-dd>.jsonl   closed sessions, appended in closing order
//! <dir>/surveys/<session id>.json     one survey per file
//! <dir>/index.json                    session id -> day file and summary
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::survey::{SessionSummary, SurveyResult};
use super::Session;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    /// Name of the day file holding the transcript, without extension.
    pub day: String,
    #[serde(flatten)]
    pub summary: SessionSummary,
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    index: BTreeMap<String, IndexEntry>,
}

impl Store {
    /// Opens `dir`, creating it if needed, and reads back the index.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir.join("sessions"))?;
        fs::create_dir_all(dir.join("surveys"))?;
        let path = dir.join("index.json");
        let index = if path.exists() {
            serde_json::from_str(&fs::read_to_string(&path)?)?
        } else {
            BTreeMap::new()
        };
        Ok(Store {
            dir: dir.to_path_buf(),
            index,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn index(&self) -> &BTreeMap<String, IndexEntry> {
        &self.index
    }

    /// Appends a closed session to its day file.
    pub fn record_session(&mut self, session: &Session) -> Result<()> {
        let closed = session
            .closed
            .ok_or_else(|| Error::SessionOpen(session.id.clone()))?;
        let day = closed.format("%Y-%m-%d").to_string();
        let mut line = serde_json::to_string(session)?;
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.day_path(&day))?;
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        self.index.insert(
            session.id.clone(),
            IndexEntry {
                day,
                summary: session.summary(),
            },
        );
        self.write_index()
    }

    pub fn record_survey(&mut self, id: &str, survey: SurveyResult) -> Result<()> {
        let entry = self
            .index
            .get_mut(id)
            .ok_or_else(|| Error::SessionNotFound(id.to_string()))?;
        if entry.summary.survey.is_some() {
            return Err(Error::DuplicateSurvey(id.to_string()));
        }
        let path = self.dir.join("surveys").join(format!("{id}.json"));
        write_atomic(&path, serde_json::to_string_pretty(&survey)?.as_bytes())?;
        entry.summary.survey = Some(survey);
        self.write_index()
    }

    /// Every session closed on `day`, in closing order.
    pub fn read_day(&self, day: &str) -> Result<Vec<Session>> {
        let file = BufReader::new(File::open(self.day_path(day))?);
        let mut out = Vec::new();
        for line in file.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line)?);
            }
        }
        Ok(out)
    }

    /// A closed session as stored, with its survey if one was given.
    pub fn load(&self, id: &str) -> Result<Session> {
        let entry = self.index.get(id).ok_or_else(|| Error::SessionNotFound(id.to_string()))?;
        let mut session = self
            .read_day(&entry.day)?
            .into_iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::SessionNotFound(id.to_string()))?;
        session.survey = entry.summary.survey;
        Ok(session)
    }

    fn day_path(&self, day: &str) -> PathBuf {
        self.dir.join("sessions").join(format!("{day}.jsonl"))
    }

    fn write_index(&self) -> Result<()> {
        write_atomic(&self.dir.join("index.json"), serde_json::to_string_pretty(&self.index)?.as_bytes())
    }
}

/// Writes to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
