//! Line-delimited JSON trial log.
//!
//! A finished trial is written as one or more `ticks` lines (at most
//! [`TICK_BATCH`] samples each) followed by one `summary` line. A trial
//! without its summary line is incomplete and ignored on read, as is a torn
//! last line.

use serde::{Deserialize, Serialize};

use super::agents::RecordedInput;
use super::condition::EngineConfig;
use super::trial::{run_trial, TickSample, TrialRecord, TrialSummary, VirtualClock};
use crate::error::{Error, Result};

pub const TICK_BATCH: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LogEntry {
    Ticks {
        trial: u64,
        samples: Vec<TickSample>,
        jitter: Vec<f64>,
    },
    Summary(TrialSummary),
}

/// Log lines for one trial, newline-terminated.
pub fn encode_record(record: &TrialRecord) -> String {
    let mut out = String::new();
    let trial = record.summary.trial;
    let jitter_at = |i: usize| record.jitter.get(i).copied().unwrap_or(0.0);
    for (b, chunk) in record.samples.chunks(TICK_BATCH).enumerate() {
        let start = b * TICK_BATCH;
        let entry = LogEntry::Ticks {
            trial,
            samples: chunk.to_vec(),
            jitter: (start..start + chunk.len()).map(jitter_at).collect(),
        };
        out.push_str(&serde_json::to_string(&entry).expect("log entries serialize"));
        out.push('\n');
    }
    out.push_str(&encode_summary(&record.summary));
    out.push('\n');
    out
}

/// The summary line alone, without newline. Replay compares these bytes.
pub fn encode_summary(summary: &TrialSummary) -> String {
    serde_json::to_string(&LogEntry::Summary(summary.clone())).expect("log entries serialize")
}

/// Parse a log. A final line without its newline that fails to parse is
/// treated as a torn write and dropped; any other bad line is an error.
pub fn parse_log(text: &str) -> Result<Vec<LogEntry>> {
    let mut out = Vec::new();
    let torn_tail = !text.is_empty() && !text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(e) => out.push(e),
            Err(_) if torn_tail && i + 1 == lines.len() => {}
            Err(e) => {
                return Err(Error::CorruptLog {
                    line: i + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

/// A trial read back from a log.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedTrial {
    pub summary: TrialSummary,
    pub samples: Vec<TickSample>,
}

impl LoggedTrial {
    pub fn angles(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.angle).collect()
    }
}

/// Trials that reached their summary line, in log order.
pub fn completed_trials(entries: &[LogEntry]) -> Vec<LoggedTrial> {
    let mut pending: Vec<(u64, Vec<TickSample>)> = Vec::new();
    let mut out = Vec::new();
    for e in entries {
        match e {
            LogEntry::Ticks { trial, samples, .. } => match pending.iter_mut().find(|(t, _)| t == trial) {
                Some((_, s)) => s.extend_from_slice(samples),
                None => pending.push((*trial, samples.clone())),
            },
            LogEntry::Summary(summary) => {
                let samples = pending
                    .iter()
                    .position(|(t, _)| *t == summary.trial)
                    .map(|i| pending.swap_remove(i).1)
                    .unwrap_or_default();
                out.push(LoggedTrial {
                    summary: summary.clone(),
                    samples,
                });
            }
        }
    }
    out
}

/// Re-run a logged trial from its recorded angles.
///
/// An invalidated trial replays to the same invalid outcome because the
/// recorded stream ends where the original input did.
pub fn replay(trial: &LoggedTrial, config: &EngineConfig) -> Result<TrialRecord> {
    let s = &trial.summary;
    let mut input = RecordedInput::new(trial.angles());
    run_trial(s.trial, &s.condition, s.target, config, &mut input, &mut VirtualClock)
}
