use dess::experiment::{
    baseline, estimate_internal_delay, fit_fitts, summarize, ConditionSummary, FittsFit, TrialSummary,
};
use serde::{Deserialize, Serialize};

use crate::Result;

/// Fitts fit over all trials of one condition label, when they span at
/// least two difficulties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFit {
    pub condition: String,
    pub fit: Option<FittsFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsBundle {
    /// Subtracted from every mean; 0 when the session has no baseline trials.
    pub internal_delay: f64,
    pub rows: Vec<ConditionSummary>,
    pub fits: Vec<ConditionFit>,
}

pub const CSV_HEADER: [&str; 9] = [
    "condition",
    "D",
    "W",
    "F",
    "mean_T_r",
    "standard_error",
    "n",
    "censored",
    "invalid",
];

impl ResultsBundle {
    pub fn from_trials(trials: &[TrialSummary]) -> Self {
        let internal_delay = estimate_internal_delay(&baseline(trials)).unwrap_or(0.0);
        let rows = summarize(trials, internal_delay);
        let mut labels: Vec<&str> = Vec::new();
        for t in trials {
            if !labels.contains(&t.label.as_str()) {
                labels.push(&t.label);
            }
        }
        let fits = labels
            .into_iter()
            .map(|label| {
                let group: Vec<TrialSummary> = trials.iter().filter(|t| t.label == label).cloned().collect();
                ConditionFit {
                    condition: label.to_string(),
                    fit: fit_fitts(&group).ok().map(|f| f.shifted(internal_delay)),
                }
            })
            .collect();
        Self {
            internal_delay,
            rows,
            fits,
        }
    }

    /// Per-condition table; empty cells where no trial reached the target.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.condition.clone(),
                r.distance.to_string(),
                r.width.to_string(),
                r.difficulty.to_string(),
                opt(r.mean_reach_time),
                opt(r.standard_error),
                r.n.to_string(),
                r.censored.to_string(),
                r.invalid.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Parse a table written by [`ResultsBundle::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ConditionSummary>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| crate::ServiceError::Protocol(format!("bad number in column {}", CSV_HEADER[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        rows.push(ConditionSummary {
            condition: rec[0].to_string(),
            distance: num(1)?,
            width: num(2)?,
            difficulty: num(3)?,
            mean_reach_time: opt(4)?,
            standard_error: opt(5)?,
            n: num(6)? as usize,
            censored: num(7)? as usize,
            invalid: num(8)? as usize,
        });
    }
    Ok(rows)
}
