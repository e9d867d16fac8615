use serde::{Deserialize, Serialize};

use super::trial::TrialSummary;
use crate::error::{Error, Result};

/// Least-squares line `T_r = p + r·F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittsFit {
    /// Intercept, seconds.
    pub p: f64,
    /// Slope, seconds per bit.
    pub r: f64,
    /// Coefficient of determination.
    pub goodness: f64,
}

impl FittsFit {
    pub fn predict(&self, difficulty: f64) -> f64 {
        self.p + self.r * difficulty
    }

    /// Same line with `offset` seconds removed from every reaching time.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            p: self.p - offset,
            ..*self
        }
    }
}

/// Minimum reaching time over the given (baseline) trials.
pub fn estimate_internal_delay(records: &[TrialSummary]) -> Result<f64> {
    records
        .iter()
        .filter_map(TrialSummary::reach_time)
        .min_by(f64::total_cmp)
        .ok_or(Error::Empty)
}

/// Trials with neither added delay nor quantization.
pub fn baseline(records: &[TrialSummary]) -> Vec<TrialSummary> {
    records.iter().filter(|r| r.condition.is_baseline()).cloned().collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `(difficulty, mean reaching time)` per distinct difficulty, ascending.
/// Censored and invalid trials are left out.
pub fn mean_by_difficulty(records: &[TrialSummary]) -> Vec<(f64, f64)> {
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in records {
        let Some(t) = r.reach_time() else { continue };
        match groups.iter_mut().find(|(f, _)| (*f - r.difficulty).abs() <= 1e-9) {
            Some((_, ts)) => ts.push(t),
            None => groups.push((r.difficulty, vec![t])),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    groups.into_iter().map(|(f, ts)| (f, mean(&ts))).collect()
}

/// Fit mean reaching time against difficulty.
pub fn fit_fitts(records: &[TrialSummary]) -> Result<FittsFit> {
    let points = mean_by_difficulty(records);
    if points.is_empty() {
        return Err(Error::Empty);
    }
    fit_line(&points)
}

/// Ordinary least squares through `(x, y)` points.
pub fn fit_line(points: &[(f64, f64)]) -> Result<FittsFit> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if points.len() < 2 || sxx <= 0.0 {
        return Err(Error::DegenerateFit(points.len()));
    }
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let r = sxy / sxx;
    let p = my - r * mx;
    let ss_res: f64 = points.iter().map(|(x, y)| (y - p - r * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let goodness = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(FittsFit { p, r, goodness })
}

/// One row of the per-condition results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    #[serde(rename = "D")]
    pub distance: f64,
    #[serde(rename = "W")]
    pub width: f64,
    #[serde(rename = "F")]
    pub difficulty: f64,
    /// Mean reaching time minus internal delay; empty when nothing reached.
    pub mean_reach_time: Option<f64>,
    pub standard_error: Option<f64>,
    pub n: usize,
    pub censored: usize,
    pub invalid: usize,
}

/// Group trials by condition and geometry, in first-seen order.
pub fn summarize(records: &[TrialSummary], internal_delay: f64) -> Vec<ConditionSummary> {
    let mut rows: Vec<(ConditionSummary, Vec<f64>)> = Vec::new();
    for r in records {
        let c = &r.condition;
        let idx = rows
            .iter()
            .position(|(row, _)| row.condition == r.label && row.distance == c.distance && row.width == c.width);
        let idx = idx.unwrap_or_else(|| {
            rows.push((
                ConditionSummary {
                    condition: r.label.clone(),
                    distance: c.distance,
                    width: c.width,
                    difficulty: r.difficulty,
                    mean_reach_time: None,
                    standard_error: None,
                    n: 0,
                    censored: 0,
                    invalid: 0,
                },
                Vec::new(),
            ));
            rows.len() - 1
        });
        let (row, times) = &mut rows[idx];
        match r.reach_time() {
            Some(t) => times.push(t - internal_delay),
            None if r.is_censored() => row.censored += 1,
            None => row.invalid += 1,
        }
    }
    rows.into_iter()
        .map(|(mut row, times)| {
            row.n = times.len();
            if !times.is_empty() {
                let m = mean(&times);
                row.mean_reach_time = Some(m);
                row.standard_error = Some(if times.len() > 1 {
                    let var = times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (times.len() - 1) as f64;
                    (var / times.len() as f64).sqrt()
                } else {
                    0.0
                });
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::condition::{Condition, Variant};
    use crate::experiment::trial::TrialOutcome;
    use approx::assert_relative_eq;

    fn rec(width: f64, time: Option<f64>) -> TrialSummary {
        let condition = Condition::new(Variant::AddedDelay { delay: 0.0 }, 4.0, width, 1).unwrap();
        TrialSummary {
            trial: 0,
            condition,
            label: condition.label(),
            difficulty: condition.difficulty(),
            target: 4.0,
            interval: 0.025,
            ticks: 0,
            outcome: match time {
                Some(time) => TrialOutcome::Reached { tick: 0, time },
                None => TrialOutcome::Censored { ticks: 10 },
            },
        }
    }

    #[test]
    fn internal_delay_is_minimum() {
        let rs: Vec<_> = [1.3, 1.17, 1.4].iter().map(|&t| rec(1.0, Some(t))).collect();
        assert_eq!(estimate_internal_delay(&rs).unwrap(), 1.17);
        assert_eq!(estimate_internal_delay(&rs[..1]).unwrap(), 1.3);
        assert_eq!(estimate_internal_delay(&[]), Err(Error::Empty));
    }

    #[test]
    fn exact_line_is_recovered() {
        let rs: Vec<_> = [8.0, 4.0, 2.0, 1.0]
            .iter()
            .map(|&w| {
                let r = rec(w, None);
                rec(w, Some(0.5 + 0.25 * r.difficulty))
            })
            .collect();
        let fit = fit_fitts(&rs).unwrap();
        assert_relative_eq!(fit.p, 0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.r, 0.25, epsilon = 1e-12);
        assert_relative_eq!(fit.goodness, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_data_has_zero_slope() {
        let rs = vec![rec(1.0, Some(2.0)), rec(2.0, Some(2.0))];
        let fit = fit_fitts(&rs).unwrap();
        assert_eq!(fit.r, 0.0);
        assert_eq!(fit.p, 2.0);
    }

    #[test]
    fn single_difficulty_is_degenerate() {
        let rs = vec![rec(1.0, Some(2.0)), rec(1.0, Some(3.0))];
        assert_eq!(fit_fitts(&rs), Err(Error::DegenerateFit(1)));
    }

    #[test]
    fn summary_excludes_censored() {
        let rs = vec![rec(1.0, Some(1.0)), rec(1.0, Some(2.0)), rec(1.0, None)];
        let rows = summarize(&rs, 0.5);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 2);
        assert_eq!(rows[0].censored, 1);
        assert_relative_eq!(rows[0].mean_reach_time.unwrap(), 1.0);
        assert_relative_eq!(rows[0].standard_error.unwrap(), 0.5);
    }
}
