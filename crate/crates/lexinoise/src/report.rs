//! Summary reports over scored experiment data: per-condition means, the
//! diff.HRS distribution, and five-number summaries of the per-pair HRS
//! extremes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::{condition_summary, ConditionSummary, PairComparison, StimulusScore};
use crate::error::{Error, Result};

/// Number of equal-width diff.HRS histogram bins over [0, 1].
pub const HISTOGRAM_BINS: usize = 10;

/// Minimum / first quartile / median / third quartile / maximum.
#[derive(Debug, Clone, Serialize)]
pub struct FiveNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Five-number summary with linear-interpolation quantiles (the common
/// "type 7" convention, matching numpy and R defaults).
pub fn five_number_summary(values: &[f64]) -> Result<FiveNumberSummary> {
    if values.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            got: 0,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let pos = p * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };
    Ok(FiveNumberSummary {
        min: sorted[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Histogram of diff.HRS values in ten bins of width 0.1; a diff of exactly
/// 1.0 falls in the last bin.
pub fn diff_hrs_histogram(comparisons: &[PairComparison]) -> [usize; HISTOGRAM_BINS] {
    let mut bins = [0usize; HISTOGRAM_BINS];
    for c in comparisons {
        let idx = ((c.diff_hrs * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        bins[idx] += 1;
    }
    bins
}

/// Everything the `report` command prints, in machine-readable form.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub conditions: Vec<ConditionRow>,
    pub diff_hrs_histogram: [usize; HISTOGRAM_BINS],
    pub hrs_min_summary: FiveNumberSummary,
    pub hrs_max_summary: FiveNumberSummary,
    pub n_pairs: usize,
    pub n_scores: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionRow {
    pub noise_id: String,
    pub snr_db: f64,
    pub mean_hrs: f64,
    pub n_scores: usize,
    pub mean_diff_hrs: f64,
    pub n_pairs: usize,
}

impl From<&ConditionSummary> for ConditionRow {
    fn from(s: &ConditionSummary) -> Self {
        Self {
            noise_id: s.condition.noise_id.clone(),
            snr_db: s.condition.snr_db,
            mean_hrs: s.mean_hrs,
            n_scores: s.n_scores,
            mean_diff_hrs: s.mean_diff_hrs,
            n_pairs: s.n_pairs,
        }
    }
}

/// Build the full report from per-stimulus scores and pair comparisons.
pub fn build_report(
    scores: &[StimulusScore],
    comparisons: &[PairComparison],
) -> Result<ExperimentReport> {
    if comparisons.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            got: 0,
        });
    }
    let conditions = condition_summary(scores, comparisons)?
        .iter()
        .map(ConditionRow::from)
        .collect();
    let mins: Vec<f64> = comparisons.iter().map(|c| c.hrs_min).collect();
    let maxs: Vec<f64> = comparisons.iter().map(|c| c.hrs_max).collect();
    Ok(ExperimentReport {
        conditions,
        diff_hrs_histogram: diff_hrs_histogram(comparisons),
        hrs_min_summary: five_number_summary(&mins)?,
        hrs_max_summary: five_number_summary(&maxs)?,
        n_pairs: comparisons.len(),
        n_scores: scores.len(),
    })
}

impl ExperimentReport {
    /// Human-readable text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Recognition report: {} stimulus scores, {} pair comparisons",
            self.n_scores, self.n_pairs
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>10} {:>8} {:>14} {:>8}",
            "noise", "SNR(dB)", "mean HRS", "n", "mean diff.HRS", "pairs"
        );
        for row in &self.conditions {
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>10.3} {:>8} {:>14.3} {:>8}",
                row.noise_id, row.snr_db, row.mean_hrs, row.n_scores, row.mean_diff_hrs, row.n_pairs
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "diff.HRS histogram (bin width 0.1):");
        let peak = self.diff_hrs_histogram.iter().copied().max().unwrap_or(1).max(1);
        for (i, &count) in self.diff_hrs_histogram.iter().enumerate() {
            let lo = i as f64 / HISTOGRAM_BINS as f64;
            let hi = lo + 1.0 / HISTOGRAM_BINS as f64;
            let bar = "#".repeat((count * 40).div_ceil(peak).min(40));
            let _ = writeln!(out, "  [{lo:.1}, {hi:.1}) {count:>5} {bar}");
        }
        let _ = writeln!(out);
        for (label, s) in [
            ("per-pair HRS of the harder word", &self.hrs_min_summary),
            ("per-pair HRS of the easier word", &self.hrs_max_summary),
        ] {
            let _ = writeln!(
                out,
                "{label}: min {:.3}, q1 {:.3}, median {:.3}, q3 {:.3}, max {:.3}",
                s.min, s.q1, s.median, s.q3, s.max
            );
        }
        out
    }

    /// CSV rendering of the per-condition table (same columns as the text
    /// table).
    pub fn to_condition_csv(&self) -> String {
        let mut out = String::from("noise_id,snr_db,mean_hrs,n_scores,mean_diff_hrs,n_pairs\n");
        for row in &self.conditions {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.noise_id, row.snr_db, row.mean_hrs, row.n_scores, row.mean_diff_hrs, row.n_pairs
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::NoiseCondition;
    use approx::assert_abs_diff_eq;

    fn score(target: &str, snr: f64, n_correct: usize, n_total: usize) -> StimulusScore {
        StimulusScore {
            stimulus_id: format!("{target}@{snr}"),
            target: target.to_string(),
            condition: NoiseCondition::new(snr, "babble").unwrap(),
            n_correct,
            n_total,
            hrs: n_correct as f64 / n_total as f64,
        }
    }

    fn comparison(id: &str, snr: f64, hrs_a: f64, hrs_b: f64) -> PairComparison {
        PairComparison {
            pair_id: id.to_string(),
            condition: NoiseCondition::new(snr, "babble").unwrap(),
            hrs_a,
            hrs_b,
            diff_hrs: (hrs_a - hrs_b).abs(),
            hrs_min: hrs_a.min(hrs_b),
            hrs_max: hrs_a.max(hrs_b),
            winner: "a".to_string(),
            tie: hrs_a == hrs_b,
        }
    }

    #[test]
    fn five_number_summary_odd_count() {
        let s = five_number_summary(&[3.0, 1.0, 2.0, 5.0, 4.0]).unwrap();
        assert_eq!(s.min, 1.0);
        assert_eq!(s.q1, 2.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.q3, 4.0);
        assert_eq!(s.max, 5.0);
    }

    #[test]
    fn five_number_summary_interpolates() {
        // numpy.percentile([1,2,3,4], [25,50,75]) = [1.75, 2.5, 3.25].
        let s = five_number_summary(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.q1, 1.75);
        assert_abs_diff_eq!(s.median, 2.5);
        assert_abs_diff_eq!(s.q3, 3.25);
    }

    #[test]
    fn five_number_summary_empty_rejected() {
        assert!(five_number_summary(&[]).is_err());
    }

    #[test]
    fn histogram_bins_and_edge() {
        let comparisons = vec![
            comparison("p1", 0.0, 0.0, 0.05),  // 0.05 → bin 0
            comparison("p2", 0.0, 0.0, 0.1),   // 0.10 → bin 1
            comparison("p3", 0.0, 0.95, 0.0),  // 0.95 → bin 9
            comparison("p4", 0.0, 1.0, 0.0),   // 1.00 → bin 9
        ];
        let bins = diff_hrs_histogram(&comparisons);
        assert_eq!(bins[0], 1);
        assert_eq!(bins[1], 1);
        assert_eq!(bins[9], 2);
        assert_eq!(bins.iter().sum::<usize>(), comparisons.len());
    }

    #[test]
    fn report_condition_means() {
        let scores = vec![
            score("sea", 0.0, 4, 5),
            score("ocean", 0.0, 2, 5),
            score("sea", -5.0, 2, 5),
            score("ocean", -5.0, 1, 5),
        ];
        let comparisons = vec![
            comparison("p1", 0.0, 0.8, 0.4),
            comparison("p1", -5.0, 0.4, 0.2),
        ];
        let report = build_report(&scores, &comparisons).unwrap();
        assert_eq!(report.conditions.len(), 2);
        assert_eq!(report.conditions[0].snr_db, 0.0);
        assert_abs_diff_eq!(report.conditions[0].mean_hrs, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(report.conditions[0].mean_diff_hrs, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(report.conditions[1].mean_diff_hrs, 0.2, epsilon = 1e-12);

        let text = report.to_text();
        assert!(text.contains("mean diff.HRS"));
        let csv = report.to_condition_csv();
        assert!(csv.starts_with("noise_id,snr_db,"));
        assert_eq!(csv.lines().count(), 3);
    }
}
