use serde::{Deserialize, Serialize};

use crate::{Error, Result, Stance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// One point per distinct score, in descending threshold order, so recall
/// is non-decreasing along `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    /// `recall<TAB>precision` lines for plotting.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&format!("{}\t{}\n", p.recall, p.precision));
        }
        out
    }
}

fn sorted_desc(scores: &[(f64, bool)]) -> Vec<(f64, bool)> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    sorted
}

/// Sweeps thresholds over the distinct scores from high to low. Scores equal
/// to each other cross the threshold together.
pub fn pr_curve(scores: &[(f64, bool)]) -> Result<PrCurve> {
    let total_pos = scores.iter().filter(|s| s.1).count();
    if total_pos == 0 {
        return Err(Error::NoPositives);
    }
    let sorted = sorted_desc(scores);
    let mut points = Vec::new();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            tp += sorted[i].1 as usize;
            seen += 1;
            i += 1;
        }
        points.push(PrPoint {
            threshold,
            recall: tp as f64 / total_pos as f64,
            precision: tp as f64 / seen as f64,
        });
    }
    Ok(PrCurve { points })
}

/// Trapezoidal area under the curve. A curve that starts above recall 0 is
/// anchored with `(0, precision of the first point)`.
pub fn auc(curve: &PrCurve) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.recall, p.precision)).collect();
    if let Some(&(r, p)) = pts.first() {
        if r > 0.0 {
            pts.insert(0, (0.0, p));
        }
    }
    if pts.len() < 2 {
        return Err(Error::CurveTooShort(pts.len()));
    }
    Ok(pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub class: Stance,
    /// Predict `class` when its probability is at least this value.
    pub threshold: f64,
    pub achieved_precision: f64,
    pub achieved_recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CalibrationOutcome {
    Calibrated(Calibration),
    Unachievable {
        class: Stance,
        target: f64,
        best_precision: f64,
    },
}

impl CalibrationOutcome {
    pub fn calibration(&self) -> Option<&Calibration> {
        match self {
            CalibrationOutcome::Calibrated(c) => Some(c),
            CalibrationOutcome::Unachievable { .. } => None,
        }
    }

    pub fn class(&self) -> Stance {
        match self {
            CalibrationOutcome::Calibrated(c) => c.class,
            CalibrationOutcome::Unachievable { class, .. } => *class,
        }
    }
}

/// Lowest-risk threshold that keeps precision at or above `target` while
/// reaching the most recall. Among equal recalls the higher threshold wins.
pub fn calibrate_threshold(class: Stance, scores: &[(f64, bool)], target: f64) -> Result<CalibrationOutcome> {
    let curve = pr_curve(scores)?;
    let mut best: Option<&PrPoint> = None;
    let mut best_precision = 0.0f64;
    for p in &curve.points {
        best_precision = best_precision.max(p.precision);
        if p.precision >= target && best.is_none_or(|b| p.recall > b.recall) {
            best = Some(p);
        }
    }
    Ok(match best {
        Some(p) => CalibrationOutcome::Calibrated(Calibration {
            class,
            threshold: p.threshold,
            achieved_precision: p.precision,
            achieved_recall: p.recall,
        }),
        None => CalibrationOutcome::Unachievable {
            class,
            target,
            best_precision,
        },
    })
}
