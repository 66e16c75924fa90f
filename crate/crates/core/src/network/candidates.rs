use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{EdgeKey, EdgeStatus, RetweetGraph};
use crate::evaluation::Calibration;
use crate::{ProbDist, Stance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub tweet_id: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEdge {
    pub edge: EdgeKey,
    pub class: Stance,
    /// Highest confidence first.
    pub support: Vec<Support>,
    /// The same edge also has a candidate for the opposite class.
    pub conflicting: bool,
}

impl CandidateEdge {
    pub fn max_confidence(&self) -> f64 {
        self.support.first().map_or(0.0, |s| s.confidence)
    }
}

/// Unlabeled edges with at least one tweet whose predicted probability for a
/// polarized class reaches that class's calibrated threshold. Sorted by the
/// strongest supporting confidence, descending.
pub fn candidate_edges(
    graph: &RetweetGraph,
    predictions: &HashMap<String, ProbDist>,
    calibrations: &[Calibration],
) -> Vec<CandidateEdge> {
    let mut out = Vec::new();
    for (key, record) in graph.edges() {
        if record.label.status != EdgeStatus::Unlabeled {
            continue;
        }
        let start = out.len();
        for cal in calibrations.iter().filter(|c| c.class.is_polarized()) {
            let mut support: Vec<Support> = record
                .tweet_ids
                .iter()
                .filter_map(|id| {
                    let p = predictions.get(id)?.prob(cal.class);
                    (p >= cal.threshold).then(|| Support {
                        tweet_id: id.clone(),
                        confidence: p,
                    })
                })
                .collect();
            if support.is_empty() {
                continue;
            }
            support.sort_by(|x, y| {
                y.confidence
                    .total_cmp(&x.confidence)
                    .then_with(|| x.tweet_id.cmp(&y.tweet_id))
            });
            out.push(CandidateEdge {
                edge: key.clone(),
                class: cal.class,
                support,
                conflicting: false,
            });
        }
        if out.len() - start > 1 {
            for c in &mut out[start..] {
                c.conflicting = true;
            }
        }
    }
    out.sort_by(|x, y| {
        y.max_confidence()
            .total_cmp(&x.max_confidence())
            .then_with(|| x.edge.cmp(&y.edge))
            .then_with(|| x.class.cmp(&y.class))
    });
    out
}
