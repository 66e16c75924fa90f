use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Responsibility framing of a tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    ProRussian,
    ProUkrainian,
    Neutral,
}

impl Stance {
    pub const ALL: [Stance; 3] = [Stance::ProRussian, Stance::ProUkrainian, Stance::Neutral];
    pub const POLARIZED: [Stance; 2] = [Stance::ProRussian, Stance::ProUkrainian];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Stance::ProRussian => 0,
            Stance::ProUkrainian => 1,
            Stance::Neutral => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Stance> {
        Stance::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stance::ProRussian => "pro_russian",
            Stance::ProUkrainian => "pro_ukrainian",
            Stance::Neutral => "neutral",
        }
    }

    pub fn is_polarized(self) -> bool {
        self != Stance::Neutral
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pro_russian" => Ok(Stance::ProRussian),
            "pro_ukrainian" => Ok(Stance::ProUkrainian),
            "neutral" => Ok(Stance::Neutral),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Where a label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Manual,
    Predicted,
    TriageConfirmed,
    Propagated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceLabel {
    pub class: Stance,
    pub provenance: Provenance,
}

impl StanceLabel {
    pub fn new(class: Stance, provenance: Provenance) -> Self {
        StanceLabel { class, provenance }
    }

    pub fn manual(class: Stance) -> Self {
        Self::new(class, Provenance::Manual)
    }
}

/// Probability distribution over the three classes, indexed by [`Stance::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbDist(pub [f64; 3]);

impl ProbDist {
    pub fn uniform() -> Self {
        ProbDist([1.0 / 3.0; 3])
    }

    pub fn one_hot(class: Stance) -> Self {
        let mut p = [0.0; 3];
        p[class.index()] = 1.0;
        ProbDist(p)
    }

    /// Numerically stable softmax.
    pub fn softmax(logits: [f64; 3]) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = logits.map(|z| (z - max).exp());
        let sum: f64 = p.iter().sum();
        for v in &mut p {
            *v /= sum;
        }
        ProbDist(p)
    }

    pub fn prob(&self, class: Stance) -> f64 {
        self.0[class.index()]
    }

    /// Most probable class; ties go to the lower class index.
    pub fn argmax(&self) -> Stance {
        let mut best = 0;
        for i in 1..3 {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Stance::ALL[best]
    }
}
