use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    compute_pmi, fit_cnn, random_predict, train_logreg, upsample, CnnModel, Doc, LogRegModel, PmiTable, TrainConfig,
};
use crate::embeddings::{EmbeddingTable, TweetMatrix};
use crate::rng::{self, Rng};
use crate::{Error, ProbDist, Result, Stance};

const MAGIC: &str = "stance-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Random,
    HsPmi,
    LogReg,
    Cnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Random, ModelKind::HsPmi, ModelKind::LogReg, ModelKind::Cnn];

    /// Whether training data is class-balanced by upsampling first.
    pub fn upsamples(self) -> bool {
        matches!(self, ModelKind::LogReg | ModelKind::Cnn)
    }

    /// Whether predictions carry class probabilities (and hence PR curves).
    pub fn is_probabilistic(self) -> bool {
        self.upsamples()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Random => "random",
            ModelKind::HsPmi => "hs_pmi",
            ModelKind::LogReg => "logreg",
            ModelKind::Cnn => "cnn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown model `{s}` (expected random, hs_pmi, logreg or cnn)"))
    }
}

/// Turns documents into model inputs.
#[derive(Debug, Clone, Copy)]
pub struct Featurizer<'a> {
    pub table: &'a EmbeddingTable,
    pub max_len: usize,
}

impl Featurizer<'_> {
    pub fn average(&self, doc: &Doc) -> Vec<f64> {
        self.table.embed_average(&doc.tokens)
    }

    pub fn sequence(&self, doc: &Doc) -> TweetMatrix {
        self.table.embed_sequence(&doc.tokens, self.max_len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: Stance,
    /// Present for probabilistic models.
    pub probs: Option<ProbDist>,
}

impl Prediction {
    /// Probabilities, or a one-hot distribution on the predicted class.
    pub fn distribution(&self) -> ProbDist {
        self.probs.unwrap_or_else(|| ProbDist::one_hot(self.class))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Random,
    HsPmi(PmiTable),
    LogReg(LogRegModel),
    Cnn(CnnModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Random => ModelKind::Random,
            Model::HsPmi(_) => ModelKind::HsPmi,
            Model::LogReg(_) => ModelKind::LogReg,
            Model::Cnn(_) => ModelKind::Cnn,
        }
    }

    /// Trains a model of `kind`. LogReg and CNN training sets are upsampled so
    /// that every class matches the largest one.
    pub fn train(kind: ModelKind, train: &[(Doc, Stance)], fx: &Featurizer, cfg: &TrainConfig) -> Result<Model> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let balanced;
        let data = if kind.upsamples() {
            balanced = upsample(train, &Stance::ALL, &mut rng::stream(cfg.seed, 1))?;
            &balanced
        } else {
            train
        };
        Ok(match kind {
            ModelKind::Random => Model::Random,
            ModelKind::HsPmi => {
                let rows: Vec<_> = data.iter().map(|(d, c)| (d.hashtags.clone(), *c)).collect();
                Model::HsPmi(compute_pmi(&rows))
            }
            ModelKind::LogReg => {
                let rows: Vec<_> = data.iter().map(|(d, c)| (fx.average(d), *c)).collect();
                Model::LogReg(train_logreg(&rows, cfg)?)
            }
            ModelKind::Cnn => {
                let rows: Vec<_> = data.iter().map(|(d, c)| (fx.sequence(d), *c)).collect();
                let mut rng = rng::seeded(cfg.seed);
                let init = CnnModel::init(super::NUM_FILTERS, super::FILTER_WIDTH, fx.table.dim(), &mut rng);
                Model::Cnn(fit_cnn(init, &rows, cfg, &mut rng)?)
            }
        })
    }

    pub fn predict(&self, doc: &Doc, fx: &Featurizer, rng: &mut Rng) -> Prediction {
        match self {
            Model::Random => Prediction {
                class: random_predict(rng),
                probs: None,
            },
            Model::HsPmi(table) => Prediction {
                class: table.predict(&doc.hashtags, rng),
                probs: None,
            },
            Model::LogReg(m) => {
                let p = m.predict(&fx.average(doc));
                Prediction {
                    class: p.argmax(),
                    probs: Some(p),
                }
            }
            Model::Cnn(m) => {
                let p = m.predict(&fx.sequence(doc));
                Prediction {
                    class: p.argmax(),
                    probs: Some(p),
                }
            }
        }
    }
}

/// Writes a line-oriented dump of every parameter array with its shape.
/// Values use the shortest representation that parses back to the same bits.
pub fn write_model<W: Write>(model: &Model, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "kind {}", model.kind())?;
    match model {
        Model::Random => {}
        Model::HsPmi(t) => {
            writeln!(out, "hashtags {}", t.scores().len())?;
            for (tag, s) in t.scores() {
                writeln!(out, "{tag} {:?} {:?} {:?}", s[0], s[1], s[2])?;
            }
        }
        Model::LogReg(m) => {
            write_tensor(&mut out, "weights", &[3, m.dim()], &m.weights)?;
            write_tensor(&mut out, "biases", &[3], &m.biases)?;
        }
        Model::Cnn(m) => {
            write_tensor(&mut out, "filters", &[m.num_filters(), m.width(), m.dim()], &m.filters)?;
            write_tensor(&mut out, "filter_biases", &[m.num_filters()], &m.filter_biases)?;
            write_tensor(&mut out, "output_weights", &[3, m.num_filters()], &m.output_weights)?;
            write_tensor(&mut out, "output_biases", &[3], &m.output_biases)?;
        }
    }
    Ok(())
}

fn write_tensor<W: Write>(out: &mut W, name: &str, shape: &[usize], values: &[f64]) -> std::io::Result<()> {
    write!(out, "tensor {name}")?;
    for d in shape {
        write!(out, " {d}")?;
    }
    writeln!(out)?;
    let mut first = true;
    for v in values {
        if !first {
            out.write_all(b" ")?;
        }
        write!(out, "{v:?}")?;
        first = false;
    }
    writeln!(out)
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(self.err(e.to_string())),
            None => Err(self.err("unexpected end of file".into())),
        }
    }

    fn err(&self, reason: String) -> Error {
        Error::ModelFormat {
            line: self.line,
            reason,
        }
    }

    fn tensor(&mut self, name: &str) -> Result<(Vec<usize>, Vec<f64>)> {
        let header = self.next()?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("tensor") || parts.next() != Some(name) {
            return Err(self.err(format!("expected `tensor {name}`")));
        }
        let shape: Vec<usize> = parts
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.err("bad shape".into()))?;
        let values = parse_floats(&self.next()?).map_err(|r| self.err(r))?;
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(self.err(format!("expected {expected} values, got {}", values.len())));
        }
        Ok((shape, values))
    }
}

fn parse_floats(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split_whitespace()
        .map(|v| v.parse::<f64>().map_err(|_| format!("bad number `{v}`")))
        .collect()
}

pub fn read_model<R: BufRead>(input: R) -> Result<Model> {
    let mut lines = Lines {
        inner: input.lines(),
        line: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err(format!("expected `{MAGIC}`")));
    }
    let kind_line = lines.next()?;
    let kind: ModelKind = kind_line
        .strip_prefix("kind ")
        .ok_or_else(|| lines.err("expected `kind <name>`".into()))?
        .parse()
        .map_err(|e| lines.err(e))?;
    Ok(match kind {
        ModelKind::Random => Model::Random,
        ModelKind::HsPmi => {
            let header = lines.next()?;
            let n: usize = header
                .strip_prefix("hashtags ")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| lines.err("expected `hashtags <count>`".into()))?;
            let mut scores = std::collections::BTreeMap::new();
            for _ in 0..n {
                let row = lines.next()?;
                let (tag, rest) = row.split_once(' ').ok_or_else(|| lines.err("bad hashtag row".into()))?;
                let v = parse_floats(rest).map_err(|r| lines.err(r))?;
                let v: [f64; 3] = v.try_into().map_err(|_| lines.err("expected 3 scores".into()))?;
                scores.insert(tag.to_string(), v);
            }
            Model::HsPmi(PmiTable::from_scores(scores))
        }
        ModelKind::LogReg => {
            let (shape, weights) = lines.tensor("weights")?;
            let (_, biases) = lines.tensor("biases")?;
            let dim = match shape[..] {
                [3, d] => d,
                _ => return Err(lines.err("weights must be 3 × dim".into())),
            };
            let biases: [f64; 3] = biases.try_into().map_err(|_| lines.err("expected 3 biases".into()))?;
            Model::LogReg(LogRegModel::from_parts(dim, weights, biases)?)
        }
        ModelKind::Cnn => {
            let (shape, filters) = lines.tensor("filters")?;
            let [nf, width, dim] = shape[..] else {
                return Err(lines.err("filters must be filters × width × dim".into()));
            };
            let (_, filter_biases) = lines.tensor("filter_biases")?;
            let (ow_shape, output_weights) = lines.tensor("output_weights")?;
            let (_, output_biases) = lines.tensor("output_biases")?;
            if filter_biases.len() != nf || ow_shape != [3, nf] {
                return Err(lines.err("inconsistent CNN shapes".into()));
            }
            let mut m = CnnModel::zeros_with_shape(nf, width, dim);
            m.filters = filters;
            m.filter_biases = filter_biases;
            m.output_weights = output_weights;
            m.output_biases = output_biases
                .try_into()
                .map_err(|_| lines.err("expected 3 output biases".into()))?;
            Model::Cnn(m)
        }
    })
}
