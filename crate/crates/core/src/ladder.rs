//! Similarity-ladder simulation: cosine similarity between train/test
//! embedding pairs as a function of the number of shared attributes, under
//! compositional (concatenation or superposition) and n-holistic encodings.
//!
//! Compositional encodings of assignments sharing c of I attributes have
//! expected cosine c/I at high dimension; an encoding that fuses its first
//! n attributes into one holistic chunk loses that credit whenever fewer
//! than n of them match.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::stream_rng;

/// A dense table of random unit-variance Gaussian code vectors.
#[derive(Debug, Clone)]
pub struct RandomCodebook {
    rows: usize,
    dim: usize,
    seed: u64,
    entries: Vec<Vec<f64>>,
}

impl RandomCodebook {
    pub fn new(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, &[0x636f_6465]);
        let entries = (0..rows)
            .map(|_| {
                (0..dim)
                    .map(|_| rng.sample(rand_distr::StandardNormal))
                    .collect()
            })
            .collect();
        Self {
            rows,
            dim,
            seed,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entry(&self, value: usize) -> &[f64] {
        &self.entries[value]
    }
}

/// Lazily materialized holistic codebook: one deterministic Gaussian vector
/// per value tuple, derived by hashing the tuple into a seed. The dense
/// equivalent would need cardinality^n rows.
#[derive(Debug, Clone, Copy)]
pub struct HolisticEncoder {
    pub dim: usize,
    pub seed: u64,
}

impl HolisticEncoder {
    pub fn vector_for(&self, tuple: &[u16]) -> Vec<f64> {
        let tags: Vec<u64> = std::iter::once(0x686f_6c6f_u64)
            .chain(tuple.iter().map(|&v| v as u64 + 1))
            .collect();
        let mut rng = stream_rng(self.seed, &tags);
        (0..self.dim)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect()
    }
}

/// Compositional encoding variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionMode {
    /// Attribute codes concatenated in factor order.
    Concat,
    /// Element-wise sum of equal-dimension attribute codes.
    Superpose,
}

/// Encode an assignment compositionally with one codebook per attribute.
pub fn encode_compositional(
    values: &[u16],
    codebooks: &[RandomCodebook],
    mode: CompositionMode,
) -> Result<Vec<f64>> {
    assert_eq!(values.len(), codebooks.len(), "one codebook per attribute");
    match mode {
        CompositionMode::Concat => {
            let total: usize = codebooks.iter().map(|b| b.dim()).sum();
            let mut out = Vec::with_capacity(total);
            for (&v, book) in values.iter().zip(codebooks) {
                out.extend_from_slice(book.entry(v as usize));
            }
            Ok(out)
        }
        CompositionMode::Superpose => {
            let dim = codebooks[0].dim();
            for b in codebooks {
                if b.dim() != dim {
                    return Err(Error::DimMismatch {
                        left: dim,
                        right: b.dim(),
                    });
                }
            }
            let mut out = vec![0.0; dim];
            for (&v, book) in values.iter().zip(codebooks) {
                for (o, x) in out.iter_mut().zip(book.entry(v as usize)) {
                    *o += x;
                }
            }
            Ok(out)
        }
    }
}

/// Encode with one holistic chunk for the first n attributes and
/// concatenated per-attribute codes for the rest.
pub fn encode_n_holistic(
    values: &[u16],
    n: usize,
    holistic: &HolisticEncoder,
    codebooks: &[RandomCodebook],
) -> Result<Vec<f64>> {
    let i_count = values.len();
    if n < 2 || n > i_count {
        return Err(Error::InvalidHolisticN { n, i: i_count });
    }
    assert_eq!(values.len(), codebooks.len(), "one codebook per attribute");
    let mut out = holistic.vector_for(&values[..n]);
    for (pos, &v) in values.iter().enumerate().skip(n) {
        out.extend_from_slice(codebooks[pos].entry(v as usize));
    }
    Ok(out)
}

/// Cosine similarity with f64 accumulation.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Ladder simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderParams {
    /// Number of attributes (I).
    pub attributes: usize,
    /// Values per attribute.
    pub cardinality: usize,
    /// c values to sweep; None means 0..=I.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c_values: Option<Vec<usize>>,
    pub mode: LadderMode,
    /// Per-attribute code dimension.
    pub dim: usize,
    /// Holistic chunk dimension (holistic mode only).
    pub holistic_dim: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LadderMode {
    Concat,
    Superpose,
    Holistic { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub c: usize,
    pub mean: f64,
    pub se: f64,
}

/// Mean/SE cosine similarity per c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderCurve {
    pub mode: LadderMode,
    pub points: Vec<LadderPoint>,
}

impl LadderCurve {
    /// CSV rows `c,mean,se,mode,n` (n empty for non-holistic modes).
    pub fn to_csv(&self) -> String {
        let (mode, n) = match self.mode {
            LadderMode::Concat => ("concat", String::new()),
            LadderMode::Superpose => ("superpose", String::new()),
            LadderMode::Holistic { n } => ("holistic", n.to_string()),
        };
        let mut out = String::from("c,mean,se,mode,n\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{},{}\n", p.c, p.mean, p.se, mode, n));
        }
        out
    }
}

/// Run the ladder simulation.
///
/// Per trial: a train assignment is sampled uniformly, the test assignment
/// copies its first c coordinates and resamples every remaining coordinate
/// uniformly over the other cardinality-1 values (forced to differ), and
/// the cosine between the two encodings is recorded. Trial RNG streams are
/// derived from (seed, c, trial), so results are schedule-independent.
pub fn ladder_similarity(params: &LadderParams) -> Result<LadderCurve> {
    let i_count = params.attributes;
    assert!(i_count > 0 && params.cardinality >= 2 && params.dim > 0);
    if params.trials < 2 {
        return Err(Error::TooFewTrials {
            min: 2,
            got: params.trials,
        });
    }
    if let LadderMode::Holistic { n } = params.mode {
        if n < 2 || n > i_count {
            return Err(Error::InvalidHolisticN { n, i: i_count });
        }
    }
    let c_values: Vec<usize> = match &params.c_values {
        Some(cs) => {
            for &c in cs {
                if c > i_count {
                    return Err(Error::InvalidC { c, i: i_count });
                }
            }
            cs.clone()
        }
        None => (0..=i_count).collect(),
    };

    // One codebook per attribute; identical attribute dims.
    let codebooks: Vec<RandomCodebook> = (0..i_count)
        .map(|a| {
            RandomCodebook::new(
                params.cardinality,
                params.dim,
                crate::seeding::derive_seed(params.seed, &[0x6261_7365, a as u64]),
            )
        })
        .collect();
    let holistic = HolisticEncoder {
        dim: params.holistic_dim,
        seed: params.seed,
    };

    let card = params.cardinality as u16;
    let mut points = Vec::with_capacity(c_values.len());
    for &c in &c_values {
        let mut sims = Vec::with_capacity(params.trials);
        for trial in 0..params.trials {
            let mut rng = stream_rng(params.seed, &[0x7472_6961, c as u64, trial as u64]);
            let train: Vec<u16> = (0..i_count).map(|_| rng.random_range(0..card)).collect();
            let mut test = train.clone();
            for v in test.iter_mut().skip(c) {
                let other = rng.random_range(0..card - 1);
                *v = if other >= *v { other + 1 } else { other };
            }
            let (e_train, e_test) = match params.mode {
                LadderMode::Concat => (
                    encode_compositional(&train, &codebooks, CompositionMode::Concat)?,
                    encode_compositional(&test, &codebooks, CompositionMode::Concat)?,
                ),
                LadderMode::Superpose => (
                    encode_compositional(&train, &codebooks, CompositionMode::Superpose)?,
                    encode_compositional(&test, &codebooks, CompositionMode::Superpose)?,
                ),
                LadderMode::Holistic { n } => (
                    encode_n_holistic(&train, n, &holistic, &codebooks)?,
                    encode_n_holistic(&test, n, &holistic, &codebooks)?,
                ),
            };
            sims.push(cosine(&e_train, &e_test));
        }
        let mean = sims.iter().sum::<f64>() / sims.len() as f64;
        let var = sims.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (sims.len() - 1) as f64;
        let se = (var / sims.len() as f64).sqrt();
        points.push(LadderPoint { c, mean, se });
    }
    Ok(LadderCurve {
        mode: params.mode,
        points,
    })
}
