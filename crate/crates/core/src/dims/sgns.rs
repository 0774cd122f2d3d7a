//! Skip-gram with negative sampling over (community, author) pairs.
//!
//! Communities play the role of words and authors the role of contexts, so
//! communities that share commenters end up close together.

use std::collections::BTreeMap;
use std::io::Read;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::embedding::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cooccurrence {
    pub community: String,
    pub author: String,
    pub count: u64,
}

impl Cooccurrence {
    pub fn new(community: impl Into<String>, author: impl Into<String>, count: u64) -> Self {
        Cooccurrence {
            community: community.into(),
            author: author.into(),
            count,
        }
    }
}

/// CSV with header `community,author,count`.
pub fn read_cooccurrence_csv<R: Read>(reader: R) -> Result<Vec<Cooccurrence>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(|e| Error::parse("co-occurrence csv", e)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsParams {
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Floor of the linear decay, as a fraction of `learning_rate`.
    pub min_learning_rate_frac: f64,
    pub noise_exponent: f64,
    pub min_count: u64,
    pub seed: u64,
}

impl Default for SgnsParams {
    fn default() -> Self {
        SgnsParams {
            dim: 150,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate_frac: 1e-4,
            noise_exponent: 0.75,
            min_count: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub embedding: EmbeddingMatrix,
    pub dropped_communities: Vec<String>,
    pub dropped_authors: Vec<String>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Trains community vectors. Single-threaded and bit-reproducible for a
/// given seed.
pub fn train_embedding(pairs: &[Cooccurrence], params: &SgnsParams) -> Result<TrainOutcome> {
    if params.dim == 0 || params.epochs == 0 {
        return Err(Error::Config("dim and epochs must be positive".into()));
    }
    if let Some(p) = pairs.iter().find(|p| p.count == 0) {
        return Err(Error::Contract(format!(
            "pair ({}, {}) has a zero count",
            p.community, p.author
        )));
    }
    let mut community_totals: BTreeMap<&str, u64> = BTreeMap::new();
    let mut author_totals: BTreeMap<&str, u64> = BTreeMap::new();
    for p in pairs {
        *community_totals.entry(&p.community).or_default() += p.count;
        *author_totals.entry(&p.author).or_default() += p.count;
    }
    let dropped = |totals: &BTreeMap<&str, u64>| -> Vec<String> {
        totals
            .iter()
            .filter(|(_, &c)| c < params.min_count)
            .map(|(n, _)| n.to_string())
            .collect()
    };
    let dropped_communities = dropped(&community_totals);
    let dropped_authors = dropped(&author_totals);
    community_totals.retain(|_, c| *c >= params.min_count);
    author_totals.retain(|_, c| *c >= params.min_count);

    let community_ids: BTreeMap<&str, usize> =
        community_totals.keys().enumerate().map(|(i, n)| (*n, i)).collect();
    let author_ids: BTreeMap<&str, usize> =
        author_totals.keys().enumerate().map(|(i, n)| (*n, i)).collect();
    let kept: Vec<(usize, usize, u64)> = pairs
        .iter()
        .filter_map(|p| {
            Some((
                *community_ids.get(p.community.as_str())?,
                *author_ids.get(p.author.as_str())?,
                p.count,
            ))
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::Contract(
            "no (community, author) pairs survive the min-count threshold".into(),
        ));
    }

    let d = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut input: Vec<f64> = (0..community_ids.len() * d)
        .map(|_| (rng.random::<f64>() - 0.5) / d as f64)
        .collect();
    let mut output = vec![0.0f64; author_ids.len() * d];

    let weight_err = |e| Error::Contract(format!("sampling weights: {e}"));
    let pair_sampler =
        WeightedIndex::new(kept.iter().map(|p| p.2 as f64)).map_err(weight_err)?;
    let noise = WeightedIndex::new(
        author_totals
            .values()
            .map(|&c| (c as f64).powf(params.noise_exponent)),
    )
    .map_err(weight_err)?;

    let per_epoch: u64 = kept.iter().map(|p| p.2).sum();
    let total_steps = per_epoch * params.epochs as u64;
    let floor = params.learning_rate * params.min_learning_rate_frac;
    let mut grad = vec![0.0f64; d];
    let mut step: u64 = 0;
    for _ in 0..params.epochs {
        for _ in 0..per_epoch {
            let lr = (params.learning_rate * (1.0 - step as f64 / total_steps as f64)).max(floor);
            step += 1;
            let (c, a, _) = kept[pair_sampler.sample(&mut rng)];
            let v = &mut input[c * d..(c + 1) * d];
            grad.iter_mut().for_each(|g| *g = 0.0);
            for k in 0..=params.negatives {
                let (target, label) = if k == 0 {
                    (a, 1.0)
                } else {
                    let t = noise.sample(&mut rng);
                    if t == a {
                        continue;
                    }
                    (t, 0.0)
                };
                let u = &mut output[target * d..(target + 1) * d];
                let g = (label - sigmoid(dot(v, u))) * lr;
                for i in 0..d {
                    grad[i] += g * u[i];
                    u[i] += g * v[i];
                }
            }
            for (x, g) in v.iter_mut().zip(&grad) {
                *x += g;
            }
        }
    }

    let mut embedding = EmbeddingMatrix::new(d);
    for (name, &i) in &community_ids {
        embedding.push(*name, &input[i * d..(i + 1) * d])?;
    }
    Ok(TrainOutcome {
        embedding,
        dropped_communities,
        dropped_authors,
    })
}
