use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::embedding::{dot, normalize, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::facet::DimensionFacet;
use crate::fmt::fmt_float;

/// Seed pairs are `(negative pole, positive pole)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    pub seed_pairs: Vec<(String, String)>,
}

impl DimensionSpec {
    pub fn new<S: Into<String>>(name: impl Into<String>, pairs: impl IntoIterator<Item = (S, S)>) -> Self {
        DimensionSpec {
            name: name.into(),
            seed_pairs: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
        }
    }

    /// Same dimension with every pair flipped.
    pub fn reversed(&self) -> Self {
        DimensionSpec {
            name: self.name.clone(),
            seed_pairs: self.seed_pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }
}

/// A unit direction in embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub name: String,
    pub direction: Vec<f64>,
}

/// Mean of the normalized seed-pair differences, normalized again.
pub fn build_dimension(embedding: &EmbeddingMatrix, spec: &DimensionSpec) -> Result<Dimension> {
    if spec.seed_pairs.is_empty() {
        return Err(Error::Config(format!("dimension `{}` has no seed pairs", spec.name)));
    }
    let lookup = |name: &str| {
        embedding
            .get(name)
            .ok_or_else(|| Error::MissingCommunity(name.to_string()))
    };
    let degenerate = || Error::DegenerateDimension(spec.name.clone());
    let mut sum = vec![0.0; embedding.dim()];
    for (neg, pos) in &spec.seed_pairs {
        let (n, p) = (lookup(neg)?, lookup(pos)?);
        let diff: Vec<f64> = p.iter().zip(n).map(|(a, b)| a - b).collect();
        let unit = normalize(&diff).ok_or_else(degenerate)?;
        sum.iter_mut().zip(&unit).for_each(|(s, u)| *s += u);
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / spec.seed_pairs.len() as f64).collect();
    // antipodal pairs leave only rounding noise behind
    if mean.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-12 {
        return Err(degenerate());
    }
    Ok(Dimension {
        name: spec.name.clone(),
        direction: normalize(&mean).ok_or_else(degenerate)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityScore {
    pub community: String,
    pub raw: f64,
    pub percentile: f64,
    pub bin: u8,
}

/// Quintile of a percentile: `floor(p / 20)`, with 100 folded into bin 4.
pub fn bin_for_percentile(percentile: f64) -> u8 {
    ((percentile / 20.0).floor() as i64).clamp(0, 4) as u8
}

/// Projects every normalized community vector onto the dimension and ranks
/// the projections. Percentile = rank / (N − 1) · 100, ties broken by name.
/// Output follows ascending rank.
pub fn score_communities(embedding: &EmbeddingMatrix, dimension: &Dimension) -> Result<Vec<CommunityScore>> {
    let n = embedding.len();
    if n < 2 {
        return Err(Error::Contract(format!(
            "percentiles need at least 2 communities, embedding has {n}"
        )));
    }
    if dimension.direction.len() != embedding.dim() {
        return Err(Error::Contract("dimension and embedding sizes differ".into()));
    }
    let unit_len = dot(&dimension.direction, &dimension.direction).sqrt();
    if (unit_len - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!("dimension `{}` is not unit length", dimension.name)));
    }
    let mut raw: Vec<(&str, f64)> = embedding
        .iter()
        .map(|(name, v)| {
            let proj = normalize(v).map_or(0.0, |u| dot(&u, &dimension.direction));
            (name, proj)
        })
        .collect();
    raw.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let denom = (n - 1) as f64;
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(rank, (name, r))| {
            let percentile = (rank as f64 * 100.0) / denom;
            CommunityScore {
                community: name.to_string(),
                raw: r,
                percentile,
                bin: bin_for_percentile(percentile),
            }
        })
        .collect())
}

/// Display labels for the five bins of a dimension.
pub fn bin_labels(dimension: &str) -> [String; 5] {
    let names: [&str; 5] = match dimension {
        "partisan" => ["left-wing", "center-left", "center", "center-right", "right-wing"],
        "age" => ["youngest", "younger", "middle-age", "older", "oldest"],
        "gender" => ["most-masculine", "masculine", "neutral", "feminine", "most-feminine"],
        "affluence" => ["least-affluent", "less-affluent", "middle", "more-affluent", "most-affluent"],
        _ => ["0-20", "20-40", "40-60", "60-80", "80-100"],
    };
    names.map(str::to_string)
}

/// Community-to-bin facet. Communities without a score fall into `Unknown`.
pub fn bin_facet(scores: &[CommunityScore], dimension: &str) -> DimensionFacet {
    DimensionFacet {
        name: dimension.to_string(),
        bins: scores.iter().map(|s| (s.community.clone(), s.bin)).collect::<HashMap<_, _>>(),
        labels: bin_labels(dimension),
    }
}

/// CSV with header `community,raw,percentile,bin`.
pub fn write_scores_csv<W: Write>(scores: &[CommunityScore], writer: W) -> Result<()> {
    let err = |e: csv::Error| Error::parse("scores csv", e);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["community", "raw", "percentile", "bin"]).map_err(err)?;
    for s in scores {
        w.write_record([
            s.community.clone(),
            fmt_float(s.raw),
            fmt_float(s.percentile),
            s.bin.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::parse("scores csv", e))?;
    Ok(())
}

pub fn read_scores_csv<R: Read>(reader: R) -> Result<Vec<CommunityScore>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(|e| Error::parse("scores csv", e)))
        .collect()
}
