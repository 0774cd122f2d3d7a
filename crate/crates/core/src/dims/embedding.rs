use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::fmt::fmt_float;

/// Dense community vectors, one row per community.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    names: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize) -> Self {
        EmbeddingMatrix {
            dim,
            names: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut m = EmbeddingMatrix::new(dim);
        for (name, v) in rows {
            m.push(name, &v)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, name: impl Into<String>, vector: &[f64]) -> Result<()> {
        let name = name.into();
        if vector.len() != self.dim {
            return Err(Error::Contract(format!(
                "vector for `{name}` has length {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if self.index.contains_key(&name) {
            return Err(Error::Contract(format!("duplicate community `{name}`")));
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        let name = name.strip_prefix("r/").unwrap_or(name);
        self.index.get(name).map(|&i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.names.iter().enumerate().map(|(i, n)| (n.as_str(), self.row(i)))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        Some(cosine(self.get(a)?, self.get(b)?))
    }

    /// Communities most similar to `name` by cosine, best first.
    pub fn nearest(&self, name: &str, k: usize) -> Vec<(String, f64)> {
        let Some(q) = self.get(name) else {
            return Vec::new();
        };
        let mut sims: Vec<(String, f64)> = self
            .iter()
            .filter(|(n, _)| *n != name)
            .map(|(n, v)| (n.to_string(), cosine(q, v)))
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        sims.truncate(k);
        sims
    }

    /// Text vector format: a `<N> <d>` header, then `name v1 … vd` per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<embedding>", e);
        writeln!(w, "{} {}", self.len(), self.dim).map_err(io)?;
        for (name, v) in self.iter() {
            write!(w, "{name}").map_err(io)?;
            for x in v {
                write!(w, " {}", fmt_float(*x)).map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::parse(format!("embedding line {line}"), msg);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse("embedding", "missing header"))?;
        let header = header.map_err(|e| Error::io("<embedding>", e))?;
        let mut parts = header.split_whitespace();
        let (Some(n), Some(d), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(1, format!("header `{header}` is not `<N> <d>`")));
        };
        let n: usize = n.parse().map_err(|e| bad(1, format!("{e}")))?;
        let dim: usize = d.parse().map_err(|e| bad(1, format!("{e}")))?;
        let mut m = EmbeddingMatrix::new(dim);
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io("<embedding>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let name = fields.next().expect("non-empty line");
            let v: Vec<f64> = fields
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(i + 1, format!("{e}")))?;
            m.push(name, &v).map_err(|e| bad(i + 1, e.to_string()))?;
        }
        if m.len() != n {
            return Err(Error::parse(
                "embedding",
                format!("header announces {n} communities, found {}", m.len()),
            ));
        }
        Ok(m)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit vector along `a`, or `None` for the zero vector.
pub fn normalize(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| a.iter().map(|x| x / n).collect())
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        dot(a, b) / d
    }
}
