//! Synthetic and file-backed input datasets.

use std::collections::BTreeSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_stream, RngStream};

/// Run index reserved for dataset generation, so data streams never
/// coincide with the per-user perturbation streams of run `0..runs`.
pub const DATASET_RUN: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Dirichlet { seed: u64 },
    RoundRobin,
    Csv { path: PathBuf, column: String },
}

/// User values, 0-based categories in `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub values: Vec<usize>,
    pub k: usize,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Empirical frequency of each category.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut counts = vec![0u64; self.k];
        for &v in &self.values {
            counts[v] += 1;
        }
        let n = self.values.len() as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }

    /// Values as 1-based category labels.
    pub fn one_based(&self) -> Vec<usize> {
        self.values.iter().map(|v| v + 1).collect()
    }
}

/// Flat Dirichlet draw: independent unit exponentials, normalised.
pub fn sample_dirichlet_weights(k: usize, rng: &mut RngStream) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| -rng.open01().ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn check_sizes(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::range("k", ">= 1", 0));
    }
    if n == 0 {
        return Err(Error::range("n", ">= 1", 0));
    }
    Ok(())
}

/// Draws one frequency vector from the flat Dirichlet, then `n` i.i.d.
/// categories from it. Returns the dataset and the drawn vector.
pub fn gen_dirichlet_with_weights(k: usize, n: usize, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    check_sizes(k, n)?;
    let mut rng = derive_stream(seed, DATASET_RUN, 0);
    let weights = sample_dirichlet_weights(k, &mut rng);
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::range("weights", "a valid weight vector", e))?;
    let values = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let data = Dataset {
        values,
        k,
        provenance: Provenance::Dirichlet { seed },
    };
    Ok((data, weights))
}

pub fn gen_dirichlet(k: usize, n: usize, seed: u64) -> Result<Dataset> {
    gen_dirichlet_with_weights(k, n, seed).map(|(d, _)| d)
}

/// User `u` holds category `u mod k`, so frequencies are as uniform as `n` allows.
pub fn gen_round_robin(k: usize, n: usize) -> Result<Dataset> {
    check_sizes(k, n)?;
    Ok(Dataset {
        values: (0..n).map(|u| u % k).collect(),
        k,
        provenance: Provenance::RoundRobin,
    })
}

/// How raw column values become categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    /// Integers in `lo..=hi` map to `v - lo`; rows outside are dropped.
    Range { lo: i64, hi: i64 },
    /// Sorted distinct values, indexed in order.
    Categorical,
}

/// Loads one column of a headed CSV file.
pub fn load_csv_column(path: &Path, column: &str, domain: &DomainSpec) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let idx = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;

    let mut raw = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = record.get(idx).unwrap_or("").to_string();
        raw.push((line, cell));
    }

    let provenance = Provenance::Csv {
        path: path.to_path_buf(),
        column: column.to_string(),
    };
    let (values, k, rejected) = match *domain {
        DomainSpec::Range { lo, hi } => {
            if hi < lo {
                return Err(Error::range("domain", "lo <= hi", format!("{lo}..{hi}")));
            }
            let mut values = Vec::with_capacity(raw.len());
            let mut rejected = 0;
            for (line, cell) in raw {
                let v: i64 = cell.parse().map_err(|_| Error::UnparsableRow { line, value: cell.clone() })?;
                if (lo..=hi).contains(&v) {
                    values.push((v - lo) as usize);
                } else {
                    rejected += 1;
                }
            }
            (values, (hi - lo + 1) as usize, rejected)
        }
        DomainSpec::Categorical => {
            let distinct: Vec<&String> = raw.iter().map(|(_, c)| c).collect::<BTreeSet<_>>().into_iter().collect();
            let values = raw
                .iter()
                .map(|(_, c)| distinct.binary_search(&c).expect("value is in its own distinct set"))
                .collect();
            (values, distinct.len(), 0)
        }
    };
    if values.is_empty() {
        return Err(Error::EmptyAfterFiltering { rejected });
    }
    Ok(Dataset { values, k, provenance })
}
