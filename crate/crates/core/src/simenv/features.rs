//! Query feature sources.
//!
//! `HashedText` needs no side data: tokens and their character trigrams
//! hash into d-1 signed slots (FNV-1a, stable across platforms), slot 0
//! is a constant bias so constant targets stay learnable, and the vector
//! is L2-normalized. `File` serves vectors loaded from disk verbatim.
//! `ClusterOnehot` encodes a per-query cluster index.

use std::collections::BTreeMap;

use crate::domain::FeatureSourceSpec;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSource {
    HashedText { dim: usize },
    Table { map: BTreeMap<String, Vec<f64>> },
    ClusterOnehot { assignments: BTreeMap<String, usize>, dim: usize },
}

impl FeatureSource {
    /// Resolves a spec; `loaded_file` must be supplied (by the pool
    /// loader) exactly when the spec is file-backed.
    pub fn from_spec(
        spec: &FeatureSourceSpec,
        dim: usize,
        loaded_file: Option<BTreeMap<String, Vec<f64>>>,
    ) -> Self {
        match spec {
            FeatureSourceSpec::HashedText => FeatureSource::HashedText { dim },
            FeatureSourceSpec::File { .. } => FeatureSource::Table {
                map: loaded_file.expect("file-backed feature source needs loaded vectors"),
            },
            FeatureSourceSpec::ClusterOnehot { assignments } => FeatureSource::ClusterOnehot {
                assignments: assignments.clone(),
                dim,
            },
        }
    }

    /// Feature vector for a query. Hashing uses the text when present,
    /// else the id. Map-backed sources error on unknown queries.
    pub fn features(&self, query_id: &str, text: Option<&str>) -> Result<Vec<f64>, Error> {
        match self {
            FeatureSource::HashedText { dim } => {
                Ok(hashed_features(text.unwrap_or(query_id), *dim))
            }
            FeatureSource::Table { map } => map.get(query_id).cloned().ok_or_else(|| {
                Error::InvalidRequest(format!("no feature vector for query '{query_id}'"))
            }),
            FeatureSource::ClusterOnehot { assignments, dim } => {
                let cluster = *assignments.get(query_id).ok_or_else(|| {
                    Error::InvalidRequest(format!("no cluster assignment for query '{query_id}'"))
                })?;
                assert!(cluster < *dim, "cluster index validated against dim");
                let mut v = vec![0.0; *dim];
                v[cluster] = 1.0;
                Ok(v)
            }
        }
    }
}

/// Deterministic signed feature hashing with a constant bias slot.
pub fn hashed_features(text: &str, dim: usize) -> Vec<f64> {
    assert!(dim >= 1, "dim must be at least 1");
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    if dim > 1 {
        let slots = (dim - 1) as u64;
        let mut add = |bytes: &[u8]| {
            let h = fnv1a(bytes);
            let slot = 1 + (h % slots) as usize;
            let sign = if (h >> 32) & 1 == 0 { 1.0 } else { -1.0 };
            v[slot] += sign;
        };
        for token in text.split_whitespace() {
            add(token.as_bytes());
            let chars: Vec<char> = token.chars().collect();
            for window in chars.windows(3) {
                let tri: String = window.iter().collect();
                add(tri.as_bytes());
            }
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
