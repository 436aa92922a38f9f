//! Shared value types: provider identities, per-round records, parameter
//! bundles, the response table, and pool configuration.
//!
//! Everything here is plain data. Behavior (sampling, scoring, policy
//! state) lives in the sibling modules; they all consume these types.

mod config;
mod validate;

pub use config::*;
pub use validate::{validate_pool_config, ConfigViolation};

use serde::{Deserialize, Serialize};

/// Provider identity: stable index into the pool plus display name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderId {
    pub index: usize,
    pub name: String,
}

/// One routable query: id, feature vector of the pool's dimension, and
/// optional raw text (used by the hashing feature source when present).
#[derive(Debug, Clone, PartialEq)]
pub struct QueryContext {
    pub query_id: String,
    pub features: Vec<f64>,
    pub text: Option<String>,
}

/// Feedback for one routed call. `quality` is the judge-visible score in
/// [0, 1]; the environment's true quality is tracked separately in traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub provider: usize,
    pub latency_ms: f64,
    pub quality: f64,
    pub round: u64,
}

/// One routing decision. `per_provider_scores[i]` is the score the policy
/// assigned to provider i this round (`-inf` for inactive providers);
/// `chosen` always indexes an active provider.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingDecision {
    pub round: u64,
    pub chosen: usize,
    pub per_provider_scores: Vec<f64>,
    pub active_mask: Vec<bool>,
}

/// Parameters of the rate-scored router family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouterParams {
    /// Reference latency (ms) that normalizes round-trip time in scores.
    pub l_ref_ms: f64,
    /// Width multiplier on the contextual confidence bonus.
    pub alpha_ucb: f64,
    /// Width multiplier on the count-based bonus of the non-contextual variant.
    pub beta: f64,
    /// Gap-deflation strength; 0 disables deflation.
    pub lambda_defl: f64,
    /// Ridge regularizer of the per-provider regression heads.
    pub ridge: f64,
    /// EMA step for latency tracking.
    pub ema_rho: f64,
    /// Sliding-window capacity for regression heads and scalar stats.
    pub window: usize,
    /// Latency estimate used before the first observation of a provider.
    pub tau_init_ms: f64,
}

impl Default for RouterParams {
    fn default() -> Self {
        RouterParams {
            l_ref_ms: 1500.0,
            alpha_ucb: 0.5,
            beta: 0.5,
            lambda_defl: 1.0,
            ridge: 1.0,
            ema_rho: 0.2,
            window: 50,
            tau_init_ms: 0.0,
        }
    }
}

/// Parameters of the additive composite reward used by the non-rate
/// baselines: r = alpha * u - (1 - alpha) * min(tau / cap, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdditiveParams {
    pub alpha: f64,
    /// Latency normalization cap (ms); defaults to the router's l_ref_ms
    /// when omitted, filled in by [`PoolConfig::normalized`].
    pub latency_cap_ms: Option<f64>,
}

impl Default for AdditiveParams {
    fn default() -> Self {
        AdditiveParams {
            alpha: 0.5,
            latency_cap_ms: Some(1500.0),
        }
    }
}

impl AdditiveParams {
    /// Resolved cap; configs are normalized before use.
    pub fn cap_ms(&self) -> f64 {
        self.latency_cap_ms
            .expect("AdditiveParams.latency_cap_ms resolved during normalization")
    }
}

/// Raw response-table records as read from a table file: one judged
/// quality per (query, provider-name) pair, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub records: Vec<TableRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRecord {
    pub query_id: String,
    pub provider: String,
    pub quality: f64,
}

/// Resolved response table: per query, one quality per pool index.
///
/// Query order is the sorted id order; `index` maps id to row. Costs are
/// carried here (copied from the provider specs) so per-call cost
/// tie-breaks need no extra plumbing.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTable {
    queries: Vec<String>,
    index: std::collections::BTreeMap<String, usize>,
    values: Vec<Vec<f64>>,
    costs: Option<Vec<f64>>,
}

impl ResponseTable {
    /// Builds a table from per-query quality rows. Row length must match
    /// the pool size; callers validate first.
    pub fn from_rows(
        rows: impl IntoIterator<Item = (String, Vec<f64>)>,
        costs: Option<Vec<f64>>,
    ) -> Self {
        let mut sorted: Vec<(String, Vec<f64>)> = rows.into_iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut queries = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut index = std::collections::BTreeMap::new();
        for (row, (query, qualities)) in sorted.into_iter().enumerate() {
            index.insert(query.clone(), row);
            queries.push(query);
            values.push(qualities);
        }
        ResponseTable {
            queries,
            index,
            values,
            costs,
        }
    }

    /// Resolves raw records against a pool. Assumes a clean validation
    /// pass; unknown providers or missing cells panic here.
    pub fn resolve(config: &PoolConfig, raw: &RawTable) -> Self {
        let k = config.providers.len();
        let mut rows: std::collections::BTreeMap<String, Vec<f64>> =
            std::collections::BTreeMap::new();
        for record in &raw.records {
            let provider = config
                .provider_index(&record.provider)
                .unwrap_or_else(|| panic!("unresolved provider '{}'", record.provider));
            let row = rows
                .entry(record.query_id.clone())
                .or_insert_with(|| vec![f64::NAN; k]);
            row[provider] = record.quality;
        }
        for (query, row) in &rows {
            assert!(
                row.iter().all(|q| q.is_finite()),
                "query '{query}' is missing a quality for some provider"
            );
        }
        ResponseTable::from_rows(rows, config.cost_vector())
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn num_providers(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn query_ids(&self) -> &[String] {
        &self.queries
    }

    pub fn contains(&self, query_id: &str) -> bool {
        self.index.contains_key(query_id)
    }

    /// Quality row for a query, one entry per provider.
    pub fn qualities(&self, query_id: &str) -> Option<&[f64]> {
        self.index
            .get(query_id)
            .map(|&row| self.values[row].as_slice())
    }

    pub fn costs(&self) -> Option<&[f64]> {
        self.costs.as_deref()
    }

    /// Per-provider mean quality over all queries.
    pub fn column_means(&self) -> Vec<f64> {
        let k = self.num_providers();
        let mut sums = vec![0.0; k];
        for row in &self.values {
            for (s, q) in sums.iter_mut().zip(row) {
                *s += q;
            }
        }
        let n = self.values.len().max(1) as f64;
        sums.iter_mut().for_each(|s| *s /= n);
        sums
    }

    /// Index of the provider with the lowest mean quality (ties: lowest index).
    pub fn weak_arm(&self) -> usize {
        let means = self.column_means();
        let mut best = 0;
        for (i, m) in means.iter().enumerate().skip(1) {
            if *m < means[best] {
                best = i;
            }
        }
        best
    }

    /// Gap between the best and second-best quality for a query.
    pub fn top2_gap(&self, query_id: &str) -> Option<f64> {
        let row = self.qualities(query_id)?;
        if row.len() < 2 {
            return Some(0.0);
        }
        let mut top = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &q in row {
            if q > top {
                second = top;
                top = q;
            } else if q > second {
                second = q;
            }
        }
        Some(top - second)
    }

    /// Flattens back to raw records (sorted by query, provider index).
    pub fn to_raw(&self, provider_names: &[String]) -> RawTable {
        let mut records = Vec::with_capacity(self.queries.len() * self.num_providers());
        for (query, row) in self.queries.iter().zip(&self.values) {
            for (provider, &quality) in provider_names.iter().zip(row) {
                records.push(TableRecord {
                    query_id: query.clone(),
                    provider: provider.clone(),
                    quality,
                });
            }
        }
        RawTable { records }
    }
}

/// Picks the argmax index among active entries; ties keep the lowest
/// index. Returns `None` when no entry is active.
pub fn argmax_active(scores: &[f64], active: &[bool]) -> Option<usize> {
    debug_assert_eq!(scores.len(), active.len());
    let mut best: Option<usize> = None;
    for (i, (&s, &a)) in scores.iter().zip(active).enumerate() {
        if !a {
            continue;
        }
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(i),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_3x2() -> ResponseTable {
        ResponseTable::from_rows(
            vec![
                ("q1".to_string(), vec![0.9, 0.1]),
                ("q2".to_string(), vec![0.4, 0.4]),
                ("q3".to_string(), vec![0.2, 0.8]),
            ],
            None,
        )
    }

    #[test]
    fn table_lookup_and_means() {
        let t = table_3x2();
        assert_eq!(t.num_queries(), 3);
        assert_eq!(t.qualities("q1"), Some(&[0.9, 0.1][..]));
        assert_eq!(t.qualities("nope"), None);
        let means = t.column_means();
        assert!((means[0] - 0.5).abs() < 1e-12);
        assert!((means[1] - 0.4333333333333333).abs() < 1e-12);
        assert_eq!(t.weak_arm(), 1);
    }

    #[test]
    fn top2_gap_covers_ties_and_spreads() {
        let t = table_3x2();
        assert!((t.top2_gap("q1").unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(t.top2_gap("q2").unwrap(), 0.0);
        assert!((t.top2_gap("q3").unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn argmax_respects_mask_and_breaks_ties_low() {
        let scores = [0.3, 0.9, 0.9, 0.1];
        assert_eq!(argmax_active(&scores, &[true; 4]), Some(1));
        assert_eq!(argmax_active(&scores, &[true, false, true, true]), Some(2));
        assert_eq!(argmax_active(&scores, &[false; 4]), None);
        let flat = [0.5, 0.5, 0.5];
        assert_eq!(argmax_active(&flat, &[true; 3]), Some(0));
    }
}
