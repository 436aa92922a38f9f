//! Synthetic pool generation: response tables with controlled
//! per-provider quality means (optionally structured into per-query
//! winner clusters) plus parametric latency models derived from
//! per-provider idle medians.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_distr::{Beta, Distribution};

use crate::domain::{
    FeatureSourceSpec, LatencyStateSpec, PoolConfig, ProviderLatency, ProviderSpec, ResponseTable,
};
use crate::rng;

/// Marginal quality distribution of table cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QualityKind {
    /// 0/1 qualities with an exact count of successes per column (and
    /// per cluster block), so column means match the spec to 1/(2n).
    Bernoulli,
    /// Beta-distributed qualities at the requested mean; higher
    /// concentration means tighter spread.
    Beta { concentration: f64 },
}

/// Specification of a synthetic pool.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPoolSpec {
    /// Provider names; defaults to p0, p1, ... when empty.
    pub provider_names: Vec<String>,
    /// Per-provider mean quality (pool size = length).
    pub means: Vec<f64>,
    /// Optional per-cluster overrides: `cluster_means[c][i]` is provider
    /// i's mean on cluster c. Queries are assigned round-robin to
    /// clusters, features become cluster one-hots, and `means` is ignored.
    pub cluster_means: Option<Vec<Vec<f64>>>,
    pub queries: usize,
    pub quality: QualityKind,
    /// Idle median latency per provider (ms).
    pub latency_medians_ms: Vec<f64>,
    /// p95 = ratio * median within each state.
    pub latency_p95_ratio: f64,
    /// Moderate / stressed medians as multiples of idle.
    pub moderate_factor: f64,
    pub stressed_factor: f64,
    pub seed: u64,
}

impl Default for SynthPoolSpec {
    fn default() -> Self {
        SynthPoolSpec {
            provider_names: Vec::new(),
            means: vec![0.6, 0.5],
            cluster_means: None,
            queries: 1000,
            quality: QualityKind::Bernoulli,
            latency_medians_ms: vec![300.0, 300.0],
            latency_p95_ratio: 1.6,
            moderate_factor: 1.5,
            stressed_factor: 4.0,
            seed: 0,
        }
    }
}

/// Builds the pool config and response table for a synthetic spec.
pub fn make_synthetic_pool(spec: &SynthPoolSpec) -> (PoolConfig, ResponseTable) {
    let k = spec.means.len();
    assert!(k >= 1, "pool must have at least one provider");
    assert!(spec.queries >= 1, "need at least one query");
    assert_eq!(
        spec.latency_medians_ms.len(),
        k,
        "one idle median per provider"
    );
    if let Some(cm) = &spec.cluster_means {
        assert!(!cm.is_empty(), "cluster_means must not be empty");
        assert!(
            cm.iter().all(|row| row.len() == k),
            "each cluster row needs one mean per provider"
        );
    }
    let names: Vec<String> = if spec.provider_names.is_empty() {
        (0..k).map(|i| format!("p{i}")).collect()
    } else {
        assert_eq!(spec.provider_names.len(), k, "one name per provider");
        spec.provider_names.clone()
    };

    let query_ids: Vec<String> = (0..spec.queries).map(|i| format!("q{i:05}")).collect();
    let clusters = spec.cluster_means.as_ref().map(|cm| cm.len()).unwrap_or(1);
    let assignment: Vec<usize> = (0..spec.queries).map(|i| i % clusters).collect();

    let mut rng = rng::stream(spec.seed, rng::TAG_SYNTH_POOL);
    let mut rows: BTreeMap<String, Vec<f64>> = query_ids
        .iter()
        .map(|q| (q.clone(), vec![0.0; k]))
        .collect();

    for cluster in 0..clusters {
        let members: Vec<usize> = (0..spec.queries).filter(|&i| assignment[i] == cluster).collect();
        for provider in 0..k {
            let mean = match &spec.cluster_means {
                Some(cm) => cm[cluster][provider],
                None => spec.means[provider],
            };
            assert!((0.0..=1.0).contains(&mean), "means must lie in [0, 1]");
            let values = column_values(spec.quality, mean, members.len(), &mut rng);
            for (slot, &query_index) in members.iter().enumerate() {
                rows.get_mut(&query_ids[query_index]).unwrap()[provider] = values[slot];
            }
        }
    }

    let latency_models: BTreeMap<String, ProviderLatency> = names
        .iter()
        .zip(&spec.latency_medians_ms)
        .map(|(name, &median)| {
            let state = |m: f64| LatencyStateSpec::Parametric {
                median_ms: m,
                p95_ms: m * spec.latency_p95_ratio,
            };
            (
                name.clone(),
                ProviderLatency {
                    idle: state(median),
                    moderate: state(median * spec.moderate_factor),
                    stressed: state(median * spec.stressed_factor),
                },
            )
        })
        .collect();

    let feature_source = if spec.cluster_means.is_some() {
        FeatureSourceSpec::ClusterOnehot {
            assignments: query_ids
                .iter()
                .enumerate()
                .map(|(i, q)| (q.clone(), assignment[i]))
                .collect(),
        }
    } else {
        FeatureSourceSpec::HashedText
    };
    let feature_dim = if spec.cluster_means.is_some() {
        clusters
    } else {
        32
    };

    let config = PoolConfig {
        providers: names
            .iter()
            .map(|name| ProviderSpec {
                name: name.clone(),
                cost: None,
            })
            .collect(),
        feature_dim,
        router_params: Default::default(),
        additive_params: Default::default(),
        latency_models,
        load_schedule: Default::default(),
        response_table: "table.csv".into(),
        query_stream: Default::default(),
        feature_source,
        judge: Default::default(),
        cooldown: Default::default(),
        policy_params: Default::default(),
        sla_ms: 1500.0,
    }
    .normalized();

    let table = ResponseTable::from_rows(rows, None);
    (config, table)
}

fn column_values(
    kind: QualityKind,
    mean: f64,
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<f64> {
    match kind {
        QualityKind::Bernoulli => {
            let ones = (mean * n as f64).round() as usize;
            let mut values = vec![0.0; n];
            values[..ones.min(n)].fill(1.0);
            values.shuffle(rng);
            values
        }
        QualityKind::Beta { concentration } => {
            assert!(concentration > 0.0, "concentration must be positive");
            if mean <= 0.0 || mean >= 1.0 {
                return vec![mean; n];
            }
            let dist = Beta::new(mean * concentration, (1.0 - mean) * concentration)
                .expect("valid Beta parameters");
            (0..n).map(|_| dist.sample(rng)).collect()
        }
    }
}
