//! Pool configuration schema, canonical serialization, and hashing.
//!
//! A pool config is a single JSON document. Every section except
//! `providers` has defaults, so a minimal config is just a provider list,
//! latency models, and a response-table path. Cross-field defaults
//! (additive latency cap, cooldown priority order) are filled by
//! [`PoolConfig::normalized`]; loaders apply it, so a loaded config always
//! serializes with all fields explicit. That canonical form is what the
//! config hash covers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AdditiveParams, RouterParams};
use crate::Error;

/// One provider in the pool. Index = position in the list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderSpec {
    pub name: String,
    /// Optional per-call cost, used only as an oracle tie-break.
    #[serde(default)]
    pub cost: Option<f64>,
}

/// Latency model of one provider: one distribution per load state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderLatency {
    pub idle: LatencyStateSpec,
    pub moderate: LatencyStateSpec,
    pub stressed: LatencyStateSpec,
}

/// Latency distribution under one load state: either a two-quantile
/// parametric form (lognormal fitted to median and p95) or an empirical
/// pool resampled uniformly with replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatencyStateSpec {
    Parametric { median_ms: f64, p95_ms: f64 },
    Empirical { pool: Vec<f64> },
}

/// Load dynamics over an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadScheduleSpec {
    pub pattern: LoadPattern,
    /// Provider targeted by `step` and `gradual`.
    pub target: usize,
    /// Per-provider, per-round probability of entering a stress burst (`spike`).
    pub p_spike: f64,
    /// Burst length in rounds (`spike`).
    pub burst: usize,
}

impl Default for LoadScheduleSpec {
    fn default() -> Self {
        LoadScheduleSpec {
            pattern: LoadPattern::Stationary,
            target: 0,
            p_spike: 0.05,
            burst: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadPattern {
    Stationary,
    Step,
    Rotation,
    Spike,
    Gradual,
}

impl LoadPattern {
    pub const ALL: [LoadPattern; 5] = [
        LoadPattern::Stationary,
        LoadPattern::Step,
        LoadPattern::Rotation,
        LoadPattern::Spike,
        LoadPattern::Gradual,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LoadPattern::Stationary => "stationary",
            LoadPattern::Step => "step",
            LoadPattern::Rotation => "rotation",
            LoadPattern::Spike => "spike",
            LoadPattern::Gradual => "gradual",
        }
    }

    pub fn parse(name: &str) -> Option<LoadPattern> {
        LoadPattern::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// How queries are drawn each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum QueryStreamSpec {
    /// Uniform with replacement from the response table's query set.
    Uniform,
    /// A fixed ordered list; must cover at least the episode length.
    Fixed { ids: Vec<String> },
}

impl Default for QueryStreamSpec {
    fn default() -> Self {
        QueryStreamSpec::Uniform
    }
}

/// Where query feature vectors come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FeatureSourceSpec {
    /// Deterministic token hashing of the query text (or id) into
    /// `feature_dim` slots, with a constant bias component.
    HashedText,
    /// Delimited file: query_id followed by `feature_dim` reals.
    File { path: String },
    /// One-hot cluster encoding; `assignments` maps query id to cluster.
    ClusterOnehot { assignments: BTreeMap<String, usize> },
}

impl Default for FeatureSourceSpec {
    fn default() -> Self {
        FeatureSourceSpec::HashedText
    }
}

/// Judge feedback channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum JudgeSpec {
    /// Router sees the true table quality.
    Oracle,
    /// True quality plus clipped Gaussian noise.
    GaussianNoise { sigma: f64 },
    /// Noise, then snap to the nearest of `levels` even grid points in [0, 1].
    Quantized { sigma: f64, levels: usize },
}

impl Default for JudgeSpec {
    fn default() -> Self {
        JudgeSpec::Oracle
    }
}

/// Reactive cooldown baseline parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CooldownParams {
    /// Preference order; defaults to pool index order when omitted.
    pub priority: Option<Vec<usize>>,
    pub trip_threshold_ms: f64,
    pub cooldown_rounds: u32,
}

impl Default for CooldownParams {
    fn default() -> Self {
        CooldownParams {
            priority: None,
            trip_threshold_ms: 3000.0,
            cooldown_rounds: 10,
        }
    }
}

impl CooldownParams {
    pub fn priority(&self) -> &[usize] {
        self.priority
            .as_deref()
            .expect("CooldownParams.priority resolved during normalization")
    }
}

/// Quality averaging used by the non-contextual rate-scored variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QualityAveraging {
    Window,
    Ema,
}

/// Knobs for individual baseline policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyParams {
    /// Base exploration rate of the epsilon-greedy baseline (decays as 1/sqrt(t)).
    pub epsilon: f64,
    /// Provider pinned by `static` when no index suffix is given.
    pub static_index: usize,
    /// Latency budget for the quality oracle's eligibility filter.
    pub slo_ms: f64,
    /// Oracle filter uses the current load state when true, idle otherwise.
    pub oracle_load_aware: bool,
    pub lqm_only_quality: QualityAveraging,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            epsilon: 0.05,
            static_index: 0,
            slo_ms: 1065.0,
            oracle_load_aware: true,
            lqm_only_quality: QualityAveraging::Window,
        }
    }
}

/// Full pool configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub providers: Vec<ProviderSpec>,
    #[serde(default = "default_feature_dim")]
    pub feature_dim: usize,
    #[serde(default)]
    pub router_params: RouterParams,
    #[serde(default)]
    pub additive_params: AdditiveParams,
    /// Latency model per provider name; every provider needs an entry.
    pub latency_models: BTreeMap<String, ProviderLatency>,
    #[serde(default)]
    pub load_schedule: LoadScheduleSpec,
    /// Path to the response-table file, relative to the config file.
    #[serde(default)]
    pub response_table: String,
    #[serde(default)]
    pub query_stream: QueryStreamSpec,
    #[serde(default)]
    pub feature_source: FeatureSourceSpec,
    #[serde(default)]
    pub judge: JudgeSpec,
    #[serde(default)]
    pub cooldown: CooldownParams,
    #[serde(default)]
    pub policy_params: PolicyParams,
    #[serde(default = "default_sla_ms")]
    pub sla_ms: f64,
}

fn default_feature_dim() -> usize {
    32
}

fn default_sla_ms() -> f64 {
    1500.0
}

impl PoolConfig {
    /// Fills cross-field defaults: additive latency cap from l_ref, and
    /// cooldown priority from pool index order. Idempotent.
    pub fn normalized(mut self) -> Self {
        if self.additive_params.latency_cap_ms.is_none() {
            self.additive_params.latency_cap_ms = Some(self.router_params.l_ref_ms);
        }
        if self.cooldown.priority.is_none() {
            self.cooldown.priority = Some((0..self.providers.len()).collect());
        }
        self
    }

    pub fn provider_index(&self, name: &str) -> Option<usize> {
        self.providers.iter().position(|p| p.name == name)
    }

    pub fn provider_names(&self) -> Vec<String> {
        self.providers.iter().map(|p| p.name.clone()).collect()
    }

    pub fn num_providers(&self) -> usize {
        self.providers.len()
    }

    /// Costs for oracle tie-breaks: `None` when no provider declares one,
    /// otherwise a dense vector with 0 for undeclared entries.
    pub fn cost_vector(&self) -> Option<Vec<f64>> {
        if self.providers.iter().all(|p| p.cost.is_none()) {
            return None;
        }
        Some(
            self.providers
                .iter()
                .map(|p| p.cost.unwrap_or(0.0))
                .collect(),
        )
    }

    /// Canonical JSON form: normalized, fixed field order, two-space
    /// indentation. Parsing this and re-serializing is byte-identical.
    pub fn canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    /// Hex SHA-256 of the canonical JSON; embedded in result headers.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, Error> {
        let config: PoolConfig =
            serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
        Ok(config.normalized())
    }

    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn write_to_path(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.canonical_json())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }
}
