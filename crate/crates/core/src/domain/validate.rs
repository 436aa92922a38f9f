//! Pool configuration validation.
//!
//! Collects every violation instead of stopping at the first, so a CLI
//! user sees the full repair list in one pass. An empty result is the
//! precondition for building environments and policies; numeric code
//! downstream asserts rather than re-validating.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{
    FeatureSourceSpec, JudgeSpec, LatencyStateSpec, LoadPattern, PoolConfig, QueryStreamSpec,
    RawTable,
};

/// One validation failure, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    pub field: String,
    pub message: String,
}

impl ConfigViolation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigViolation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Validates a pool config, plus the raw response table when available.
/// Returns an empty list iff all invariants hold and every referenced
/// provider / query id resolves.
pub fn validate_pool_config(config: &PoolConfig, table: Option<&RawTable>) -> Vec<ConfigViolation> {
    let mut out = Vec::new();
    let k = config.providers.len();

    check_providers(config, &mut out);
    check_router_params(config, &mut out);
    check_additive_params(config, &mut out);
    check_latency_models(config, &mut out);
    check_schedule(config, k, &mut out);
    check_policy_params(config, k, &mut out);
    check_feature_source(config, &mut out);
    check_judge(config, &mut out);
    if !(config.sla_ms.is_finite() && config.sla_ms > 0.0) {
        out.push(ConfigViolation::new("sla_ms", "must be a positive real"));
    }
    if let Some(raw) = table {
        check_table(config, raw, &mut out);
    }
    out
}

fn check_providers(config: &PoolConfig, out: &mut Vec<ConfigViolation>) {
    if config.providers.is_empty() {
        out.push(ConfigViolation::new("providers", "pool must not be empty"));
    }
    let mut seen = BTreeSet::new();
    for (i, p) in config.providers.iter().enumerate() {
        if p.name.is_empty() {
            out.push(ConfigViolation::new(
                format!("providers[{i}].name"),
                "must not be empty",
            ));
        }
        if !seen.insert(p.name.as_str()) {
            out.push(ConfigViolation::new(
                format!("providers[{i}].name"),
                format!("duplicate provider name '{}'", p.name),
            ));
        }
        if let Some(cost) = p.cost {
            if !(cost.is_finite() && cost >= 0.0) {
                out.push(ConfigViolation::new(
                    format!("providers[{i}].cost"),
                    "must be a nonnegative real",
                ));
            }
        }
    }
    if config.feature_dim == 0 {
        out.push(ConfigViolation::new("feature_dim", "must be at least 1"));
    }
}

fn check_router_params(config: &PoolConfig, out: &mut Vec<ConfigViolation>) {
    let r = &config.router_params;
    let mut req = |ok: bool, field: &str, message: &str| {
        if !ok {
            out.push(ConfigViolation::new(
                format!("router_params.{field}"),
                message,
            ));
        }
    };
    req(
        r.l_ref_ms.is_finite() && r.l_ref_ms > 0.0,
        "l_ref_ms",
        "must be a positive real",
    );
    req(
        r.alpha_ucb.is_finite() && r.alpha_ucb >= 0.0,
        "alpha_ucb",
        "must be a nonnegative real",
    );
    req(
        r.beta.is_finite() && r.beta >= 0.0,
        "beta",
        "must be a nonnegative real",
    );
    req(
        r.lambda_defl.is_finite() && r.lambda_defl >= 0.0,
        "lambda_defl",
        "must be a nonnegative real",
    );
    req(
        r.ridge.is_finite() && r.ridge > 0.0,
        "ridge",
        "must be a positive real",
    );
    req(
        r.ema_rho.is_finite() && r.ema_rho > 0.0 && r.ema_rho <= 1.0,
        "ema_rho",
        "must lie in (0, 1]",
    );
    req(r.window >= 1, "window", "must be at least 1");
    req(
        r.tau_init_ms.is_finite() && r.tau_init_ms >= 0.0,
        "tau_init_ms",
        "must be a nonnegative real",
    );
}

fn check_additive_params(config: &PoolConfig, out: &mut Vec<ConfigViolation>) {
    let a = &config.additive_params;
    if !(a.alpha.is_finite() && (0.0..=1.0).contains(&a.alpha)) {
        out.push(ConfigViolation::new(
            "additive_params.alpha",
            "must lie in [0, 1]",
        ));
    }
    if let Some(cap) = a.latency_cap_ms {
        if !(cap.is_finite() && cap > 0.0) {
            out.push(ConfigViolation::new(
                "additive_params.latency_cap_ms",
                "must be a positive real",
            ));
        }
    }
}

fn check_latency_models(config: &PoolConfig, out: &mut Vec<ConfigViolation>) {
    for p in &config.providers {
        if !config.latency_models.contains_key(&p.name) {
            out.push(ConfigViolation::new(
                format!("latency_models.{}", p.name),
                "missing latency model for provider",
            ));
        }
    }
    for (name, model) in &config.latency_models {
        if config.provider_index(name).is_none() {
            out.push(ConfigViolation::new(
                format!("latency_models.{name}"),
                "latency model references a provider not in the pool",
            ));
        }
        for (state, spec) in [
            ("idle", &model.idle),
            ("moderate", &model.moderate),
            ("stressed", &model.stressed),
        ] {
            let field = format!("latency_models.{name}.{state}");
            match spec {
                LatencyStateSpec::Parametric { median_ms, p95_ms } => {
                    if !(median_ms.is_finite() && *median_ms > 0.0) {
                        out.push(ConfigViolation::new(
                            field.clone(),
                            "median_ms must be a positive real",
                        ));
                    } else if !(p95_ms.is_finite() && p95_ms >= median_ms) {
                        out.push(ConfigViolation::new(
                            field,
                            "p95_ms must be finite and at least median_ms",
                        ));
                    }
                }
                LatencyStateSpec::Empirical { pool } => {
                    if pool.is_empty() {
                        out.push(ConfigViolation::new(field, "empirical pool must not be empty"));
                    } else if pool.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                        out.push(ConfigViolation::new(
                            field,
                            "empirical pool values must be nonnegative reals",
                        ));
                    }
                }
            }
        }
    }
}

fn check_schedule(config: &PoolConfig, k: usize, out: &mut Vec<ConfigViolation>) {
    let s = &config.load_schedule;
    if matches!(s.pattern, LoadPattern::Step | LoadPattern::Gradual) && s.target >= k {
        out.push(ConfigViolation::new(
            "load_schedule.target",
            format!("target {} out of range for a pool of {k}", s.target),
        ));
    }
    if !(s.p_spike.is_finite() && (0.0..=1.0).contains(&s.p_spike)) {
        out.push(ConfigViolation::new(
            "load_schedule.p_spike",
            "must lie in [0, 1]",
        ));
    }
    if s.burst == 0 {
        out.push(ConfigViolation::new("load_schedule.burst", "must be at least 1"));
    }
}

fn check_policy_params(config: &PoolConfig, k: usize, out: &mut Vec<ConfigViolation>) {
    let p = &config.policy_params;
    if !(p.epsilon.is_finite() && (0.0..=1.0).contains(&p.epsilon)) {
        out.push(ConfigViolation::new(
            "policy_params.epsilon",
            "must lie in [0, 1]",
        ));
    }
    if p.static_index >= k {
        out.push(ConfigViolation::new(
            "policy_params.static_index",
            format!("index {} out of range for a pool of {k}", p.static_index),
        ));
    }
    if !(p.slo_ms.is_finite() && p.slo_ms > 0.0) {
        out.push(ConfigViolation::new(
            "policy_params.slo_ms",
            "must be a positive real",
        ));
    }

    let c = &config.cooldown;
    if !(c.trip_threshold_ms.is_finite() && c.trip_threshold_ms > 0.0) {
        out.push(ConfigViolation::new(
            "cooldown.trip_threshold_ms",
            "must be a positive real",
        ));
    }
    if c.cooldown_rounds == 0 {
        out.push(ConfigViolation::new(
            "cooldown.cooldown_rounds",
            "must be at least 1",
        ));
    }
    if let Some(priority) = c.priority.as_deref() {
        let mut sorted: Vec<usize> = priority.to_vec();
        sorted.sort_unstable();
        if sorted != (0..k).collect::<Vec<_>>() {
            out.push(ConfigViolation::new(
                "cooldown.priority",
                format!("must be a permutation of 0..{k}"),
            ));
        }
    }
}

fn check_feature_source(config: &PoolConfig, out: &mut Vec<ConfigViolation>) {
    match &config.feature_source {
        FeatureSourceSpec::HashedText => {}
        FeatureSourceSpec::File { path } => {
            if path.is_empty() {
                out.push(ConfigViolation::new(
                    "feature_source.path",
                    "must not be empty",
                ));
            }
        }
        FeatureSourceSpec::ClusterOnehot { assignments } => {
            if assignments.is_empty() {
                out.push(ConfigViolation::new(
                    "feature_source.assignments",
                    "must not be empty",
                ));
            }
            for (query, &cluster) in assignments {
                if cluster >= config.feature_dim {
                    out.push(ConfigViolation::new(
                        format!("feature_source.assignments.{query}"),
                        format!(
                            "cluster {cluster} does not fit a one-hot of dimension {}",
                            config.feature_dim
                        ),
                    ));
                }
            }
        }
    }
}

fn check_judge(config: &PoolConfig, out: &mut Vec<ConfigViolation>) {
    match &config.judge {
        JudgeSpec::Oracle => {}
        JudgeSpec::GaussianNoise { sigma } => {
            if !(sigma.is_finite() && *sigma >= 0.0) {
                out.push(ConfigViolation::new(
                    "judge.sigma",
                    "must be a nonnegative real",
                ));
            }
        }
        JudgeSpec::Quantized { sigma, levels } => {
            if !(sigma.is_finite() && *sigma >= 0.0) {
                out.push(ConfigViolation::new(
                    "judge.sigma",
                    "must be a nonnegative real",
                ));
            }
            if *levels < 2 {
                out.push(ConfigViolation::new("judge.levels", "must be at least 2"));
            }
        }
    }
}

fn check_table(config: &PoolConfig, raw: &RawTable, out: &mut Vec<ConfigViolation>) {
    if raw.records.is_empty() {
        out.push(ConfigViolation::new(
            "response_table",
            "table must not be empty",
        ));
        return;
    }

    let mut unknown_providers = BTreeSet::new();
    let mut cells: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for record in &raw.records {
        match config.provider_index(&record.provider) {
            None => {
                unknown_providers.insert(record.provider.as_str());
            }
            Some(i) => {
                if !(record.quality.is_finite() && (0.0..=1.0).contains(&record.quality)) {
                    out.push(ConfigViolation::new(
                        format!("response_table[{}, {}]", record.query_id, record.provider),
                        "quality must lie in [0, 1]",
                    ));
                }
                if !cells.entry(record.query_id.as_str()).or_default().insert(i) {
                    out.push(ConfigViolation::new(
                        format!("response_table[{}, {}]", record.query_id, record.provider),
                        "duplicate (query, provider) entry",
                    ));
                }
            }
        }
    }
    for name in unknown_providers {
        out.push(ConfigViolation::new(
            "response_table",
            format!("table references provider '{name}' absent from the pool"),
        ));
    }
    let k = config.providers.len();
    for (query, present) in &cells {
        if present.len() != k {
            out.push(ConfigViolation::new(
                format!("response_table[{query}]"),
                format!("row covers {} of {k} providers", present.len()),
            ));
        }
    }

    if let QueryStreamSpec::Fixed { ids } = &config.query_stream {
        if ids.is_empty() {
            out.push(ConfigViolation::new(
                "query_stream.ids",
                "fixed stream must not be empty",
            ));
        }
        let known: BTreeSet<&str> = cells.keys().copied().collect();
        let mut dangling = BTreeSet::new();
        for id in ids {
            if !known.contains(id.as_str()) {
                dangling.insert(id.as_str());
            }
        }
        for id in dangling {
            out.push(ConfigViolation::new(
                "query_stream.ids",
                format!("query '{id}' not present in the response table"),
            ));
        }
    }

    if let FeatureSourceSpec::ClusterOnehot { assignments } = &config.feature_source {
        for query in cells.keys() {
            if !assignments.contains_key(*query) {
                out.push(ConfigViolation::new(
                    "feature_source.assignments",
                    format!("query '{query}' has no cluster assignment"),
                ));
            }
        }
    }
}
