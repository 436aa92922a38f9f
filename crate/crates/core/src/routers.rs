//! Routing policies behind one interface: the rate-scored contextual
//! router, its non-contextual ablation, additive learning baselines,
//! production-style baselines, and the two environment oracles.
//!
//! Policies see bandit feedback only: after each select, `feedback`
//! reports the chosen provider's latency and judged quality, and must
//! mutate no other provider's state. Every decision's score vector marks
//! inactive providers with `-inf` and the chosen provider attains the
//! maximum score, so traces stay self-consistent.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    argmax_active, AdditiveParams, CooldownParams, Observation, PoolConfig, QualityAveraging,
    QueryContext, RouterParams, RoutingDecision,
};
use crate::estimators::{Ema, EmaLatency, WindowedRidgeHead, WindowedScalarStats};
use crate::rng;
use crate::scoring::{additive_score, clamp01, renewal_score};
use crate::simenv::EnvView;
use crate::Error;

/// Names accepted by [`build_policy`], as documented to users.
pub const POLICY_NAMES: [&str; 10] = [
    "static:<idx>",
    "round-robin",
    "cooldown",
    "ema-greedy",
    "sw-ucb",
    "context-route",
    "lqm-only",
    "lqm-cr",
    "latency-oracle",
    "quality-oracle",
];

/// A routing policy driven one round at a time.
pub trait Policy: Send {
    /// Canonical name, as resolved by [`build_policy`].
    fn name(&self) -> &str;

    /// Picks an active provider for 1-based round `t`. Panics when no
    /// provider is active (contract violation).
    fn select(&mut self, t: u64, ctx: &QueryContext, active: &[bool]) -> RoutingDecision;

    /// Observes the outcome of the immediately preceding select. Must
    /// only mutate state belonging to `obs.provider`.
    fn feedback(&mut self, obs: &Observation);

    /// Opaque per-provider state fingerprints; used to check that
    /// feedback leaves unselected providers untouched.
    fn arm_snapshots(&self) -> Vec<String>;
}

/// Resolves a policy name against a pool. `static` takes an optional
/// `:<idx>` suffix overriding `policy_params.static_index`.
pub fn build_policy(
    name: &str,
    config: &PoolConfig,
    view: &EnvView,
    seed: u64,
) -> Result<Box<dyn Policy>, Error> {
    let k = config.num_providers();
    let rp = &config.router_params;
    let pp = &config.policy_params;
    let additive = config.additive_params.clone();
    let policy: Box<dyn Policy> = match name {
        "round-robin" => Box::new(RoundRobinPolicy::new(k)),
        "cooldown" => Box::new(CooldownPolicy::new(&config.cooldown, k)),
        "ema-greedy" => Box::new(EmaGreedyPolicy::new(
            k,
            additive,
            pp.epsilon,
            rp.ema_rho,
            rng::stream(seed, rng::TAG_POLICY),
        )),
        "sw-ucb" => Box::new(SwUcbPolicy::new(k, additive, rp.window)),
        "context-route" => Box::new(ContextRoutePolicy::new(k, config.feature_dim, additive, rp)),
        "lqm-only" => Box::new(LqmOnlyPolicy::new(k, rp, pp.lqm_only_quality)),
        "lqm-cr" => Box::new(LqmContextRoutePolicy::new(k, config.feature_dim, rp)),
        "latency-oracle" => Box::new(LatencyOraclePolicy::new(view.clone())),
        "quality-oracle" => Box::new(QualityOraclePolicy::new(
            view.clone(),
            pp.slo_ms,
            pp.oracle_load_aware,
        )),
        other if other == "static" || other.starts_with("static:") => {
            let index = match other.strip_prefix("static:") {
                Some(rest) => rest.parse::<usize>().map_err(|_| unknown_policy(name))?,
                None => pp.static_index,
            };
            if index >= k {
                return Err(Error::InvalidRequest(format!(
                    "static provider index {index} out of range for a {k}-provider pool"
                )));
            }
            Box::new(StaticPolicy::new(index, k))
        }
        _ => return Err(unknown_policy(name)),
    };
    Ok(policy)
}

fn unknown_policy(name: &str) -> Error {
    Error::UnknownPolicy {
        name: name.to_string(),
        valid: POLICY_NAMES.join(", "),
    }
}

/// Score vector for choices not derived from per-arm values (forced
/// plays, exploration draws, priority rules): chosen gets 1, other
/// active providers 0, inactive `-inf`.
fn forced_scores(chosen: usize, active: &[bool]) -> Vec<f64> {
    active
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if !a {
                f64::NEG_INFINITY
            } else if i == chosen {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

fn decision_with(t: u64, chosen: usize, scores: Vec<f64>, active: &[bool]) -> RoutingDecision {
    debug_assert!(active[chosen], "chose an inactive provider");
    RoutingDecision {
        round: t,
        chosen,
        per_provider_scores: scores,
        active_mask: active.to_vec(),
    }
}

/// Argmax decision over a score vector that already has `-inf` on
/// inactive providers; ties resolve to the lowest index.
fn argmax_decision(t: u64, scores: Vec<f64>, active: &[bool]) -> RoutingDecision {
    let chosen =
        argmax_active(&scores, active).expect("select requires at least one active provider");
    decision_with(t, chosen, scores, active)
}

fn lowest_active(active: &[bool]) -> usize {
    active
        .iter()
        .position(|&a| a)
        .expect("select requires at least one active provider")
}

fn active_indices(active: &[bool]) -> Vec<usize> {
    active
        .iter()
        .enumerate()
        .filter_map(|(i, &a)| a.then_some(i))
        .collect()
}

/// Pins one provider; falls back to the lowest-index active provider
/// when the pinned one is unavailable.
pub struct StaticPolicy {
    name: String,
    index: usize,
    k: usize,
}

impl StaticPolicy {
    pub fn new(index: usize, k: usize) -> Self {
        assert!(index < k, "static index out of range");
        StaticPolicy {
            name: format!("static:{index}"),
            index,
            k,
        }
    }
}

impl Policy for StaticPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let chosen = if active[self.index] {
            self.index
        } else {
            lowest_active(active)
        };
        decision_with(t, chosen, forced_scores(chosen, active), active)
    }

    fn feedback(&mut self, _obs: &Observation) {}

    fn arm_snapshots(&self) -> Vec<String> {
        vec![String::new(); self.k]
    }
}

/// Cycles over the currently active providers; with a full pool round t
/// picks provider t mod K.
pub struct RoundRobinPolicy {
    k: usize,
}

impl RoundRobinPolicy {
    pub fn new(k: usize) -> Self {
        RoundRobinPolicy { k }
    }
}

impl Policy for RoundRobinPolicy {
    fn name(&self) -> &str {
        "round-robin"
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let act = active_indices(active);
        assert!(!act.is_empty(), "select requires at least one active provider");
        let chosen = act[(t % act.len() as u64) as usize];
        decision_with(t, chosen, forced_scores(chosen, active), active)
    }

    fn feedback(&mut self, _obs: &Observation) {}

    fn arm_snapshots(&self) -> Vec<String> {
        vec![String::new(); self.k]
    }
}

/// Priority list with latency-tripped cooldowns: serves the
/// highest-priority available provider; a response slower than the trip
/// threshold sidelines its provider for `cooldown_rounds` selections.
/// With every provider cooling, the highest-priority active one serves
/// anyway.
pub struct CooldownPolicy {
    priority: Vec<usize>,
    cooling: Vec<u32>,
    trip_threshold_ms: f64,
    cooldown_rounds: u32,
}

impl CooldownPolicy {
    pub fn new(params: &CooldownParams, k: usize) -> Self {
        let priority = params.priority().to_vec();
        assert_eq!(priority.len(), k, "priority must cover the pool");
        CooldownPolicy {
            cooling: vec![0; k],
            priority,
            trip_threshold_ms: params.trip_threshold_ms,
            cooldown_rounds: params.cooldown_rounds,
        }
    }
}

impl Policy for CooldownPolicy {
    fn name(&self) -> &str {
        "cooldown"
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        // Counters tick down at the start of every round; a trip sets
        // cooldown_rounds + 1 so the provider sits out exactly
        // cooldown_rounds selections.
        for c in &mut self.cooling {
            *c = c.saturating_sub(1);
        }
        let chosen = self
            .priority
            .iter()
            .copied()
            .find(|&p| active[p] && self.cooling[p] == 0)
            .or_else(|| self.priority.iter().copied().find(|&p| active[p]))
            .expect("select requires at least one active provider");
        decision_with(t, chosen, forced_scores(chosen, active), active)
    }

    fn feedback(&mut self, obs: &Observation) {
        if obs.latency_ms > self.trip_threshold_ms {
            self.cooling[obs.provider] = self.cooldown_rounds + 1;
        }
    }

    fn arm_snapshots(&self) -> Vec<String> {
        self.cooling.iter().map(|c| c.to_string()).collect()
    }
}

/// Epsilon-greedy on an EMA of the additive composite reward, with the
/// exploration rate decaying as epsilon / sqrt(t). Each active provider
/// is played once before greedy selection starts.
pub struct EmaGreedyPolicy {
    additive: AdditiveParams,
    epsilon: f64,
    rewards: Vec<Ema>,
    played: Vec<bool>,
    rng: ChaCha8Rng,
}

impl EmaGreedyPolicy {
    pub fn new(k: usize, additive: AdditiveParams, epsilon: f64, rho: f64, rng: ChaCha8Rng) -> Self {
        EmaGreedyPolicy {
            additive,
            epsilon,
            rewards: vec![Ema::new(rho); k],
            played: vec![false; k],
            rng,
        }
    }
}

impl Policy for EmaGreedyPolicy {
    fn name(&self) -> &str {
        "ema-greedy"
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        if let Some(chosen) = (0..active.len()).find(|&i| active[i] && !self.played[i]) {
            return decision_with(t, chosen, forced_scores(chosen, active), active);
        }
        let explore = self.rng.random::<f64>() < self.epsilon / (t as f64).sqrt();
        if explore {
            let act = active_indices(active);
            let chosen = act[self.rng.random_range(0..act.len())];
            return decision_with(t, chosen, forced_scores(chosen, active), active);
        }
        let scores: Vec<f64> = active
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if a {
                    self.rewards[i].value()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        argmax_decision(t, scores, active)
    }

    fn feedback(&mut self, obs: &Observation) {
        let r = additive_score(obs.quality, obs.latency_ms, &self.additive);
        self.rewards[obs.provider].update(r);
        self.played[obs.provider] = true;
    }

    fn arm_snapshots(&self) -> Vec<String> {
        self.rewards
            .iter()
            .zip(&self.played)
            .map(|(e, p)| format!("{e:?}|{p}"))
            .collect()
    }
}

/// Sliding-window UCB on the additive composite reward: windowed mean
/// plus sqrt(2 ln t / n_w), with forced play of any unplayed provider.
pub struct SwUcbPolicy {
    additive: AdditiveParams,
    stats: Vec<WindowedScalarStats>,
}

impl SwUcbPolicy {
    pub fn new(k: usize, additive: AdditiveParams, window: usize) -> Self {
        SwUcbPolicy {
            additive,
            stats: vec![WindowedScalarStats::new(window); k],
        }
    }
}

impl Policy for SwUcbPolicy {
    fn name(&self) -> &str {
        "sw-ucb"
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        if let Some(chosen) = (0..active.len()).find(|&i| active[i] && self.stats[i].count() == 0)
        {
            return decision_with(t, chosen, forced_scores(chosen, active), active);
        }
        let log_t = (t as f64).ln();
        let scores: Vec<f64> = active
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if a {
                    self.stats[i].mean() + (2.0 * log_t / self.stats[i].count() as f64).sqrt()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        argmax_decision(t, scores, active)
    }

    fn feedback(&mut self, obs: &Observation) {
        let r = additive_score(obs.quality, obs.latency_ms, &self.additive);
        self.stats[obs.provider].push(r);
    }

    fn arm_snapshots(&self) -> Vec<String> {
        self.stats.iter().map(|s| format!("{s:?}")).collect()
    }
}

/// Contextual LinUCB trained directly on the additive composite reward:
/// score = r_hat(x) + alpha_ucb * width(x). No rate normalization and no
/// gap deflation.
pub struct ContextRoutePolicy {
    additive: AdditiveParams,
    alpha_ucb: f64,
    heads: Vec<WindowedRidgeHead>,
    last_features: Vec<f64>,
}

impl ContextRoutePolicy {
    pub fn new(k: usize, dim: usize, additive: AdditiveParams, params: &RouterParams) -> Self {
        ContextRoutePolicy {
            additive,
            alpha_ucb: params.alpha_ucb,
            heads: vec![
                WindowedRidgeHead::with_target_bounds(dim, params.ridge, params.window, -1.0, 1.0);
                k
            ],
            last_features: vec![0.0; dim],
        }
    }
}

impl Policy for ContextRoutePolicy {
    fn name(&self) -> &str {
        "context-route"
    }

    fn select(&mut self, t: u64, ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let x = &ctx.features;
        self.last_features.clone_from(x);
        let scores: Vec<f64> = active
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if a {
                    self.heads[i].predict(x) + self.alpha_ucb * self.heads[i].uncertainty(x)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        argmax_decision(t, scores, active)
    }

    fn feedback(&mut self, obs: &Observation) {
        let r = additive_score(obs.quality, obs.latency_ms, &self.additive);
        self.heads[obs.provider].update(&self.last_features, r);
    }

    fn arm_snapshots(&self) -> Vec<String> {
        self.heads.iter().map(head_fingerprint).collect()
    }
}

/// Non-contextual rate-scored router: windowed (or EMA) quality mean per
/// provider over the renewal denominator, plus a count-based bonus
/// deflated by the quality gap to the current best estimate.
pub struct LqmOnlyPolicy {
    params: RouterParams,
    averaging: QualityAveraging,
    window_quality: Vec<WindowedScalarStats>,
    ema_quality: Vec<Ema>,
    latency: Vec<EmaLatency>,
}

impl LqmOnlyPolicy {
    pub fn new(k: usize, params: &RouterParams, averaging: QualityAveraging) -> Self {
        LqmOnlyPolicy {
            window_quality: vec![WindowedScalarStats::new(params.window); k],
            ema_quality: vec![Ema::new(params.ema_rho); k],
            latency: vec![EmaLatency::new(params.tau_init_ms, params.ema_rho); k],
            averaging,
            params: params.clone(),
        }
    }

    fn quality_estimate(&self, i: usize) -> f64 {
        match self.averaging {
            QualityAveraging::Window => self.window_quality[i].mean(),
            QualityAveraging::Ema => self.ema_quality[i].value(),
        }
    }
}

impl Policy for LqmOnlyPolicy {
    fn name(&self) -> &str {
        "lqm-only"
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let k = active.len();
        // Stage 1: clamped quality estimates for every active provider.
        let u_hat: Vec<f64> = (0..k).map(|i| clamp01(self.quality_estimate(i))).collect();
        let best = active
            .iter()
            .zip(&u_hat)
            .filter(|(&a, _)| a)
            .map(|(_, &u)| u)
            .fold(f64::NEG_INFINITY, f64::max);
        // Stage 2: rate exploit plus gap-deflated count bonus.
        let log_t = (t as f64).ln();
        let p = &self.params;
        let scores: Vec<f64> = (0..k)
            .map(|i| {
                if !active[i] {
                    return f64::NEG_INFINITY;
                }
                let exploit = renewal_score(u_hat[i], self.latency[i].estimate(), p.l_ref_ms);
                let n_w = self.window_quality[i].count() as f64;
                let bonus = p.beta * (log_t / (n_w + 1.0)).sqrt();
                let gap = (best - u_hat[i]).max(0.0);
                exploit + bonus / (1.0 + p.lambda_defl * gap)
            })
            .collect();
        argmax_decision(t, scores, active)
    }

    fn feedback(&mut self, obs: &Observation) {
        let p = obs.provider;
        self.window_quality[p].push(obs.quality);
        self.ema_quality[p].update(obs.quality);
        self.latency[p].update(obs.latency_ms);
    }

    fn arm_snapshots(&self) -> Vec<String> {
        (0..self.latency.len())
            .map(|i| {
                format!(
                    "{:?}|{:?}|{:?}",
                    self.window_quality[i], self.ema_quality[i], self.latency[i]
                )
            })
            .collect()
    }
}

/// The rate-scored contextual router: per-provider ridge heads estimate
/// quality from query features; the exploit term divides the clamped
/// estimate by the normalized latency cycle; the confidence bonus is
/// deflated by the quality gap to the best current estimate. Estimates
/// and widths are computed for all active providers before any gap, so
/// deflation sees a consistent snapshot.
pub struct LqmContextRoutePolicy {
    params: RouterParams,
    heads: Vec<WindowedRidgeHead>,
    latency: Vec<EmaLatency>,
    last_features: Vec<f64>,
}

impl LqmContextRoutePolicy {
    pub fn new(k: usize, dim: usize, params: &RouterParams) -> Self {
        LqmContextRoutePolicy {
            heads: vec![WindowedRidgeHead::new(dim, params.ridge, params.window); k],
            latency: vec![EmaLatency::new(params.tau_init_ms, params.ema_rho); k],
            last_features: vec![0.0; dim],
            params: params.clone(),
        }
    }
}

impl Policy for LqmContextRoutePolicy {
    fn name(&self) -> &str {
        "lqm-cr"
    }

    fn select(&mut self, t: u64, ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let x = &ctx.features;
        self.last_features.clone_from(x);
        let k = active.len();
        // Stage 1: clamped estimates and confidence widths, all providers.
        let mut u_hat = vec![0.0; k];
        let mut width = vec![0.0; k];
        for i in 0..k {
            if active[i] {
                u_hat[i] = clamp01(self.heads[i].predict(x));
                width[i] = self.params.alpha_ucb * self.heads[i].uncertainty(x);
            }
        }
        let best = active
            .iter()
            .zip(&u_hat)
            .filter(|(&a, _)| a)
            .map(|(_, &u)| u)
            .fold(f64::NEG_INFINITY, f64::max);
        // Stage 2: rate exploit plus gap-deflated bonus.
        let p = &self.params;
        let scores: Vec<f64> = (0..k)
            .map(|i| {
                if !active[i] {
                    return f64::NEG_INFINITY;
                }
                let exploit = renewal_score(u_hat[i], self.latency[i].estimate(), p.l_ref_ms);
                let gap = (best - u_hat[i]).max(0.0);
                exploit + width[i] / (1.0 + p.lambda_defl * gap)
            })
            .collect();
        argmax_decision(t, scores, active)
    }

    fn feedback(&mut self, obs: &Observation) {
        let p = obs.provider;
        self.heads[p].update(&self.last_features, obs.quality);
        self.latency[p].update(obs.latency_ms);
    }

    fn arm_snapshots(&self) -> Vec<String> {
        self.heads
            .iter()
            .zip(&self.latency)
            .map(|(h, l)| format!("{}|{l:?}", head_fingerprint(h)))
            .collect()
    }
}

fn head_fingerprint(head: &WindowedRidgeHead) -> String {
    format!(
        "len={} rebuilds={} a={:?} ainv={:?}",
        head.window_len(),
        head.rebuild_count(),
        head.a_matrix(),
        head.a_inverse()
    )
}

/// Always routes to the provider with the lowest true expected latency
/// under the current load state (oracle access to the latency model,
/// not to sampled draws).
pub struct LatencyOraclePolicy {
    view: EnvView,
}

impl LatencyOraclePolicy {
    pub fn new(view: EnvView) -> Self {
        LatencyOraclePolicy { view }
    }
}

impl Policy for LatencyOraclePolicy {
    fn name(&self) -> &str {
        "latency-oracle"
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let scores: Vec<f64> = active
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if a {
                    -self.view.expected_latency_ms(t, i)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        argmax_decision(t, scores, active)
    }

    fn feedback(&mut self, _obs: &Observation) {}

    fn arm_snapshots(&self) -> Vec<String> {
        vec![String::new(); self.view.num_providers()]
    }
}

/// Per-query quality argmax over the true response table, restricted to
/// providers whose expected latency meets the latency budget; quality
/// ties break to the cheaper provider, then the lower index. When no
/// provider meets the budget the filter is dropped.
pub struct QualityOraclePolicy {
    view: EnvView,
    slo_ms: f64,
    load_aware: bool,
}

impl QualityOraclePolicy {
    pub fn new(view: EnvView, slo_ms: f64, load_aware: bool) -> Self {
        QualityOraclePolicy {
            view,
            slo_ms,
            load_aware,
        }
    }
}

impl Policy for QualityOraclePolicy {
    fn name(&self) -> &str {
        "quality-oracle"
    }

    fn select(&mut self, t: u64, ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let row = self
            .view
            .true_qualities(&ctx.query_id)
            .unwrap_or_else(|| panic!("query '{}' missing from response table", ctx.query_id));
        let k = active.len();
        let expected = |i: usize| {
            if self.load_aware {
                self.view.expected_latency_ms(t, i)
            } else {
                self.view.expected_idle_latency_ms(i)
            }
        };
        let mut eligible: Vec<bool> = (0..k)
            .map(|i| active[i] && expected(i) <= self.slo_ms)
            .collect();
        if !eligible.iter().any(|&e| e) {
            eligible.copy_from_slice(active);
        }
        let costs = self.view.costs();
        let cost = |i: usize| costs.map_or(0.0, |c| c[i]);
        let mut chosen: Option<usize> = None;
        for i in (0..k).filter(|&i| eligible[i]) {
            chosen = match chosen {
                None => Some(i),
                Some(b) => {
                    if row[i] > row[b] || (row[i] == row[b] && cost(i) < cost(b)) {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let chosen = chosen.expect("select requires at least one active provider");
        let scores: Vec<f64> = (0..k)
            .map(|i| if eligible[i] { row[i] } else { f64::NEG_INFINITY })
            .collect();
        decision_with(t, chosen, scores, active)
    }

    fn feedback(&mut self, _obs: &Observation) {}

    fn arm_snapshots(&self) -> Vec<String> {
        vec![String::new(); self.view.num_providers()]
    }
}

/// Uniform-random control; not exposed through [`build_policy`], used
/// by the verification suite as a linear-regret reference.
pub struct UniformRandomPolicy {
    k: usize,
    rng: ChaCha8Rng,
}

impl UniformRandomPolicy {
    pub fn new(k: usize, seed: u64) -> Self {
        UniformRandomPolicy {
            k,
            rng: rng::stream(seed, rng::TAG_POLICY),
        }
    }
}

impl Policy for UniformRandomPolicy {
    fn name(&self) -> &str {
        "uniform-random"
    }

    fn select(&mut self, t: u64, _ctx: &QueryContext, active: &[bool]) -> RoutingDecision {
        let act = active_indices(active);
        assert!(!act.is_empty(), "select requires at least one active provider");
        let chosen = act[self.rng.random_range(0..act.len())];
        decision_with(t, chosen, forced_scores(chosen, active), active)
    }

    fn feedback(&mut self, _obs: &Observation) {}

    fn arm_snapshots(&self) -> Vec<String> {
        vec![String::new(); self.k]
    }
}
