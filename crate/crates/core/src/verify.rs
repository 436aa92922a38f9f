//! Independent verification: brute-force oracles, closed-form fixtures,
//! score-family property checks, V-regret accounting, and a naive
//! reference router for differential testing.
//!
//! Everything here recomputes its arithmetic from first principles
//! (direct formulas, full matrix re-inversion via nalgebra, exhaustive
//! scans) rather than calling the optimized production paths, so
//! agreement between the two is evidence and not tautology. All checks
//! are pure and deterministic given their seeds.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::domain::{
    AdditiveParams, JudgeSpec, LatencyStateSpec, LoadPattern, Observation, PoolConfig,
    ProviderLatency, ProviderSpec, QualityAveraging, QueryContext, QueryStreamSpec, ResponseTable,
    RouterParams, RoutingDecision,
};
use crate::estimators::{EmaLatency, WindowedRidgeHead};
use crate::harness::{run_episode_with, EpisodeTrace};
use crate::routers::{
    LqmContextRoutePolicy, LqmOnlyPolicy, Policy, QualityOraclePolicy, StaticPolicy,
    UniformRandomPolicy,
};
use crate::scoring::{
    additive_score, rankings_disagree, renewal_score, separation_interval, Arm,
    SeparationInstance,
};
use crate::simenv::{
    make_synthetic_pool, EnvCore, Environment, LatencyModel, LoadLevel, LoadState, SynthPoolSpec,
};
use crate::{rng, Error};

const VERIFY_TAG: u64 = 0xD1F7;

// ---------------------------------------------------------------------------
// Stationary rate values and V-regret accounting
// ---------------------------------------------------------------------------

/// Per-arm stationary rate values `v_i = u_i * l_ref / (l_ref + tau_i)`,
/// their gaps to the best arm, and the best arm's index.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryValues {
    pub values: Vec<f64>,
    pub gaps: Vec<f64>,
    pub best: usize,
}

/// Direct evaluation from per-arm (mean quality, mean latency ms) specs.
pub fn stationary_v_values(arm_specs: &[(f64, f64)], l_ref_ms: f64) -> StationaryValues {
    assert!(!arm_specs.is_empty(), "need at least one arm");
    assert!(l_ref_ms > 0.0, "l_ref_ms must be positive");
    let values: Vec<f64> = arm_specs
        .iter()
        .map(|&(u, tau)| {
            assert!((0.0..=1.0).contains(&u), "mean quality must lie in [0, 1]");
            assert!(tau >= 0.0, "mean latency must be nonnegative");
            u * l_ref_ms / (l_ref_ms + tau)
        })
        .collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    let top = values[best];
    let gaps = values.iter().map(|v| top - v).collect();
    StationaryValues { values, gaps, best }
}

/// Mean of one latency state, computed from the raw spec: a lognormal
/// anchored at (median, p95) has mean `exp(mu + sigma^2 / 2)`; an
/// empirical pool averages its entries.
fn spec_mean(spec: &LatencyStateSpec) -> f64 {
    match spec {
        LatencyStateSpec::Parametric { median_ms, p95_ms } => {
            let mu = median_ms.ln();
            let sigma = (p95_ms / median_ms).ln() / 1.645;
            (mu + sigma * sigma / 2.0).exp()
        }
        LatencyStateSpec::Empirical { pool } => pool.iter().sum::<f64>() / pool.len() as f64,
    }
}

/// Expected latency of a provider under one load level, recomputed from
/// the config: discrete states read their fitted mean, severities blend
/// the idle and stressed lognormal parameters linearly (or quantize to
/// thirds when either end is an empirical pool).
fn expected_latency_under(config: &PoolConfig, provider: usize, level: &LoadLevel) -> f64 {
    let name = &config.providers[provider].name;
    let models: &ProviderLatency = config
        .latency_models
        .get(name)
        .unwrap_or_else(|| panic!("missing latency model for '{name}'"));
    let state_spec = |state: LoadState| match state {
        LoadState::Idle => &models.idle,
        LoadState::Moderate => &models.moderate,
        LoadState::Stressed => &models.stressed,
    };
    match level {
        LoadLevel::State(s) => spec_mean(state_spec(*s)),
        LoadLevel::Severity(s) => {
            let log_params = |spec: &LatencyStateSpec| match spec {
                LatencyStateSpec::Parametric { median_ms, p95_ms } => {
                    Some((median_ms.ln(), (p95_ms / median_ms).ln() / 1.645))
                }
                LatencyStateSpec::Empirical { .. } => None,
            };
            match (log_params(&models.idle), log_params(&models.stressed)) {
                (Some((mu0, s0)), Some((mu1, s1))) => {
                    let mu = (1.0 - s) * mu0 + s * mu1;
                    let sigma = (1.0 - s) * s0 + s * s1;
                    (mu + sigma * sigma / 2.0).exp()
                }
                _ => spec_mean(state_spec(level.quantized())),
            }
        }
    }
}

/// Round-by-round V-regret of an episode against the best arm's true
/// rate value under each round's recorded load state.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub v_best: Vec<f64>,
    pub v_chosen: Vec<f64>,
    /// `v_best[t] - v_chosen[t]`, nonnegative by construction.
    pub instantaneous: Vec<f64>,
    /// Running sums of `instantaneous`; nondecreasing.
    pub cumulative_by_round: Vec<f64>,
    pub cumulative: f64,
    /// Idle-load stationary values of the same arms.
    pub stationary: StationaryValues,
}

/// Scores every recorded round from the true per-arm mean qualities and
/// the config's expected latencies; no policy state is consulted.
pub fn v_regret_trace(trace: &EpisodeTrace, core: &EnvCore) -> RegretTrace {
    let config = &core.config;
    let means = core.table.column_means();
    let k = means.len();
    let l_ref = config.router_params.l_ref_ms;

    let idle = LoadLevel::State(LoadState::Idle);
    let idle_specs: Vec<(f64, f64)> = means
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, expected_latency_under(config, i, &idle)))
        .collect();
    let stationary = stationary_v_values(&idle_specs, l_ref);

    let mut v_best = Vec::with_capacity(trace.rounds.len());
    let mut v_chosen = Vec::with_capacity(trace.rounds.len());
    let mut instantaneous = Vec::with_capacity(trace.rounds.len());
    let mut cumulative_by_round = Vec::with_capacity(trace.rounds.len());
    let mut total = 0.0;
    for rec in &trace.rounds {
        assert_eq!(rec.load.len(), k, "trace load vector must cover the pool");
        let values: Vec<f64> = (0..k)
            .map(|i| {
                let tau = expected_latency_under(config, i, &rec.load[i]);
                means[i] * l_ref / (l_ref + tau)
            })
            .collect();
        let best = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let chosen = values[rec.decision.chosen];
        let delta = best - chosen;
        debug_assert!(delta >= 0.0);
        total += delta;
        v_best.push(best);
        v_chosen.push(chosen);
        instantaneous.push(delta);
        cumulative_by_round.push(total);
    }
    RegretTrace {
        v_best,
        v_chosen,
        instantaneous,
        cumulative_by_round,
        cumulative: total,
        stationary,
    }
}

// ---------------------------------------------------------------------------
// Brute-force quality oracle
// ---------------------------------------------------------------------------

/// Exhaustive per-query scan: among providers with `latency_means` at or
/// under `slo_ms` (all providers when none qualify), the highest quality
/// wins; ties break to lower cost, then lower index. Returns one choice
/// per table query, in table order.
pub fn brute_force_quality_oracle(
    table: &ResponseTable,
    latency_means: &[f64],
    slo_ms: f64,
) -> Vec<usize> {
    let k = table.num_providers();
    assert_eq!(latency_means.len(), k, "one latency mean per provider");
    let costs: Vec<f64> = match table.costs() {
        Some(c) => c.to_vec(),
        None => vec![0.0; k],
    };
    let eligible: Vec<bool> = latency_means.iter().map(|&m| m <= slo_ms).collect();
    let any_eligible = eligible.iter().any(|&e| e);

    table
        .query_ids()
        .iter()
        .map(|q| {
            let row = table.qualities(q).expect("query from table");
            let mut choice: Option<usize> = None;
            for i in 0..k {
                if any_eligible && !eligible[i] {
                    continue;
                }
                let better = match choice {
                    None => true,
                    Some(c) => {
                        row[i] > row[c] || (row[i] == row[c] && costs[i] < costs[c])
                        // equal quality and cost keeps the lower index
                    }
                };
                if better {
                    choice = Some(i);
                }
            }
            choice.expect("nonempty pool")
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Score-family characterisation
// ---------------------------------------------------------------------------

/// One-parameter score family `T(u, z) = u * (1 + z)^(-a)` over quality
/// `u` in [0, 1] and normalized latency `z >= 0`. `a = 1` is the rate
/// score; other exponents exist only to show which property fails.
pub fn rate_family_score(u: f64, z: f64, exponent: f64) -> f64 {
    assert!((0.0..=1.0).contains(&u), "u must lie in [0, 1], got {u}");
    assert!(z >= 0.0, "z must be nonnegative, got {z}");
    assert!(exponent >= 0.0, "exponent must be nonnegative");
    u * (1.0 + z).powf(-exponent)
}

/// Property outcomes for one exponent of the score family.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterisationReport {
    pub exponent: f64,
    pub samples: usize,
    /// T(0, z) = 0 for every z.
    pub non_compensation: bool,
    /// Nondecreasing in u, nonincreasing in z.
    pub monotone: bool,
    /// Depends on raw latency and reference only through their ratio.
    pub scale_invariant: bool,
    /// 0 <= T(u, z) <= u.
    pub bounded: bool,
    /// T(u, z1) / T(u, z2) depends only on (1 + z2) / (1 + z1).
    pub ratio_depends_on_cycle_only: bool,
    /// T(u, z) * (1 + z) is independent of z (one unit of quality per
    /// unit of cycle time); singles out exponent 1 within the family.
    pub cycle_calibrated: bool,
}

impl CharacterisationReport {
    /// The five structural properties, excluding cycle calibration.
    pub fn structural_pass(&self) -> bool {
        self.non_compensation
            && self.monotone
            && self.scale_invariant
            && self.bounded
            && self.ratio_depends_on_cycle_only
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Samples the family at random points and tests each property.
pub fn characterisation_properties(
    exponent: f64,
    samples: usize,
    seed: u64,
) -> CharacterisationReport {
    assert!(samples > 0);
    let mut r = rng::stream(seed, VERIFY_TAG);
    let mut report = CharacterisationReport {
        exponent,
        samples,
        non_compensation: true,
        monotone: true,
        scale_invariant: true,
        bounded: true,
        ratio_depends_on_cycle_only: true,
        cycle_calibrated: true,
    };
    for _ in 0..samples {
        let u = r.random_range(0.0..=1.0);
        let z1 = r.random_range(0.0..5.0);
        let z2 = r.random_range(0.0..5.0);

        if rate_family_score(0.0, z1, exponent) != 0.0 {
            report.non_compensation = false;
        }

        let (z_lo, z_hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        let u2 = r.random_range(u..=1.0);
        if rate_family_score(u, z_lo, exponent) > rate_family_score(u2, z_lo, exponent) + 1e-15 {
            report.monotone = false;
        }
        if rate_family_score(u, z_hi, exponent) > rate_family_score(u, z_lo, exponent) + 1e-15 {
            report.monotone = false;
        }

        // Raw-units form: z = tau / l_ref. Scaling both leaves T fixed.
        let l_ref = r.random_range(100.0..5000.0);
        let scale = r.random_range(0.1..10.0);
        let direct = rate_family_score(u, z1 * l_ref / l_ref, exponent);
        let scaled = rate_family_score(u, (z1 * l_ref * scale) / (l_ref * scale), exponent);
        if !close(direct, scaled) {
            report.scale_invariant = false;
        }

        let t = rate_family_score(u, z1, exponent);
        if !(0.0..=u + 1e-15).contains(&t) {
            report.bounded = false;
        }

        // Shift both z's by a common cycle factor c: the ratio of scores
        // must not move, and must not depend on u either.
        if u > 1e-6 {
            let c = r.random_range(1.0..3.0);
            let ratio = |uu: f64, a: f64, b: f64| {
                rate_family_score(uu, a, exponent) / rate_family_score(uu, b, exponent)
            };
            let base = ratio(u, z1, z2);
            let shifted = ratio(u, c * (1.0 + z1) - 1.0, c * (1.0 + z2) - 1.0);
            if !close(base, shifted) || !close(base, ratio(u2.max(1e-3), z1, z2)) {
                report.ratio_depends_on_cycle_only = false;
            }

            let cal1 = rate_family_score(u, z1, exponent) * (1.0 + z1);
            let cal2 = rate_family_score(u, z2, exponent) * (1.0 + z2);
            if !close(cal1, cal2) {
                report.cycle_calibrated = false;
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Rule-disagreement enumeration
// ---------------------------------------------------------------------------

/// Result of enumerating random two-arm instances: every quality
/// advantage strictly inside the disagreement interval must make the
/// additive rule pick the fast arm while the rate rule picks the
/// high-quality arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationScan {
    pub instances: usize,
    /// Instances whose interval intersected the feasible range.
    pub with_interval: usize,
    /// Interior points evaluated across all instances.
    pub points_tested: usize,
    pub counterexamples: usize,
}

pub fn separation_enumeration(instances: usize, seed: u64) -> SeparationScan {
    let mut r = rng::stream(seed, VERIFY_TAG.wrapping_add(1));
    let mut scan = SeparationScan {
        instances,
        with_interval: 0,
        points_tested: 0,
        counterexamples: 0,
    };
    for _ in 0..instances {
        let inst = SeparationInstance {
            alpha: r.random_range(0.05..0.95),
            u2: r.random_range(0.0..=1.0),
            tau1_norm: r.random_range(0.01..=1.0),
            tau2_norm: 0.0,
        };
        let inst = SeparationInstance {
            tau2_norm: r.random_range(0.0..inst.tau1_norm),
            ..inst
        };
        let Some((lo, hi)) = separation_interval(&inst) else {
            continue;
        };
        // The feasible range keeps u1 = u2 + delta_u inside [0, 1].
        let hi = hi.min(1.0 - inst.u2);
        if hi - lo <= 1e-9 {
            continue;
        }
        scan.with_interval += 1;
        for f in [0.25, 0.5, 0.75] {
            let delta_u = lo + f * (hi - lo);
            scan.points_tested += 1;
            if rankings_disagree(&inst, delta_u) != (Arm::Faster, Arm::HigherQuality) {
                scan.counterexamples += 1;
            }
        }
    }
    scan
}

// ---------------------------------------------------------------------------
// Incremental-inverse drift
// ---------------------------------------------------------------------------

/// Feeds `ops` random updates through a windowed ridge head and compares
/// its maintained inverse against a fresh nalgebra inversion of the
/// maintained Gram matrix after every operation. Returns the largest
/// absolute elementwise deviation seen.
pub fn inverse_drift_check(ops: usize, dim: usize, window: usize, seed: u64) -> f64 {
    let mut r = rng::stream(seed, VERIFY_TAG.wrapping_add(2));
    let mut head = WindowedRidgeHead::new(dim, 1.0, window);
    let mut worst = 0.0f64;
    for _ in 0..ops {
        let x: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..=1.0)).collect();
        let y: f64 = r.random_range(0.0..=1.0);
        head.update(&x, y);
        let a = DMatrix::from_row_slice(dim, dim, head.a_matrix());
        let direct = a.try_inverse().expect("ridge Gram matrix is invertible");
        for (i, &maintained) in head.a_inverse().iter().enumerate() {
            let dev = (maintained - direct[(i / dim, i % dim)]).abs();
            worst = worst.max(dev);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Naive reference router and differential testing
// ---------------------------------------------------------------------------

/// Unoptimized mirror of the two-stage contextual rate router: per
/// select it rebuilds every Gram matrix from its raw window, inverts it
/// with nalgebra, refolds the latency EMA from full history, and scores
/// with the plain-form formulas. No incremental state beyond the raw
/// sample buffers.
pub struct NaiveRateRouter {
    params: RouterParams,
    dim: usize,
    windows: Vec<VecDeque<(Vec<f64>, f64)>>,
    latency_history: Vec<Vec<f64>>,
    last_features: Vec<f64>,
}

impl NaiveRateRouter {
    pub fn new(k: usize, dim: usize, params: &RouterParams) -> Self {
        assert!(k >= 1 && dim >= 1);
        NaiveRateRouter {
            params: params.clone(),
            dim,
            windows: vec![VecDeque::new(); k],
            latency_history: vec![Vec::new(); k],
            last_features: vec![0.0; dim],
        }
    }

    fn tau_hat(&self, i: usize) -> f64 {
        let mut est = self.params.tau_init_ms;
        for (n, &l) in self.latency_history[i].iter().enumerate() {
            if n == 0 {
                est = l;
            } else {
                est = (1.0 - self.params.ema_rho) * est + self.params.ema_rho * l;
            }
        }
        est
    }

    /// Chosen provider and the full score vector for one round.
    pub fn select(&mut self, _t: u64, ctx: &QueryContext, active: &[bool]) -> (usize, Vec<f64>) {
        let x = &ctx.features;
        assert_eq!(x.len(), self.dim);
        self.last_features.clone_from(x);
        let k = active.len();
        let p = &self.params;
        let xv = DVector::from_column_slice(x);

        let mut u_hat = vec![0.0; k];
        let mut width = vec![0.0; k];
        for i in 0..k {
            if !active[i] {
                continue;
            }
            let mut a = DMatrix::identity(self.dim, self.dim) * p.ridge;
            let mut b = DVector::zeros(self.dim);
            for (xs, y) in &self.windows[i] {
                let v = DVector::from_column_slice(xs);
                a += &v * v.transpose();
                b += *y * v;
            }
            let a_inv = a.try_inverse().expect("ridge Gram matrix is invertible");
            let theta = &a_inv * b;
            u_hat[i] = xv.dot(&theta).clamp(0.0, 1.0);
            width[i] = p.alpha_ucb * xv.dot(&(&a_inv * &xv)).max(0.0).sqrt();
        }

        let best = (0..k)
            .filter(|&i| active[i])
            .map(|i| u_hat[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let scores: Vec<f64> = (0..k)
            .map(|i| {
                if !active[i] {
                    return f64::NEG_INFINITY;
                }
                let exploit = u_hat[i] * p.l_ref_ms / (p.l_ref_ms + self.tau_hat(i));
                exploit + width[i] / (1.0 + p.lambda_defl * (best - u_hat[i]).max(0.0))
            })
            .collect();

        let mut chosen = None;
        for (i, &s) in scores.iter().enumerate() {
            if active[i] && chosen.is_none_or(|c: usize| s > scores[c]) {
                chosen = Some(i);
            }
        }
        (chosen.expect("at least one active provider"), scores)
    }

    pub fn feedback(&mut self, obs: &Observation) {
        let i = obs.provider;
        if self.windows[i].len() == self.params.window {
            self.windows[i].pop_front();
        }
        self.windows[i].push_back((self.last_features.clone(), obs.quality));
        self.latency_history[i].push(obs.latency_ms);
    }
}

/// First disagreement between the production router and the naive
/// reference, with both score vectors for diagnosis.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMismatch {
    pub round: u64,
    pub production_chosen: usize,
    pub reference_chosen: usize,
    pub production_scores: Vec<f64>,
    pub reference_scores: Vec<f64>,
}

/// Runs the production contextual rate router and the naive reference in
/// lockstep on one randomized instance (pool size, feature dimension,
/// horizon, deflation strength, window, load pattern, and per-round
/// availability all drawn from the seed). Returns the rounds checked.
pub fn differential_decision_check(seed: u64) -> Result<usize, Box<DecisionMismatch>> {
    let mut r = rng::stream(seed, VERIFY_TAG.wrapping_add(3));
    let k = r.random_range(2..=4usize);
    let dim = r.random_range(2..=8usize);
    let rounds = r.random_range(100..=500usize);
    let lambda = [0.0, 0.5, 1.0][r.random_range(0..3usize)];
    let window = [25usize, 50, 200][r.random_range(0..3usize)];
    let pattern = [
        LoadPattern::Stationary,
        LoadPattern::Step,
        LoadPattern::Rotation,
        LoadPattern::Spike,
        LoadPattern::Gradual,
    ][r.random_range(0..5usize)];

    let (mut config, table) = make_synthetic_pool(&SynthPoolSpec {
        means: (0..k).map(|_| r.random_range(0.15..0.9)).collect(),
        latency_medians_ms: (0..k).map(|_| r.random_range(80.0..1200.0)).collect(),
        latency_p95_ratio: 1.5,
        queries: 250,
        seed: r.random(),
        ..SynthPoolSpec::default()
    });
    config.feature_dim = dim;
    config.router_params = RouterParams {
        lambda_defl: lambda,
        window,
        ..RouterParams::default()
    };
    config.judge = JudgeSpec::GaussianNoise { sigma: 0.1 };
    let core = EnvCore::assemble(config, table, Path::new(".")).expect("synthetic pool is valid");
    let mut env =
        Environment::new(Arc::clone(&core), pattern, rounds, r.random()).expect("valid episode");

    let rp = &core.config.router_params;
    let mut production = LqmContextRoutePolicy::new(k, dim, rp);
    let mut reference = NaiveRateRouter::new(k, dim, rp);

    for t in 1..=rounds as u64 {
        let mut active = vec![true; k];
        if r.random_range(0.0..1.0) < 0.15 {
            active[r.random_range(0..k)] = false;
        }
        let ctx = env.context(t).clone();
        let decision: RoutingDecision = production.select(t, &ctx, &active);
        let (ref_chosen, ref_scores) = reference.select(t, &ctx, &active);
        if decision.chosen != ref_chosen {
            return Err(Box::new(DecisionMismatch {
                round: t,
                production_chosen: decision.chosen,
                reference_chosen: ref_chosen,
                production_scores: decision.per_provider_scores,
                reference_scores: ref_scores,
            }));
        }
        let outcome = env.step(&decision);
        production.feedback(&outcome.observation);
        reference.feedback(&outcome.observation);
    }
    Ok(rounds)
}

// ---------------------------------------------------------------------------
// Regret growth
// ---------------------------------------------------------------------------

/// Mean cumulative V-regret at each horizon and the growth ratio between
/// the two largest horizons. A ratio near 2 is linear growth; a ratio at
/// or under 1.75 is taken as log-like.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthStats {
    pub t_values: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub ratio: f64,
    pub log_like: bool,
}

/// Runs `make_policy(seed)` over the largest horizon per seed and reads
/// cumulative regret at every requested horizon from the same trace.
pub fn regret_growth_check(
    core: &Arc<EnvCore>,
    make_policy: &dyn Fn(u64) -> Box<dyn Policy>,
    t_values: &[usize],
    seeds: &[u64],
) -> Result<GrowthStats, Error> {
    if t_values.len() < 2 || t_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidRequest(
            "need at least two strictly increasing horizons".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidRequest("need at least one seed".into()));
    }
    let t_max = *t_values.last().expect("nonempty");
    let mut sums = vec![0.0; t_values.len()];
    for &seed in seeds {
        let mut env = Environment::new(Arc::clone(core), LoadPattern::Stationary, t_max, seed)?;
        let mut policy = make_policy(seed);
        let trace = run_episode_with(&mut env, policy.as_mut());
        let regret = v_regret_trace(&trace, core);
        for (sum, &tv) in sums.iter_mut().zip(t_values) {
            *sum += regret.cumulative_by_round[tv - 1];
        }
    }
    let mean_regret: Vec<f64> = sums.iter().map(|s| s / seeds.len() as f64).collect();
    let prev = mean_regret[mean_regret.len() - 2];
    let last = mean_regret[mean_regret.len() - 1];
    let ratio = if prev == 0.0 {
        if last == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        last / prev
    };
    Ok(GrowthStats {
        t_values: t_values.to_vec(),
        mean_regret,
        ratio,
        log_like: ratio <= 1.75,
    })
}

/// Stationary 3-arm fixture with constant 300 ms latencies (degenerate
/// quantiles) and exact-count Bernoulli qualities 0.9/0.6/0.3, so rate
/// values are 0.75/0.50/0.25 and the only stochasticity is the query
/// draw. Deflation is off and the window spans the horizon.
pub fn regret_fixture(window: usize) -> Arc<EnvCore> {
    let (mut config, table) = make_synthetic_pool(&SynthPoolSpec {
        means: vec![0.9, 0.6, 0.3],
        latency_medians_ms: vec![300.0; 3],
        latency_p95_ratio: 1.0,
        queries: 2000,
        seed: 424_242,
        ..SynthPoolSpec::default()
    });
    config.router_params.window = window;
    config.router_params.lambda_defl = 0.0;
    EnvCore::assemble(config, table, Path::new(".")).expect("fixture pool is valid")
}

// ---------------------------------------------------------------------------
// Latency calibration
// ---------------------------------------------------------------------------

/// Nine (p50, p95) millisecond profiles spanning tight, moderate, and
/// heavy-tailed shapes across three latency regimes; used to check that
/// fitted samplers reproduce the quantiles they were anchored to.
pub const CALIBRATION_PROFILES: [(f64, f64); 9] = [
    (1477.0, 2817.0),
    (76.0, 87.0),
    (79.0, 159.0),
    (715.0, 809.0),
    (316.0, 405.0),
    (305.0, 482.0),
    (2737.0, 3415.0),
    (2483.0, 2927.0),
    (1955.0, 2903.0),
];

/// Sampled-vs-configured quantiles for one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub p50_target: f64,
    pub p50_sampled: f64,
    pub p95_target: f64,
    pub p95_sampled: f64,
}

impl CalibrationRow {
    pub fn within(&self, p50_rel: f64, p95_rel: f64) -> bool {
        (self.p50_sampled / self.p50_target - 1.0).abs() <= p50_rel
            && (self.p95_sampled / self.p95_target - 1.0).abs() <= p95_rel
    }
}

fn calibration_config() -> PoolConfig {
    let providers: Vec<ProviderSpec> = (0..CALIBRATION_PROFILES.len())
        .map(|i| ProviderSpec {
            name: format!("p{i}"),
            cost: None,
        })
        .collect();
    let latency_models = CALIBRATION_PROFILES
        .iter()
        .enumerate()
        .map(|(i, &(p50, p95))| {
            let state = LatencyStateSpec::Parametric {
                median_ms: p50,
                p95_ms: p95,
            };
            (
                format!("p{i}"),
                ProviderLatency {
                    idle: state.clone(),
                    moderate: state.clone(),
                    stressed: state,
                },
            )
        })
        .collect();
    PoolConfig {
        providers,
        feature_dim: 2,
        router_params: Default::default(),
        additive_params: Default::default(),
        latency_models,
        load_schedule: Default::default(),
        response_table: String::new(),
        query_stream: QueryStreamSpec::Uniform,
        feature_source: Default::default(),
        judge: Default::default(),
        cooldown: Default::default(),
        policy_params: Default::default(),
        sla_ms: 1500.0,
    }
    .normalized()
}

/// Draws `draws` samples per profile from the fitted lognormal and
/// compares empirical p50/p95 against the configured anchors.
pub fn latency_calibration_rows(draws: usize, seed: u64) -> Vec<CalibrationRow> {
    assert!(draws >= 100, "too few draws for quantile estimates");
    let model = LatencyModel::from_config(&calibration_config());
    let mut r = rng::stream(seed, VERIFY_TAG.wrapping_add(4));
    let idle = LoadLevel::State(LoadState::Idle);
    CALIBRATION_PROFILES
        .iter()
        .enumerate()
        .map(|(i, &(p50, p95))| {
            let mut samples: Vec<f64> = (0..draws).map(|_| model.sample(i, &idle, &mut r)).collect();
            samples.sort_by(|a, b| a.partial_cmp(b).expect("finite latencies"));
            CalibrationRow {
                p50_target: p50,
                p50_sampled: samples[draws / 2],
                p95_target: p95,
                p95_sampled: samples[(draws as f64 * 0.95) as usize],
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Check suite
// ---------------------------------------------------------------------------

/// Which checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Scoring,
    Estimators,
    Regret,
    Separation,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        match name {
            "all" => Some(Suite::All),
            "scoring" => Some(Suite::Scoring),
            "estimators" => Some(Suite::Estimators),
            "regret" => Some(Suite::Regret),
            "separation" => Some(Suite::Separation),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Scoring => "scoring",
            Suite::Estimators => "estimators",
            Suite::Regret => "regret",
            Suite::Separation => "separation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    /// One line per check plus a summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(
                out,
                "{} {:<34} {:>7.2}s  {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.seconds,
                r.detail
            );
        }
        let failed = self.results.iter().filter(|r| !r.passed).count();
        let _ = writeln!(
            out,
            "suite '{}': {} checks, {} failed",
            self.suite.name(),
            self.results.len(),
            failed
        );
        out
    }
}

fn run_one(name: &'static str, f: impl FnOnce() -> (bool, String)) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = f();
    CheckResult {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the selected checks and reports per-check timing.
pub fn run_suite(suite: Suite) -> SuiteReport {
    let mut results = Vec::new();
    let all = suite == Suite::All;

    if all || suite == Suite::Scoring {
        results.push(run_one("score-example-values", check_score_examples));
        results.push(run_one("rate-characterisation", check_characterisation));
        results.push(run_one(
            "quality-oracle-agreement",
            check_quality_oracle_agreement,
        ));
    }
    if all || suite == Suite::Separation {
        results.push(run_one(
            "separation-interval-example",
            check_separation_example,
        ));
        results.push(run_one("separation-enumeration", check_separation_scan));
    }
    if all || suite == Suite::Estimators {
        results.push(run_one("incremental-inverse-drift", check_inverse_drift));
        results.push(run_one("ridge-shrinkage-closed-form", check_shrinkage));
        results.push(run_one("ema-update-chain", check_ema_chain));
        results.push(run_one("latency-calibration", check_latency_calibration));
        results.push(run_one("differential-decisions", check_differential));
    }
    if all || suite == Suite::Regret {
        results.push(run_one("stationary-value-example", check_stationary_values));
        results.push(run_one("always-best-zero-regret", check_always_best));
        results.push(run_one("uniform-control-linear-regret", check_uniform_control));
        results.push(run_one("optimistic-rate-log-regret", check_optimistic_regret));
    }
    SuiteReport { suite, results }
}

fn check_score_examples() -> (bool, String) {
    let params = AdditiveParams {
        alpha: 0.4,
        latency_cap_ms: Some(1500.0),
    };
    let add_fast = additive_score(0.1, 0.0, &params);
    let add_slow = additive_score(0.65, 1500.0, &params);
    let rate_slow = renewal_score(0.65, 1500.0, 1500.0);
    let rate_fast = renewal_score(0.1, 0.0, 1500.0);
    let pass = (add_fast - 0.04).abs() < 1e-12
        && (add_slow + 0.34).abs() < 1e-12
        && (rate_slow - 0.325).abs() < 1e-12
        && (rate_fast - 0.1).abs() < 1e-12
        && add_fast > add_slow
        && rate_slow > rate_fast;
    (
        pass,
        format!(
            "additive {add_fast:.4}/{add_slow:.4} favors fast arm; rate {rate_slow:.4}/{rate_fast:.4} favors useful arm"
        ),
    )
}

fn check_characterisation() -> (bool, String) {
    let a1 = characterisation_properties(1.0, 10_000, 7);
    let a2 = characterisation_properties(2.0, 10_000, 7);
    let pass = a1.structural_pass()
        && a1.cycle_calibrated
        && a2.structural_pass()
        && !a2.cycle_calibrated;
    (
        pass,
        format!(
            "a=1 structural+calibration pass; a=2 structural pass, calibration fails as expected ({} samples)",
            a1.samples
        ),
    )
}

fn check_quality_oracle_agreement() -> (bool, String) {
    let mut disagreements = 0usize;
    let mut queries_checked = 0usize;
    for seed in 0..20u64 {
        let mut r = rng::stream(seed, VERIFY_TAG.wrapping_add(5));
        let k = r.random_range(2..=4usize);
        let medians: Vec<f64> = (0..k).map(|_| r.random_range(150.0..2000.0)).collect();
        let (mut config, table) = make_synthetic_pool(&SynthPoolSpec {
            means: (0..k).map(|_| r.random_range(0.2..0.9)).collect(),
            latency_medians_ms: medians.clone(),
            latency_p95_ratio: 1.0,
            queries: 40,
            seed: r.random(),
            ..SynthPoolSpec::default()
        });
        // Half the instances carry distinct costs to exercise the cost
        // tie-break; the rest fall through to the index rule.
        let table = if seed % 2 == 0 {
            let costs: Vec<f64> = (0..k).map(|_| r.random_range(0.1..2.0)).collect();
            for (p, &c) in config.providers.iter_mut().zip(&costs) {
                p.cost = Some(c);
            }
            let rows = table
                .query_ids()
                .iter()
                .map(|q| (q.clone(), table.qualities(q).expect("table row").to_vec()));
            ResponseTable::from_rows(rows, Some(costs))
        } else {
            table
        };
        let slo = r.random_range(100.0..2500.0);
        config.policy_params.slo_ms = slo;
        let core =
            EnvCore::assemble(config, table, Path::new(".")).expect("synthetic pool is valid");
        let env = Environment::new(Arc::clone(&core), LoadPattern::Stationary, 1, seed)
            .expect("one-round episode");

        let expected = brute_force_quality_oracle(&core.table, &medians, slo);
        let mut policy = QualityOraclePolicy::new(env.view(), slo, true);
        let active = vec![true; k];
        for (q, &want) in core.table.query_ids().to_vec().iter().zip(&expected) {
            let ctx = QueryContext {
                query_id: q.clone(),
                features: vec![0.0; core.config.feature_dim],
                text: None,
            };
            queries_checked += 1;
            if policy.select(1, &ctx, &active).chosen != want {
                disagreements += 1;
            }
        }
    }
    (
        disagreements == 0,
        format!("{queries_checked} queries across 20 pools, {disagreements} disagreements"),
    )
}

fn check_separation_example() -> (bool, String) {
    let inst = SeparationInstance {
        alpha: 0.4,
        u2: 0.1,
        tau1_norm: 1.0,
        tau2_norm: 0.0,
    };
    let interval = separation_interval(&inst);
    let pass = matches!(interval, Some((lo, hi)) if (lo - 0.1).abs() < 1e-12 && (hi - 1.5).abs() < 1e-12);
    let empty = separation_interval(&SeparationInstance {
        alpha: 0.9,
        u2: 0.9,
        tau1_norm: 1.0,
        tau2_norm: 0.0,
    })
    .is_none();
    (
        pass && empty,
        format!("interval {interval:?} matches (0.1, 1.5); dominant-quality-weight case empty"),
    )
}

fn check_separation_scan() -> (bool, String) {
    let scan = separation_enumeration(10_000, 11);
    (
        scan.counterexamples == 0 && scan.points_tested > 1_000,
        format!(
            "{} instances, {} with nonempty interval, {} interior points, {} counterexamples",
            scan.instances, scan.with_interval, scan.points_tested, scan.counterexamples
        ),
    )
}

fn check_inverse_drift() -> (bool, String) {
    let worst = inverse_drift_check(5_000, 16, 50, 5);
    (
        worst < 1e-8,
        format!("max |maintained - direct| = {worst:.3e} over 5000 ops (d=16, W=50)"),
    )
}

fn check_shrinkage() -> (bool, String) {
    let mut head = WindowedRidgeHead::with_target_bounds(2, 1.0, 1_000, 0.0, 1.0);
    let x = [1.0, 0.0];
    let y = 0.8;
    let mut worst = 0.0f64;
    for n in 1..=100usize {
        head.update(&x, y);
        if [1, 3, 10, 100].contains(&n) {
            let want_mean = y * n as f64 / (n as f64 + 1.0);
            let want_width = (1.0 / (n as f64 + 1.0)).sqrt();
            worst = worst.max((head.predict(&x) - want_mean).abs());
            worst = worst.max((head.uncertainty(&x) - want_width).abs());
        }
    }
    (
        worst < 1e-9,
        format!("ridge shrinkage n/(n+1) and width 1/sqrt(n+1): max dev {worst:.3e}"),
    )
}

fn check_ema_chain() -> (bool, String) {
    let mut ema = EmaLatency::new(0.0, 0.2);
    ema.update(500.0);
    let first = ema.estimate();
    let mut chain = Vec::new();
    for _ in 0..3 {
        ema.update(100.0);
        chain.push(ema.estimate());
    }
    let pass = (first - 500.0).abs() < 1e-9
        && (chain[0] - 420.0).abs() < 1e-9
        && (chain[1] - 356.0).abs() < 1e-9
        && (chain[2] - 304.8).abs() < 1e-9;
    (
        pass,
        format!("first sample replaces prior; 500 then 3x100 at rho=0.2 -> {chain:?}"),
    )
}

fn check_latency_calibration() -> (bool, String) {
    let rows = latency_calibration_rows(100_000, 3);
    let worst_p50 = rows
        .iter()
        .map(|r| (r.p50_sampled / r.p50_target - 1.0).abs())
        .fold(0.0, f64::max);
    let worst_p95 = rows
        .iter()
        .map(|r| (r.p95_sampled / r.p95_target - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.within(0.03, 0.05));
    (
        pass,
        format!(
            "{} profiles at 1e5 draws: worst p50 err {:.2}%, worst p95 err {:.2}%",
            rows.len(),
            worst_p50 * 100.0,
            worst_p95 * 100.0
        ),
    )
}

fn check_differential() -> (bool, String) {
    let mut rounds = 0usize;
    for seed in 0..20u64 {
        match differential_decision_check(seed) {
            Ok(n) => rounds += n,
            Err(m) => {
                return (
                    false,
                    format!(
                        "seed {seed} round {} production chose {} (scores {:?}) but reference chose {} (scores {:?})",
                        m.round,
                        m.production_chosen,
                        m.production_scores,
                        m.reference_chosen,
                        m.reference_scores
                    ),
                )
            }
        }
    }
    (
        true,
        format!("20 randomized instances, {rounds} lockstep rounds, zero mismatches"),
    )
}

fn check_stationary_values() -> (bool, String) {
    let sv = stationary_v_values(&[(0.65, 1500.0), (0.1, 0.0)], 1500.0);
    let pass = sv.best == 0
        && (sv.values[0] - 0.325).abs() < 1e-12
        && (sv.values[1] - 0.1).abs() < 1e-12
        && (sv.gaps[1] - 0.225).abs() < 1e-12;
    (
        pass,
        format!("values {:?}, gaps {:?}", sv.values, sv.gaps),
    )
}

fn check_always_best() -> (bool, String) {
    let core = regret_fixture(10_000);
    let stats = regret_growth_check(
        &core,
        &|_| Box::new(StaticPolicy::new(0, 3)),
        &[500, 1000],
        &(0..5).collect::<Vec<_>>(),
    )
    .expect("valid growth request");
    (
        stats.mean_regret.iter().all(|&r| r == 0.0),
        format!("pinned best arm: mean regret {:?}", stats.mean_regret),
    )
}

fn check_uniform_control() -> (bool, String) {
    let core = regret_fixture(10_000);
    let stats = regret_growth_check(
        &core,
        &|seed| Box::new(UniformRandomPolicy::new(3, seed)),
        &[5_000, 10_000],
        &(0..20).collect::<Vec<_>>(),
    )
    .expect("valid growth request");
    let pass = (stats.ratio - 2.0).abs() <= 0.1 && !stats.log_like;
    (
        pass,
        format!(
            "R_5000 = {:.1}, R_10000 = {:.1}, ratio {:.3} (linear control)",
            stats.mean_regret[0], stats.mean_regret[1], stats.ratio
        ),
    )
}

fn check_optimistic_regret() -> (bool, String) {
    let core = regret_fixture(10_000);
    let min_gap = {
        let sv = stationary_v_values(
            &[(0.9, 300.0), (0.6, 300.0), (0.3, 300.0)],
            core.config.router_params.l_ref_ms,
        );
        sv.gaps
            .iter()
            .filter(|&&g| g > 0.0)
            .fold(f64::INFINITY, |a, &b| a.min(b))
    };
    let params = core.config.router_params.clone();
    let stats = regret_growth_check(
        &core,
        &|_| Box::new(LqmOnlyPolicy::new(3, &params, QualityAveraging::Window)),
        &[5_000, 10_000],
        &(0..20).collect::<Vec<_>>(),
    )
    .expect("valid growth request");
    let pass = stats.ratio <= 1.6 && stats.log_like && min_gap >= 0.1;
    (
        pass,
        format!(
            "min value gap {:.3}; R_5000 = {:.1}, R_10000 = {:.1}, ratio {:.3}",
            min_gap, stats.mean_regret[0], stats.mean_regret[1], stats.ratio
        ),
    )
}
