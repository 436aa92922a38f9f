//! Integration tests across the policy zoo, the environment, and the
//! harness: bandit-feedback isolation, seed determinism, oracle
//! dominance, rate-versus-additive traffic structure, and metric-row
//! normalization.

use std::path::Path;
use std::sync::Arc;

use poolroute::harness::{
    aggregate, compute_metrics, gap_slice_report, run_episode, run_grid, sweep, GroupKey,
    MetricsRow, RunGrid, SweepAxis,
};
use poolroute::routers::{build_policy, POLICY_NAMES};
use poolroute::simenv::{make_synthetic_pool, EnvCore, Environment, QualityKind, SynthPoolSpec};
use poolroute::verify::v_regret_trace;
use poolroute::domain::{LoadPattern, PoolConfig, ResponseTable};

/// Every concrete policy name, with the documented `static:<idx>`
/// placeholder instantiated.
fn all_policies() -> Vec<String> {
    POLICY_NAMES
        .iter()
        .map(|name| {
            if *name == "static:<idx>" {
                "static:1".to_string()
            } else {
                name.to_string()
            }
        })
        .collect()
}

fn synth_core(spec: &SynthPoolSpec) -> (Arc<EnvCore>, PoolConfig, ResponseTable) {
    let (config, table) = make_synthetic_pool(spec);
    let core = EnvCore::assemble(config.clone(), table.clone(), Path::new(".")).expect("valid pool");
    (core, config, table)
}

/// Three providers spread in both quality and latency, so no policy is
/// trivially optimal.
fn heterogeneous_core() -> Arc<EnvCore> {
    let (core, _, _) = synth_core(&SynthPoolSpec {
        means: vec![0.7, 0.5, 0.2],
        queries: 600,
        quality: QualityKind::Bernoulli,
        latency_medians_ms: vec![900.0, 400.0, 120.0],
        latency_p95_ratio: 1.6,
        seed: 11,
        ..SynthPoolSpec::default()
    });
    core
}

/// The additive-collapse pool: a fast useless arm against a slow strong
/// one whose latency sits at the additive cap.
fn collapse_core() -> (Arc<EnvCore>, ResponseTable) {
    let (core, _, table) = synth_core(&SynthPoolSpec {
        means: vec![0.1, 0.65],
        queries: 800,
        quality: QualityKind::Beta { concentration: 8.0 },
        latency_medians_ms: vec![30.0, 1500.0],
        latency_p95_ratio: 1.0,
        seed: 13,
        ..SynthPoolSpec::default()
    });
    (core, table)
}

fn mean_shares(rows: &[MetricsRow], policy: &str) -> Vec<f64> {
    let member_rows: Vec<&MetricsRow> = rows.iter().filter(|r| r.policy == policy).collect();
    assert!(!member_rows.is_empty(), "no rows for {policy}");
    let k = member_rows[0].shares.len();
    let mut shares = vec![0.0; k];
    for row in &member_rows {
        for (acc, s) in shares.iter_mut().zip(&row.shares) {
            *acc += s;
        }
    }
    shares.iter().map(|s| s / member_rows.len() as f64).collect()
}

// ---------------------------------------------------------------------------
// Bandit-feedback isolation
// ---------------------------------------------------------------------------

// Feedback must leave every arm other than the observed one bit-identical,
// for each policy, on every round of a live episode.
#[test]
fn feedback_touches_only_the_chosen_arm() {
    let core = heterogeneous_core();
    for name in all_policies() {
        let mut env =
            Environment::new(Arc::clone(&core), LoadPattern::Step, 40, 5).expect("valid env");
        let mut policy = build_policy(&name, &core.config, &env.view(), 5).expect("known policy");
        let active = vec![true; core.num_providers()];
        for t in 1..=40u64 {
            let ctx = env.context(t).clone();
            let decision = policy.select(t, &ctx, &active);
            let before = policy.arm_snapshots();
            let outcome = env.step(&decision);
            policy.feedback(&outcome.observation);
            let after = policy.arm_snapshots();
            assert_eq!(before.len(), after.len());
            for (i, (b, a)) in before.iter().zip(&after).enumerate() {
                if i != decision.chosen {
                    assert_eq!(b, a, "{name}: feedback for arm {} mutated arm {i}", decision.chosen);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Determinism
// ---------------------------------------------------------------------------

// The same (config, policy, pattern, seed) cell must reproduce the exact
// trace, including sampled latencies and judged rewards.
#[test]
fn episodes_are_seed_deterministic_for_every_policy() {
    let core = heterogeneous_core();
    for name in all_policies() {
        for pattern in [LoadPattern::Spike, LoadPattern::Gradual] {
            let a = run_episode(&core, &name, pattern, 60, 9).expect("episode runs");
            let b = run_episode(&core, &name, pattern, 60, 9).expect("episode runs");
            assert_eq!(a, b, "{name} diverged on {pattern:?} at a fixed seed");
        }
    }
}

// ---------------------------------------------------------------------------
// Rate rule vs. additive rule traffic structure
// ---------------------------------------------------------------------------

// A useless instant arm against a useful arm priced at the reference
// latency: the rate-scored router must keep nearly all traffic on the
// useful arm, while the additive rule at quality weight 0.4 tips to the
// useless fast one.
#[test]
fn rate_rule_keeps_traffic_on_the_useful_slow_arm() {
    let (core, config, _) = synth_core(&SynthPoolSpec {
        means: vec![0.0, 0.6],
        queries: 600,
        quality: QualityKind::Bernoulli,
        latency_medians_ms: vec![1.0, 1500.0],
        latency_p95_ratio: 1.0,
        seed: 21,
        ..SynthPoolSpec::default()
    });

    let grid = RunGrid {
        policies: vec!["lqm-cr".to_string()],
        patterns: vec![LoadPattern::Stationary],
        seeds: 20,
        rounds: 2000,
        ..RunGrid::defaults(1500.0)
    };
    let rows = run_grid(&core, &grid).expect("grid runs");
    let lqm_shares = mean_shares(&rows, "lqm-cr");
    assert!(
        lqm_shares[1] > 0.95,
        "rate router put only {:.3} on the useful arm",
        lqm_shares[1]
    );

    let mut additive_config = config;
    additive_config.additive_params.alpha = 0.4;
    let additive_core = core.with_config(additive_config).expect("sibling core");
    let grid = RunGrid {
        policies: vec!["sw-ucb".to_string()],
        ..grid
    };
    let rows = run_grid(&additive_core, &grid).expect("grid runs");
    let ucb_shares = mean_shares(&rows, "sw-ucb");
    assert!(
        ucb_shares[0] > 0.5,
        "additive baseline put only {:.3} on the fast useless arm",
        ucb_shares[0]
    );
}

// ---------------------------------------------------------------------------
// Oracle dominance
// ---------------------------------------------------------------------------

// With an unbinding latency budget, the table oracle's mean true quality
// is an upper bound for every policy in every (pattern, seed) cell, and
// on stationary load the latency oracle's mean latency lower-bounds the
// non-oracles up to sampling noise.
#[test]
fn oracles_bound_the_field() {
    let base = heterogeneous_core();
    let mut config = base.config.clone();
    config.policy_params.slo_ms = 1.0e9;
    let core = base.with_config(config).expect("sibling core");

    let grid = RunGrid {
        policies: all_policies(),
        patterns: vec![LoadPattern::Stationary, LoadPattern::Step],
        seeds: 50,
        ..RunGrid::defaults(1500.0)
    };
    let rows = run_grid(&core, &grid).expect("grid runs");

    for row in &rows {
        let oracle = rows
            .iter()
            .find(|r| {
                r.policy == "quality-oracle" && r.pattern == row.pattern && r.seed == row.seed
            })
            .expect("oracle row per cell");
        assert!(
            oracle.mean_true_quality >= row.mean_true_quality - 1e-12,
            "{} beat the table oracle on {:?} seed {} ({:.4} > {:.4})",
            row.policy,
            row.pattern,
            row.seed,
            row.mean_true_quality,
            oracle.mean_true_quality
        );
    }

    let stationary_mean_latency = |policy: &str| {
        let members: Vec<f64> = rows
            .iter()
            .filter(|r| r.policy == policy && r.pattern == LoadPattern::Stationary)
            .map(|r| r.mean_latency_ms)
            .collect();
        members.iter().sum::<f64>() / members.len() as f64
    };
    let floor = stationary_mean_latency("latency-oracle");
    for name in all_policies() {
        if name.contains("oracle") {
            continue;
        }
        let latency = stationary_mean_latency(&name);
        assert!(
            floor <= latency * 1.05,
            "latency oracle ({floor:.1} ms) above {name} ({latency:.1} ms)"
        );
    }
}

// ---------------------------------------------------------------------------
// Collapse fixture: frontier, gap slices, quality-weight sweep
// ---------------------------------------------------------------------------

// On the collapse pool the rate router holds the quality end of the
// frontier, the latency oracle the speed end, and the per-bin slice shows
// the additive baseline's extra traffic on the weak arm exactly where the
// table gap is large.
#[test]
fn collapse_fixture_frontier_and_gap_slices() {
    let (core, table) = collapse_core();
    let seeds = 0..20u64;
    let rounds = 500;

    let mut traces_lqm = Vec::new();
    let mut traces_ucb = Vec::new();
    let mut traces_oracle = Vec::new();
    for seed in seeds {
        for (name, bucket) in [
            ("lqm-cr", &mut traces_lqm),
            ("sw-ucb", &mut traces_ucb),
            ("latency-oracle", &mut traces_oracle),
        ] {
            bucket.push(
                run_episode(&core, name, LoadPattern::Stationary, rounds, seed)
                    .expect("episode runs"),
            );
        }
    }

    let mean_quality = |traces: &Vec<_>| {
        let rows: Vec<MetricsRow> = traces
            .iter()
            .map(|t| compute_metrics(t, &core, 1500.0))
            .collect();
        aggregate(&rows, GroupKey::Policy)[0].clone()
    };
    let lqm = mean_quality(&traces_lqm);
    let ucb = mean_quality(&traces_ucb);
    let oracle = mean_quality(&traces_oracle);
    assert!(
        lqm.mean_true_quality >= ucb.mean_true_quality - 0.005,
        "rate router below the additive baseline in quality ({:.3} vs {:.3})",
        lqm.mean_true_quality,
        ucb.mean_true_quality
    );
    assert!(
        lqm.mean_latency_ms >= oracle.mean_latency_ms - 1.0,
        "rate router below the latency oracle in latency ({:.1} vs {:.1})",
        lqm.mean_latency_ms,
        oracle.mean_latency_ms
    );

    let report = gap_slice_report(&table, &traces_lqm, &traces_ucb, 0.1);
    assert_eq!(report.weak_arm, 0);
    let large = &report.bins[2];
    assert!(large.queries > 0, "collapse pool has no large-gap queries");
    assert!(
        large.weak_share_delta_pp() < 0.0,
        "rate router sent more weak-arm traffic than the baseline in the large bin ({:+.1} pp)",
        large.weak_share_delta_pp()
    );

    // Raising the quality weight must pull the additive baseline's
    // quality up on this pool.
    let grid = RunGrid {
        policies: vec!["sw-ucb".to_string()],
        patterns: vec![LoadPattern::Stationary],
        seeds: 10,
        rounds: 300,
        ..RunGrid::defaults(1500.0)
    };
    let points = sweep(&core, &grid, SweepAxis::Alpha, &[0.1, 0.5, 0.9]).expect("sweep runs");
    let qualities: Vec<f64> = points
        .iter()
        .map(|p| p.summaries[0].mean_true_quality)
        .collect();
    assert!(
        qualities.windows(2).all(|w| w[1] >= w[0] - 0.01),
        "additive quality not monotone in the quality weight: {qualities:?}"
    );
    assert!(
        qualities[2] > qualities[0] + 0.2,
        "quality weight sweep too flat: {qualities:?}"
    );
}

// ---------------------------------------------------------------------------
// Metric-row normalization
// ---------------------------------------------------------------------------

// Every produced row is well formed: shares are a distribution, the SLA
// fraction is a fraction, and regret is a nonnegative sum of nonnegative
// per-round gaps.
#[test]
fn metric_rows_are_normalized_everywhere() {
    let core = heterogeneous_core();
    let grid = RunGrid {
        policies: all_policies(),
        patterns: LoadPattern::ALL.to_vec(),
        seeds: 5,
        rounds: 120,
        ..RunGrid::defaults(1500.0)
    };
    let rows = run_grid(&core, &grid).expect("grid runs");
    assert_eq!(rows.len(), 10 * 5 * 5);
    for row in &rows {
        let total: f64 = row.shares.iter().sum();
        assert!((total - 1.0).abs() <= 1e-9, "shares sum to {total}");
        assert!(row.shares.iter().all(|&s| (0.0..=1.0 + 1e-9).contains(&s)));
        assert!((0.0..=1.0).contains(&row.sla_frac));
        assert!(row.regret >= -1e-9, "negative regret {}", row.regret);
    }

    // Per-round regret decomposition on one episode per pattern.
    for pattern in LoadPattern::ALL {
        let trace = run_episode(&core, "round-robin", pattern, 120, 3).expect("episode runs");
        let regret = v_regret_trace(&trace, &core);
        assert!(regret.instantaneous.iter().all(|&d| d >= 0.0));
        assert!(regret
            .cumulative_by_round
            .windows(2)
            .all(|w| w[1] >= w[0]));
    }

    // Aggregation pools exactly the right cells.
    let summaries = aggregate(&rows, GroupKey::PolicyPattern);
    assert_eq!(summaries.len(), 10 * 5);
    assert!(summaries.iter().all(|s| s.episodes == 5));
}
