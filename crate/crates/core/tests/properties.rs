//! Property tests over the scoring kernel, the online estimators, config
//! serialization, and the environment primitives. Each block pins one
//! documented invariant under randomized inputs.

use std::collections::VecDeque;

use poolroute::domain::{JudgeSpec, LoadPattern, LoadScheduleSpec, PoolConfig};
use poolroute::estimators::{EmaLatency, WindowedRidgeHead, WindowedScalarStats};
use poolroute::scoring::{
    clamp01, gap_deflation, rankings_disagree, renewal_score, separation_interval, Arm,
    SeparationInstance,
};
use poolroute::simenv::{
    make_synthetic_pool, JudgeModel, LoadLevel, QualityKind, RealizedSchedule, SynthPoolSpec,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Rate score
// ---------------------------------------------------------------------------

proptest! {
    // Zero quality earns a zero score at any latency: speed never
    // compensates for a useless answer.
    #[test]
    fn zero_quality_never_scores(tau in 0.0f64..1.0e6, l_ref in 1.0f64..5000.0) {
        prop_assert_eq!(renewal_score(0.0, tau, l_ref), 0.0);
    }

    // Strictly increasing in quality, strictly decreasing in latency.
    #[test]
    fn score_orders_quality_up_and_latency_down(
        u in 0.01f64..=0.99,
        gap_u in 0.01f64..=0.01f64.recip(),
        tau in 0.0f64..20_000.0,
        gap_tau in 1.0f64..5000.0,
        l_ref in 100.0f64..5000.0,
    ) {
        let u_hi = (u + gap_u * (1.0 - u) / 100.0).min(1.0);
        prop_assume!(u_hi > u);
        prop_assert!(renewal_score(u_hi, tau, l_ref) > renewal_score(u, tau, l_ref));
        prop_assert!(renewal_score(u, tau, l_ref) > renewal_score(u, tau + gap_tau, l_ref));
    }

    // Rescaling latency and the reference together is a no-op: only the
    // latency-to-reference ratio enters the score.
    #[test]
    fn score_depends_only_on_the_latency_ratio(
        u in 0.0f64..=1.0,
        tau in 0.0f64..20_000.0,
        l_ref in 1.0f64..5000.0,
        c in 1.0e-3f64..1.0e3,
    ) {
        let base = renewal_score(u, tau, l_ref);
        let scaled = renewal_score(u, c * tau, c * l_ref);
        prop_assert!((base - scaled).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    // The score lives in [0, u]: latency discounts quality, never
    // subsidizes it.
    #[test]
    fn score_bounded_by_quality(
        u in 0.0f64..=1.0,
        tau in 0.0f64..1.0e6,
        l_ref in 1.0f64..5000.0,
    ) {
        let s = renewal_score(u, tau, l_ref);
        prop_assert!((0.0..=u).contains(&s));
    }
}

// ---------------------------------------------------------------------------
// Ranking disagreement interval
// ---------------------------------------------------------------------------

fn instance_strategy() -> impl Strategy<Value = SeparationInstance> {
    (
        0.05f64..=0.95,
        0.0f64..=1.0,
        0.01f64..=1.0,
        0.0f64..=0.999,
    )
        .prop_map(|(alpha, u2, tau1, frac)| SeparationInstance {
            alpha,
            u2,
            tau1_norm: tau1,
            tau2_norm: tau1 * frac,
        })
}

proptest! {
    // Inside the open interval the additive rule flips to the fast arm
    // while the rate rule holds the high-quality arm; outside its closure
    // that particular split never occurs.
    #[test]
    fn rules_split_exactly_on_the_interval(
        inst in instance_strategy(),
        raw in 0.0f64..=1.0,
    ) {
        let delta_u = raw * (1.0 - inst.u2);
        let margin = 1e-9;
        let verdict = rankings_disagree(&inst, delta_u);
        match separation_interval(&inst) {
            Some((lo, hi)) => {
                let hi_feasible = hi.min(1.0 - inst.u2);
                if delta_u > lo + margin && delta_u < hi_feasible - margin {
                    prop_assert_eq!(verdict, (Arm::Faster, Arm::HigherQuality));
                } else if delta_u < lo - margin || delta_u > hi + margin {
                    prop_assert_ne!(verdict, (Arm::Faster, Arm::HigherQuality));
                }
            }
            None => prop_assert_ne!(verdict, (Arm::Faster, Arm::HigherQuality)),
        }
    }

    // The best clamped estimate is never deflated, everything else is
    // divided by at least 1, and rescaling all estimates by a positive
    // constant keeps the leader's divisor at exactly 1.
    #[test]
    fn deflation_spares_the_leader(
        u_hats in proptest::collection::vec(0.0f64..=1.0, 1..8),
        lambda in 0.0f64..10.0,
        c in 0.01f64..100.0,
    ) {
        let best = u_hats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let leader = u_hats
            .iter()
            .position(|&u| u == best)
            .expect("nonempty estimates");

        let divisors = gap_deflation(&u_hats, lambda);
        for (&u, &d) in u_hats.iter().zip(&divisors) {
            prop_assert!(d >= 1.0);
            if u == best {
                prop_assert_eq!(d, 1.0);
            }
        }
        if lambda == 0.0 {
            prop_assert!(divisors.iter().all(|&d| d == 1.0));
        }

        // clamp01 is monotone, so the leader stays a leader after scaling.
        let scaled: Vec<f64> = u_hats.iter().map(|&u| c * u).collect();
        let scaled_divisors = gap_deflation(&scaled, lambda);
        let scaled_best = scaled.iter().copied().map(clamp01).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(clamp01(scaled[leader]), scaled_best);
        prop_assert_eq!(scaled_divisors[leader], 1.0);
    }
}

// ---------------------------------------------------------------------------
// Ridge head
// ---------------------------------------------------------------------------

fn ops_strategy(dim: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    proptest::collection::vec(
        (
            proptest::collection::vec(-1.0f64..=1.0, dim),
            0.0f64..=1.0,
        ),
        0..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // An incrementally maintained head is indistinguishable from one
    // built from scratch on the same final window contents.
    #[test]
    fn head_matches_a_scratch_build_of_its_window(
        (dim, capacity, seed) in (1usize..=5, 1usize..=10, any::<u64>()),
        raw in (1usize..=5).prop_flat_map(ops_strategy),
    ) {
        let _ = seed;
        let ops: Vec<(Vec<f64>, f64)> = raw
            .into_iter()
            .map(|(mut x, y)| {
                x.resize(dim, 0.0);
                (x, y)
            })
            .collect();

        let mut head = WindowedRidgeHead::new(dim, 1.0, capacity);
        let mut window: VecDeque<(Vec<f64>, f64)> = VecDeque::new();
        for (x, y) in &ops {
            if window.len() == capacity {
                window.pop_front();
            }
            window.push_back((x.clone(), *y));
            head.update(x, *y);
        }
        prop_assert_eq!(head.window_len(), window.len());

        let mut scratch = WindowedRidgeHead::new(dim, 1.0, capacity);
        for (x, y) in &window {
            scratch.update(x, *y);
        }
        for (a, b) in head.a_matrix().iter().zip(scratch.a_matrix()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in head.a_inverse().iter().zip(scratch.a_inverse()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        for probe in 0..dim {
            let mut e = vec![0.0; dim];
            e[probe] = 1.0;
            prop_assert!((head.predict(&e) - scratch.predict(&e)).abs() < 1e-9);
            prop_assert!((head.uncertainty(&e) - scratch.uncertainty(&e)).abs() < 1e-9);
        }
    }

    // A forced rebuild recomputes state from the window and must not
    // change what the head reports.
    #[test]
    fn rebuild_is_transparent(
        dim_and_ops in (1usize..=5).prop_flat_map(|d| (Just(d), ops_strategy(d))),
        probe_raw in proptest::collection::vec(-1.0f64..=1.0, 5),
    ) {
        let (dim, ops) = dim_and_ops;
        let probe = &probe_raw[..dim];
        let mut head = WindowedRidgeHead::new(dim, 1.0, 8);
        for (x, y) in &ops {
            head.update(x, *y);
        }
        let before = (head.predict(probe), head.uncertainty(probe));
        head.rebuild();
        prop_assert!((head.predict(probe) - before.0).abs() < 1e-9);
        prop_assert!((head.uncertainty(probe) - before.1).abs() < 1e-9);
    }

    // Revisiting the same point only sharpens the head there.
    #[test]
    fn uncertainty_never_rises_on_repeats(
        dim in 1usize..=6,
        reps in 1usize..=10,
        x_raw in proptest::collection::vec(-1.0f64..=1.0, 6),
        y in 0.0f64..=1.0,
    ) {
        let x = &x_raw[..dim];
        prop_assume!(x.iter().any(|&v| v != 0.0));
        // Capacity above reps: no evictions in this run.
        let mut head = WindowedRidgeHead::new(dim, 1.0, reps + 1);
        let mut last = head.uncertainty(x);
        for _ in 0..reps {
            head.update(x, y);
            let now = head.uncertainty(x);
            prop_assert!(now <= last + 1e-10);
            last = now;
        }
    }
}

// ---------------------------------------------------------------------------
// Scalar trackers
// ---------------------------------------------------------------------------

proptest! {
    // Once seeded, the EMA is a convex combination of observations and
    // can never leave their envelope.
    #[test]
    fn ema_stays_inside_the_observed_envelope(
        tau_init in 0.0f64..3000.0,
        rho in 0.01f64..=1.0,
        obs in proptest::collection::vec(0.0f64..5000.0, 1..30),
    ) {
        let mut ema = EmaLatency::new(tau_init, rho);
        for &tau in &obs {
            ema.update(tau);
        }
        let lo = obs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = obs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(ema.estimate() >= lo - 1e-9);
        prop_assert!(ema.estimate() <= hi + 1e-9);
    }

    // The maintained running sum agrees with a recount of the surviving
    // window, and the count never exceeds capacity.
    #[test]
    fn stats_mean_tracks_the_tail_window(
        capacity in 1usize..=16,
        values in proptest::collection::vec(0.0f64..=1.0, 0..48),
    ) {
        let mut stats = WindowedScalarStats::new(capacity);
        for &v in &values {
            stats.push(v);
        }
        let kept = &values[values.len().saturating_sub(capacity)..];
        prop_assert_eq!(stats.count(), kept.len());
        if kept.is_empty() {
            prop_assert_eq!(stats.mean(), 0.0);
        } else {
            let naive = kept.iter().sum::<f64>() / kept.len() as f64;
            prop_assert!((stats.mean() - naive).abs() < 1e-12);
        }
    }
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

fn judge_strategy() -> impl Strategy<Value = JudgeSpec> {
    prop_oneof![
        Just(JudgeSpec::Oracle),
        (0.0f64..=1.0).prop_map(|sigma| JudgeSpec::GaussianNoise { sigma }),
        (0.0f64..=1.0, 2usize..=9)
            .prop_map(|(sigma, levels)| JudgeSpec::Quantized { sigma, levels }),
    ]
}

fn pattern_strategy() -> impl Strategy<Value = LoadPattern> {
    proptest::sample::select(LoadPattern::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // The canonical form is a fixed point: parse(canonical(c)) renders
    // byte-identically, so the config hash is stable across round trips.
    #[test]
    fn canonical_json_round_trips_byte_stable(
        means in proptest::collection::vec(0.01f64..=0.99, 1..4),
        median in 10.0f64..2000.0,
        ratio in 1.0f64..3.0,
        alpha in 0.01f64..=0.99,
        l_ref in 100.0f64..5000.0,
        judge in judge_strategy(),
        pattern in pattern_strategy(),
        seed in any::<u64>(),
    ) {
        let k = means.len();
        let (mut config, _table) = make_synthetic_pool(&SynthPoolSpec {
            means,
            queries: 8,
            quality: QualityKind::Bernoulli,
            latency_medians_ms: vec![median; k],
            latency_p95_ratio: ratio,
            seed,
            ..SynthPoolSpec::default()
        });
        config.additive_params.alpha = alpha;
        config.router_params.l_ref_ms = l_ref;
        config.judge = judge;
        config.load_schedule.pattern = pattern;
        let config = config.normalized();

        let canon = config.canonical_json();
        let reparsed = PoolConfig::from_json_str(&canon, "prop").expect("canonical form parses");
        prop_assert_eq!(reparsed.canonical_json(), canon.clone());
        prop_assert_eq!(reparsed.config_hash(), config.config_hash());
    }
}

// ---------------------------------------------------------------------------
// Judge and load schedule
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Judge outputs are clipped to [0, 1] under any noise level, and the
    // noiseless modes reproduce the true quality exactly.
    #[test]
    fn judge_outputs_stay_clipped(
        u in 0.0f64..=1.0,
        sigma in 0.0f64..2.0,
        levels in 2usize..=9,
        seed in any::<u64>(),
    ) {
        let specs = [
            JudgeSpec::Oracle,
            JudgeSpec::GaussianNoise { sigma },
            JudgeSpec::Quantized { sigma, levels },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for spec in &specs {
            let judge = JudgeModel::from_spec(spec);
            for _ in 0..50 {
                let score = judge.score(u, &mut rng);
                prop_assert!((0.0..=1.0).contains(&score));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let oracle = JudgeModel::from_spec(&JudgeSpec::Oracle);
        prop_assert_eq!(oracle.score(u, &mut rng), u);
        let noiseless = JudgeModel::from_spec(&JudgeSpec::GaussianNoise { sigma: 0.0 });
        prop_assert_eq!(noiseless.score(u, &mut rng), u);
    }

    // Every pattern yields a total schedule: a load level for every
    // (round, provider) pair, severities inside [0, 1], and the same
    // realization for the same seed.
    #[test]
    fn schedules_are_total_bounded_and_deterministic(
        pattern in pattern_strategy(),
        rounds in 1usize..300,
        providers in 1usize..=5,
        target_raw in 0usize..5,
        p_spike in 0.0f64..0.3,
        burst in 1usize..10,
        seed in any::<u64>(),
    ) {
        let spec = LoadScheduleSpec {
            pattern,
            target: target_raw % providers,
            p_spike,
            burst,
        };
        let schedule = RealizedSchedule::realize(&spec, rounds, providers, seed);
        prop_assert_eq!(schedule.rounds(), rounds);
        for round in 1..=rounds as u64 {
            let row = schedule.load_row(round);
            prop_assert_eq!(row.len(), providers);
            for provider in 0..providers {
                let level = schedule.load_at(round, provider);
                prop_assert_eq!(level, row[provider]);
                if let LoadLevel::Severity(s) = level {
                    prop_assert!((0.0..=1.0).contains(&s));
                }
            }
        }
        let again = RealizedSchedule::realize(&spec, rounds, providers, seed);
        prop_assert_eq!(again, schedule);
    }
}
