//! Episode execution, metrics, multi-seed aggregation, parameter sweeps,
//! and result-file round trips.
//!
//! An episode is one policy driven through one realized environment:
//! select, step, feedback, T times. Cells of the (policy, pattern, seed)
//! grid are independent, so the grid runner parallelizes them and merges
//! results by grid index, never by completion order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::domain::{LoadPattern, ResponseTable, RoutingDecision};
use crate::routers::{build_policy, Policy};
use crate::simenv::{EnvCore, Environment, LoadLevel};
use crate::verify;
use crate::Error;

/// Everything observed in one round of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub query_id: String,
    /// Per-provider load levels this round.
    pub load: Vec<LoadLevel>,
    pub decision: RoutingDecision,
    pub latency_ms: f64,
    /// Reward the policy saw (judge output).
    pub judged_quality: f64,
    /// Table quality metrics are computed on.
    pub true_quality: f64,
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub policy: String,
    pub pattern: LoadPattern,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
}

/// Drives a policy through a realized environment, all providers active.
pub fn run_episode_with(env: &mut Environment, policy: &mut dyn Policy) -> EpisodeTrace {
    let rounds = env.rounds();
    let active = vec![true; env.num_providers()];
    let mut records = Vec::with_capacity(rounds);
    for t in 1..=rounds as u64 {
        let ctx = env.context(t).clone();
        let decision = policy.select(t, &ctx, &active);
        debug_assert!(
            decision
                .per_provider_scores
                .iter()
                .zip(&active)
                .filter(|(_, &a)| a)
                .all(|(&s, _)| s <= decision.per_provider_scores[decision.chosen]),
            "chosen provider does not attain the maximal score"
        );
        let outcome = env.step(&decision);
        policy.feedback(&outcome.observation);
        records.push(RoundRecord {
            round: t,
            query_id: ctx.query_id,
            load: env.load_levels(t),
            decision,
            latency_ms: outcome.observation.latency_ms,
            judged_quality: outcome.observation.quality,
            true_quality: outcome.true_quality,
        });
    }
    EpisodeTrace {
        policy: policy.name().to_string(),
        pattern: env.schedule().pattern(),
        seed: env.seed(),
        rounds: records,
    }
}

/// Runs one (policy, pattern, seed) cell on a shared core.
pub fn run_episode(
    core: &Arc<EnvCore>,
    policy_name: &str,
    pattern: LoadPattern,
    rounds: usize,
    seed: u64,
) -> Result<EpisodeTrace, Error> {
    let mut env = Environment::new(Arc::clone(core), pattern, rounds, seed)?;
    let mut policy = build_policy(policy_name, &core.config, &env.view(), seed)?;
    Ok(run_episode_with(&mut env, policy.as_mut()))
}

/// Per-episode metrics, one CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub policy: String,
    pub pattern: LoadPattern,
    pub seed: u64,
    pub mean_true_quality: f64,
    pub mean_latency_ms: f64,
    /// Fraction of rounds with latency at or below the SLA threshold.
    pub sla_frac: f64,
    /// Cumulative rate-value regret over the episode.
    pub regret: f64,
    /// Traffic share per provider; sums to 1.
    pub shares: Vec<f64>,
}

/// Reduces a trace to its metrics row. Regret is computed against the
/// true per-provider rate values under each round's load state.
pub fn compute_metrics(trace: &EpisodeTrace, core: &EnvCore, sla_ms: f64) -> MetricsRow {
    let t = trace.rounds.len();
    assert!(t > 0, "empty trace");
    let n = t as f64;
    let mut quality = 0.0;
    let mut latency = 0.0;
    let mut within_sla = 0usize;
    let mut counts = vec![0usize; core.num_providers()];
    for rec in &trace.rounds {
        quality += rec.true_quality;
        latency += rec.latency_ms;
        if rec.latency_ms <= sla_ms {
            within_sla += 1;
        }
        counts[rec.decision.chosen] += 1;
    }
    let shares: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    debug_assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let regret = verify::v_regret_trace(trace, core).cumulative;
    MetricsRow {
        policy: trace.policy.clone(),
        pattern: trace.pattern,
        seed: trace.seed,
        mean_true_quality: quality / n,
        mean_latency_ms: latency / n,
        sla_frac: within_sla as f64 / n,
        regret,
        shares,
    }
}

/// The (policy, pattern, seed) grid of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunGrid {
    pub policies: Vec<String>,
    pub patterns: Vec<LoadPattern>,
    /// Number of seeds; episode seeds are seed_base..seed_base+seeds.
    pub seeds: u64,
    pub seed_base: u64,
    pub rounds: usize,
    pub sla_ms: f64,
    /// Worker threads; 0 uses the library default.
    pub jobs: usize,
}

impl RunGrid {
    /// Standard evaluation shape: 200 rounds, 50 seeds, the four dynamic
    /// load patterns.
    pub fn defaults(sla_ms: f64) -> Self {
        RunGrid {
            policies: Vec::new(),
            patterns: vec![
                LoadPattern::Step,
                LoadPattern::Rotation,
                LoadPattern::Spike,
                LoadPattern::Gradual,
            ],
            seeds: 50,
            seed_base: 0,
            rounds: 200,
            sla_ms,
            jobs: 0,
        }
    }
}

/// Executes the full grid. Rows come back ordered by (policy, pattern,
/// seed) grid index regardless of scheduling.
pub fn run_grid(core: &Arc<EnvCore>, grid: &RunGrid) -> Result<Vec<MetricsRow>, Error> {
    if grid.policies.is_empty() {
        return Err(Error::InvalidRequest("no policies requested".into()));
    }
    if grid.patterns.is_empty() {
        return Err(Error::InvalidRequest("no load patterns requested".into()));
    }
    if grid.seeds == 0 {
        return Err(Error::InvalidRequest("seeds must be at least 1".into()));
    }
    if grid.rounds == 0 {
        return Err(Error::InvalidRequest("rounds must be at least 1".into()));
    }
    if grid.sla_ms <= 0.0 {
        return Err(Error::InvalidRequest("sla_ms must be positive".into()));
    }

    // Resolve every policy name before spending any compute.
    {
        let probe = Environment::new(Arc::clone(core), grid.patterns[0], 1, grid.seed_base)?;
        let view = probe.view();
        for name in &grid.policies {
            build_policy(name, &core.config, &view, grid.seed_base)?;
        }
    }

    let mut cells = Vec::new();
    for policy in &grid.policies {
        for &pattern in &grid.patterns {
            for seed in grid.seed_base..grid.seed_base + grid.seeds {
                cells.push((policy.clone(), pattern, seed));
            }
        }
    }

    let run_cells = || -> Result<Vec<MetricsRow>, Error> {
        cells
            .par_iter()
            .map(|(policy, pattern, seed)| {
                let trace = run_episode(core, policy, *pattern, grid.rounds, *seed)?;
                Ok(compute_metrics(&trace, core, grid.sla_ms))
            })
            .collect()
    };
    if grid.jobs == 0 {
        run_cells()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(grid.jobs)
            .build()
            .map_err(|e| Error::InvalidRequest(format!("thread pool: {e}")))?;
        pool.install(run_cells)
    }
}

/// Aggregation granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    /// One summary row per policy (all patterns pooled).
    Policy,
    /// One summary row per (policy, pattern) pair.
    PolicyPattern,
}

/// Mean and sample standard deviation of a metric group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    /// Pattern name, or "all" when pooled across patterns.
    pub pattern: String,
    pub episodes: usize,
    pub mean_true_quality: f64,
    pub std_true_quality: f64,
    pub mean_latency_ms: f64,
    pub std_latency_ms: f64,
    pub mean_sla_frac: f64,
    pub std_sla_frac: f64,
    pub mean_regret: f64,
    pub std_regret: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0);
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Groups rows and reports mean and sample standard deviation per
/// metric. Output order is lexicographic in (policy, pattern).
pub fn aggregate(rows: &[MetricsRow], key: GroupKey) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String), Vec<&MetricsRow>> = BTreeMap::new();
    for row in rows {
        let pattern = match key {
            GroupKey::Policy => "all".to_string(),
            GroupKey::PolicyPattern => row.pattern.name().to_string(),
        };
        groups
            .entry((row.policy.clone(), pattern))
            .or_default()
            .push(row);
    }
    groups
        .into_iter()
        .map(|((policy, pattern), members)| {
            let collect = |f: fn(&MetricsRow) -> f64| -> Vec<f64> {
                members.iter().map(|r| f(r)).collect()
            };
            let (mean_true_quality, std_true_quality) =
                mean_std(&collect(|r| r.mean_true_quality));
            let (mean_latency_ms, std_latency_ms) = mean_std(&collect(|r| r.mean_latency_ms));
            let (mean_sla_frac, std_sla_frac) = mean_std(&collect(|r| r.sla_frac));
            let (mean_regret, std_regret) = mean_std(&collect(|r| r.regret));
            SummaryRow {
                policy,
                pattern,
                episodes: members.len(),
                mean_true_quality,
                std_true_quality,
                mean_latency_ms,
                std_latency_ms,
                mean_sla_frac,
                std_sla_frac,
                mean_regret,
                std_regret,
            }
        })
        .collect()
}

/// Default split between the "mild" and "large" top-2 quality gap bins.
pub const DEFAULT_GAP_SPLIT: f64 = 0.1;

/// Per-bin comparison of two policies on queries sliced by their top-2
/// provider quality gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapBin {
    pub label: &'static str,
    /// Queries of the table falling in this bin.
    pub queries: usize,
    pub rounds_a: usize,
    pub rounds_b: usize,
    pub mean_quality_a: f64,
    pub mean_quality_b: f64,
    pub weak_share_a: f64,
    pub weak_share_b: f64,
}

impl GapBin {
    /// Mean-quality advantage of policy A, in percentage points.
    pub fn quality_delta_pp(&self) -> f64 {
        (self.mean_quality_a - self.mean_quality_b) * 100.0
    }

    /// Weak-arm traffic-share difference of policy A, in percentage points.
    pub fn weak_share_delta_pp(&self) -> f64 {
        (self.weak_share_a - self.weak_share_b) * 100.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSliceReport {
    pub gap_split: f64,
    /// Provider with the lowest mean table quality.
    pub weak_arm: usize,
    /// Bins: zero gap, mild (0, split], large (split, 1].
    pub bins: Vec<GapBin>,
}

fn gap_bin_index(gap: f64, split: f64) -> usize {
    if gap == 0.0 {
        0
    } else if gap <= split {
        1
    } else {
        2
    }
}

/// Slices rounds of two policies' traces by the chosen query's top-2
/// quality gap and compares per-bin quality and weak-arm share.
pub fn gap_slice_report(
    table: &ResponseTable,
    traces_a: &[EpisodeTrace],
    traces_b: &[EpisodeTrace],
    gap_split: f64,
) -> GapSliceReport {
    assert!(gap_split > 0.0, "gap split must be positive");
    let weak_arm = table.weak_arm();
    let mut queries = [0usize; 3];
    for q in table.query_ids() {
        let gap = table.top2_gap(q).expect("query from table");
        queries[gap_bin_index(gap, gap_split)] += 1;
    }

    // [bin][policy] -> (rounds, quality sum, weak-arm picks)
    let mut acc = [[(0usize, 0.0f64, 0usize); 2]; 3];
    for (side, traces) in [traces_a, traces_b].into_iter().enumerate() {
        for trace in traces {
            for rec in &trace.rounds {
                let gap = table
                    .top2_gap(&rec.query_id)
                    .expect("trace query missing from table");
                let slot = &mut acc[gap_bin_index(gap, gap_split)][side];
                slot.0 += 1;
                slot.1 += rec.true_quality;
                slot.2 += usize::from(rec.decision.chosen == weak_arm);
            }
        }
    }

    let bins = ["zero", "mild", "large"]
        .into_iter()
        .enumerate()
        .map(|(b, label)| {
            let (ra, qa, wa) = acc[b][0];
            let (rb, qb, wb) = acc[b][1];
            let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
            GapBin {
                label,
                queries: queries[b],
                rounds_a: ra,
                rounds_b: rb,
                mean_quality_a: ratio(qa, ra),
                mean_quality_b: ratio(qb, rb),
                weak_share_a: ratio(wa as f64, ra),
                weak_share_b: ratio(wb as f64, rb),
            }
        })
        .collect();
    GapSliceReport {
        gap_split,
        weak_arm,
        bins,
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Quality weight of the additive composite reward.
    Alpha,
    /// Reference latency of the rate score.
    LRef,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Option<SweepAxis> {
        match name {
            "alpha" => Some(SweepAxis::Alpha),
            "l_ref" | "l-ref" => Some(SweepAxis::LRef),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::LRef => "l_ref",
        }
    }
}

/// Grid results at one swept value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// One summary row per policy, pooled over patterns and seeds.
    pub summaries: Vec<SummaryRow>,
}

/// Runs the full grid once per axis value on a reparameterized sibling
/// of the core.
pub fn sweep(
    core: &Arc<EnvCore>,
    grid: &RunGrid,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepPoint>, Error> {
    values
        .iter()
        .map(|&value| {
            let mut config = core.config.clone();
            match axis {
                SweepAxis::Alpha => config.additive_params.alpha = value,
                SweepAxis::LRef => config.router_params.l_ref_ms = value,
            }
            let sibling = core.with_config(config)?;
            let rows = run_grid(&sibling, grid)?;
            Ok(SweepPoint {
                value,
                summaries: aggregate(&rows, GroupKey::Policy),
            })
        })
        .collect()
}

/// Result-file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Text,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Option<OutputFormat> {
        match name {
            "csv" => Some(OutputFormat::Csv),
            "text" => Some(OutputFormat::Text),
            _ => None,
        }
    }
}

fn provenance_line(config_hash: &str) -> String {
    format!("# config_hash={config_hash} version={}\n", crate::VERSION)
}

/// Renders per-episode rows as CSV with a provenance header line.
/// Column order: policy, pattern, seed, mean_true_quality,
/// mean_latency_ms, sla_frac, regret, share_0..share_{K-1}.
pub fn results_to_csv(rows: &[MetricsRow], k: usize, config_hash: &str) -> String {
    let mut out = provenance_line(config_hash);
    out.push_str("policy,pattern,seed,mean_true_quality,mean_latency_ms,sla_frac,regret");
    for i in 0..k {
        let _ = write!(out, ",share_{i}");
    }
    out.push('\n');
    for row in rows {
        assert_eq!(row.shares.len(), k, "share count must match the pool");
        let _ = write!(
            out,
            "{},{},{},{:.6},{:.3},{:.6},{:.6}",
            row.policy,
            row.pattern.name(),
            row.seed,
            row.mean_true_quality,
            row.mean_latency_ms,
            row.sla_frac,
            row.regret
        );
        for share in &row.shares {
            let _ = write!(out, ",{share:.6}");
        }
        out.push('\n');
    }
    out
}

/// Parses a results CSV produced by [`results_to_csv`]. Values carry the
/// file's fixed decimal precision.
pub fn parse_results_csv(text: &str, origin: &str) -> Result<Vec<MetricsRow>, Error> {
    let mut rows = Vec::new();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(origin, "missing header"))?;
    let columns: Vec<&str> = header.split(',').collect();
    let fixed = ["policy", "pattern", "seed", "mean_true_quality", "mean_latency_ms", "sla_frac", "regret"];
    if columns.len() < fixed.len() || columns[..fixed.len()] != fixed {
        return Err(Error::parse(origin, format!("unexpected header '{header}'")));
    }
    let k = columns.len() - fixed.len();
    for (index, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::parse(
                origin,
                format!("row {} has {} fields, expected {}", index + 1, fields.len(), columns.len()),
            ));
        }
        let num = |i: usize| -> Result<f64, Error> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| Error::parse(origin, format!("bad number '{}' in row {}", fields[i], index + 1)))
        };
        let pattern = LoadPattern::parse(fields[1])
            .ok_or_else(|| Error::parse(origin, format!("unknown pattern '{}'", fields[1])))?;
        let seed = fields[2]
            .parse::<u64>()
            .map_err(|_| Error::parse(origin, format!("bad seed '{}'", fields[2])))?;
        let mut shares = Vec::with_capacity(k);
        for i in 0..k {
            shares.push(num(fixed.len() + i)?);
        }
        rows.push(MetricsRow {
            policy: fields[0].to_string(),
            pattern,
            seed,
            mean_true_quality: num(3)?,
            mean_latency_ms: num(4)?,
            sla_frac: num(5)?,
            regret: num(6)?,
            shares,
        });
    }
    Ok(rows)
}

/// Renders aggregated summaries as aligned structured text with the same
/// provenance header as the CSV writer.
pub fn render_summary(summaries: &[SummaryRow], config_hash: &str) -> String {
    let mut out = provenance_line(config_hash);
    let _ = writeln!(
        out,
        "{:<16} {:<12} {:>4}  {:>17} {:>19} {:>15} {:>15}",
        "policy", "pattern", "n", "quality", "latency_ms", "sla_frac", "regret"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<16} {:<12} {:>4}  {:>8.4}\u{b1}{:<8.4} {:>10.1}\u{b1}{:<8.1} {:>7.4}\u{b1}{:<7.4} {:>7.2}\u{b1}{:<7.2}",
            s.policy,
            s.pattern,
            s.episodes,
            s.mean_true_quality,
            s.std_true_quality,
            s.mean_latency_ms,
            s.std_latency_ms,
            s.mean_sla_frac,
            s.std_sla_frac,
            s.mean_regret,
            s.std_regret
        );
    }
    out
}

/// Writes rows in the requested format; `Text` writes the per-(policy,
/// pattern) summary instead of raw rows.
pub fn write_results(
    path: &Path,
    rows: &[MetricsRow],
    k: usize,
    config_hash: &str,
    format: OutputFormat,
) -> Result<(), Error> {
    let body = match format {
        OutputFormat::Csv => results_to_csv(rows, k, config_hash),
        OutputFormat::Text => render_summary(&aggregate(rows, GroupKey::PolicyPattern), config_hash),
    };
    std::fs::write(path, body).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simenv::{make_synthetic_pool, SynthPoolSpec};

    fn small_core() -> Arc<EnvCore> {
        let (config, table) = make_synthetic_pool(&SynthPoolSpec {
            means: vec![0.8, 0.5, 0.2],
            latency_medians_ms: vec![200.0, 300.0, 400.0],
            queries: 60,
            seed: 11,
            ..SynthPoolSpec::default()
        });
        EnvCore::assemble(config, table, Path::new(".")).unwrap()
    }

    #[test]
    fn static_episode_is_one_hot_and_deterministic() {
        let core = small_core();
        let a = run_episode(&core, "static:1", LoadPattern::Stationary, 50, 3).unwrap();
        let b = run_episode(&core, "static:1", LoadPattern::Stationary, 50, 3).unwrap();
        assert_eq!(a, b);
        let m = compute_metrics(&a, &core, 1500.0);
        assert_eq!(m.shares, vec![0.0, 1.0, 0.0]);
        assert_eq!(a.rounds.len(), 50);
    }

    #[test]
    fn round_robin_shares_split_the_horizon_evenly() {
        let core = small_core();
        let trace = run_episode(&core, "round-robin", LoadPattern::Stationary, 200, 0).unwrap();
        let m = compute_metrics(&trace, &core, 1500.0);
        assert_eq!(m.shares, vec![66.0 / 200.0, 67.0 / 200.0, 67.0 / 200.0]);
    }

    #[test]
    fn sla_fraction_counts_rounds_within_budget() {
        let (config, table) = make_synthetic_pool(&SynthPoolSpec {
            means: vec![0.5],
            latency_medians_ms: vec![100.0],
            queries: 3,
            seed: 0,
            ..SynthPoolSpec::default()
        });
        let core = EnvCore::assemble(config, table, Path::new(".")).unwrap();
        let mut trace = run_episode(&core, "static:0", LoadPattern::Stationary, 3, 0).unwrap();
        for (rec, lat) in trace.rounds.iter_mut().zip([400.0, 1600.0, 1000.0]) {
            rec.latency_ms = lat;
        }
        let m = compute_metrics(&trace, &core, 1500.0);
        assert!((m.sla_frac - 2.0 / 3.0).abs() < 1e-12);
        // Single-provider pool: best arm is the chosen arm, zero regret.
        assert_eq!(m.regret, 0.0);
    }

    #[test]
    fn aggregate_reports_mean_and_sample_std() {
        let row = |q: f64, seed: u64| MetricsRow {
            policy: "p".into(),
            pattern: LoadPattern::Step,
            seed,
            mean_true_quality: q,
            mean_latency_ms: 100.0,
            sla_frac: 1.0,
            regret: 0.0,
            shares: vec![1.0],
        };
        let rows = vec![row(0.2, 0), row(0.4, 1)];
        let summary = aggregate(&rows, GroupKey::PolicyPattern);
        assert_eq!(summary.len(), 1);
        assert!((summary[0].mean_true_quality - 0.3).abs() < 1e-12);
        assert!(summary[0].std_true_quality > 0.0);
        assert_eq!(summary[0].std_latency_ms, 0.0);
        assert_eq!(summary[0].episodes, 2);

        let identical = vec![row(0.5, 0); 50];
        let summary = aggregate(&identical, GroupKey::Policy);
        assert_eq!(summary[0].pattern, "all");
        assert_eq!(summary[0].std_true_quality, 0.0);
    }

    #[test]
    fn gap_bins_split_zero_mild_large() {
        let table = ResponseTable::from_rows(
            vec![
                ("a".to_string(), vec![0.5, 0.5]),
                ("b".to_string(), vec![0.5, 0.45]),
                ("c".to_string(), vec![0.8, 0.4]),
            ],
            None,
        );
        let trace = |policy: &str, picks: &[(usize, f64)]| EpisodeTrace {
            policy: policy.into(),
            pattern: LoadPattern::Stationary,
            seed: 0,
            rounds: picks
                .iter()
                .enumerate()
                .map(|(i, &(chosen, q))| RoundRecord {
                    round: i as u64 + 1,
                    query_id: ["a", "b", "c"][i % 3].to_string(),
                    load: vec![],
                    decision: RoutingDecision {
                        round: i as u64 + 1,
                        chosen,
                        per_provider_scores: vec![0.0, 0.0],
                        active_mask: vec![true, true],
                    },
                    latency_ms: 100.0,
                    judged_quality: q,
                    true_quality: q,
                })
                .collect(),
        };
        let a = trace("A", &[(0, 0.5), (0, 0.5), (0, 0.8)]);
        let b = trace("B", &[(1, 0.5), (1, 0.45), (1, 0.4)]);
        let report = gap_slice_report(&table, &[a], &[b], DEFAULT_GAP_SPLIT);
        assert_eq!(report.weak_arm, 1);
        let sizes: Vec<usize> = report.bins.iter().map(|b| b.queries).collect();
        assert_eq!(sizes, vec![1, 1, 1]);
        let large = &report.bins[2];
        assert!((large.quality_delta_pp() - 40.0).abs() < 1e-9);
        assert!((large.weak_share_delta_pp() + 100.0).abs() < 1e-9);
    }

    #[test]
    fn grid_runs_in_order_and_rejects_empty_requests() {
        let core = small_core();
        let grid = RunGrid {
            policies: vec!["static:0".into(), "round-robin".into()],
            patterns: vec![LoadPattern::Step],
            seeds: 3,
            seed_base: 5,
            rounds: 20,
            sla_ms: 1500.0,
            jobs: 2,
        };
        let rows = run_grid(&core, &grid).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].policy, "static:0");
        assert_eq!(rows[0].seed, 5);
        assert_eq!(rows[5].policy, "round-robin");
        assert_eq!(rows[5].seed, 7);
        // Deterministic under a different worker count.
        let rows_single = run_grid(
            &core,
            &RunGrid {
                jobs: 1,
                ..grid.clone()
            },
        )
        .unwrap();
        assert_eq!(rows, rows_single);

        let empty = RunGrid {
            policies: vec![],
            ..grid
        };
        assert!(matches!(
            run_grid(&core, &empty),
            Err(Error::InvalidRequest(_))
        ));
    }

    #[test]
    fn unknown_policy_fails_before_any_episode() {
        let core = small_core();
        let grid = RunGrid {
            policies: vec!["lqm-cr".into(), "bogus".into()],
            patterns: vec![LoadPattern::Step],
            seeds: 1,
            seed_base: 0,
            rounds: 10,
            sla_ms: 1500.0,
            jobs: 1,
        };
        assert!(matches!(
            run_grid(&core, &grid),
            Err(Error::UnknownPolicy { .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_stable_and_header_only_when_empty() {
        let core = small_core();
        let grid = RunGrid {
            policies: vec!["round-robin".into()],
            patterns: vec![LoadPattern::Spike],
            seeds: 2,
            seed_base: 0,
            rounds: 30,
            sla_ms: 1500.0,
            jobs: 1,
        };
        let rows = run_grid(&core, &grid).unwrap();
        let hash = core.config.config_hash();
        let text = results_to_csv(&rows, 3, &hash);
        let parsed = parse_results_csv(&text, "mem").unwrap();
        assert_eq!(parsed.len(), rows.len());
        assert_eq!(results_to_csv(&parsed, 3, &hash), text);
        for (p, r) in parsed.iter().zip(&rows) {
            assert_eq!(p.policy, r.policy);
            assert_eq!(p.seed, r.seed);
            assert!((p.mean_true_quality - r.mean_true_quality).abs() < 1e-6);
            assert_eq!(p.shares.len(), 3);
        }

        let empty = results_to_csv(&[], 3, &hash);
        let mut lines = empty.lines();
        assert!(lines.next().unwrap().starts_with("# config_hash="));
        assert_eq!(
            lines.next().unwrap(),
            "policy,pattern,seed,mean_true_quality,mean_latency_ms,sla_frac,regret,share_0,share_1,share_2"
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn sweep_emits_one_point_per_value() {
        let core = small_core();
        let grid = RunGrid {
            policies: vec!["lqm-cr".into()],
            patterns: vec![LoadPattern::Stationary],
            seeds: 1,
            seed_base: 0,
            rounds: 20,
            sla_ms: 1500.0,
            jobs: 1,
        };
        let points = sweep(&core, &grid, SweepAxis::LRef, &[750.0, 1500.0]).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].value, 750.0);
        assert_eq!(points[0].summaries.len(), 1);
        assert!(sweep(&core, &grid, SweepAxis::Alpha, &[]).unwrap().is_empty());
    }
}
