//! `poolroute` command line: experiment grids, parameter sweeps, the
//! self-verification suite, synthetic pool generation, and result-file
//! summarization.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or
//! usage error. Results are deterministic in the seed flags; reruns with
//! identical flags produce byte-identical output files. Flags marked
//! with an env name can also be set via `POOLROUTE_*` variables.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use poolroute::domain::LoadPattern;
use poolroute::harness::{
    aggregate, parse_results_csv, render_summary, run_grid, sweep, write_results, GroupKey,
    OutputFormat, RunGrid, SweepAxis,
};
use poolroute::routers::POLICY_NAMES;
use poolroute::simenv::{
    load_pool, make_synthetic_pool, write_table_file, EnvCore, QualityKind, SynthPoolSpec,
};
use poolroute::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "poolroute",
    version = poolroute::VERSION,
    about = "Latency-aware quality routing over provider pools",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 config/usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (policy x pattern x seed) experiment grid on a pool
    Run(RunArgs),
    /// Re-run the grid at several values of one scoring parameter
    Sweep(SweepArgs),
    /// Run the self-verification checks
    Verify(VerifyArgs),
    /// Generate a synthetic pool config and response table
    MakePool(MakePoolArgs),
    /// Summarize a results CSV written by `run`
    Report(ReportArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Pool config file (JSON)
    #[arg(long, env = "POOLROUTE_CONFIG")]
    config: PathBuf,
    /// Comma-separated policy names; defaults to every built-in policy
    #[arg(long, value_delimiter = ',')]
    policies: Vec<String>,
    /// Comma-separated load patterns; defaults to step,rotation,spike,gradual
    #[arg(long, value_delimiter = ',')]
    patterns: Vec<String>,
    /// Episodes per (policy, pattern) cell
    #[arg(long, default_value_t = 50, env = "POOLROUTE_SEEDS")]
    seeds: u64,
    /// First episode seed; cells use seed_base..seed_base+seeds
    #[arg(long, default_value_t = 0, env = "POOLROUTE_SEED_BASE")]
    seed_base: u64,
    /// Rounds per episode
    #[arg(long, default_value_t = 200, env = "POOLROUTE_ROUNDS")]
    rounds: usize,
    /// SLA threshold (ms) for the sla_frac metric; defaults to the config's sla_ms
    #[arg(long, env = "POOLROUTE_SLA_MS")]
    sla_ms: Option<f64>,
    /// Worker threads; 0 uses all available cores
    #[arg(long, default_value_t = 0, env = "POOLROUTE_JOBS")]
    jobs: usize,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Write per-episode results to this file
    #[arg(long, env = "POOLROUTE_OUT")]
    out: Option<PathBuf>,
    /// Output file format: csv (per-episode rows) or text (summary)
    #[arg(long, default_value = "csv", env = "POOLROUTE_FORMAT")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Swept parameter: alpha | l_ref
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    /// Write the sweep summary blocks to this file
    #[arg(long, env = "POOLROUTE_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check suite: all | scoring | estimators | regret | separation
    #[arg(default_value = "all")]
    suite: String,
}

#[derive(Args)]
struct MakePoolArgs {
    /// Comma-separated per-provider mean qualities in [0, 1]
    #[arg(long, value_delimiter = ',', required = true)]
    means: Vec<f64>,
    /// Comma-separated idle median latencies (ms); defaults to 300 each
    #[arg(long, value_delimiter = ',')]
    medians: Vec<f64>,
    /// p95/p50 ratio within each load state
    #[arg(long, default_value_t = 1.6)]
    p95_ratio: f64,
    /// Moderate-state median as a multiple of idle
    #[arg(long, default_value_t = 1.5)]
    moderate_factor: f64,
    /// Stressed-state median as a multiple of idle
    #[arg(long, default_value_t = 4.0)]
    stressed_factor: f64,
    /// Number of table queries
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    /// Beta quality spread (concentration); 0/1 outcomes when omitted
    #[arg(long)]
    beta_concentration: Option<f64>,
    /// Table generation seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Basename: writes <name>.json and <name>_table.csv
    #[arg(long, default_value = "pool")]
    name: String,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV produced by `run`
    #[arg(long)]
    input: PathBuf,
    /// Aggregation granularity: policy | policy-pattern
    #[arg(long, default_value = "policy-pattern")]
    by: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::MakePool(args) => cmd_make_pool(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn default_policies() -> Vec<String> {
    POLICY_NAMES
        .iter()
        .map(|name| {
            if *name == "static:<idx>" {
                "static".to_string()
            } else {
                name.to_string()
            }
        })
        .collect()
}

fn parse_patterns(names: &[String]) -> Result<Vec<LoadPattern>, String> {
    names
        .iter()
        .map(|name| {
            LoadPattern::parse(name).ok_or_else(|| {
                let valid: Vec<&str> = LoadPattern::ALL.iter().map(|p| p.name()).collect();
                format!("unknown load pattern '{name}'; valid: {}", valid.join(", "))
            })
        })
        .collect()
}

fn build_grid(args: &GridArgs, core: &EnvCore) -> Result<RunGrid, String> {
    let mut grid = RunGrid::defaults(args.sla_ms.unwrap_or(core.config.sla_ms));
    grid.policies = if args.policies.is_empty() {
        default_policies()
    } else {
        args.policies.clone()
    };
    if !args.patterns.is_empty() {
        grid.patterns = parse_patterns(&args.patterns)?;
    }
    grid.seeds = args.seeds;
    grid.seed_base = args.seed_base;
    grid.rounds = args.rounds;
    grid.jobs = args.jobs;
    Ok(grid)
}

fn write_text(path: &PathBuf, body: &str) -> Result<(), String> {
    std::fs::write(path, body).map_err(|e| format!("i/o error on {}: {e}", path.display()))
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, String> {
    let format = OutputFormat::parse(&args.format)
        .ok_or_else(|| format!("unknown format '{}'; valid: csv, text", args.format))?;
    let core = load_pool(&args.grid.config).map_err(|e| e.to_string())?;
    let grid = build_grid(&args.grid, &core)?;
    let hash = core.config.config_hash();
    let started = Instant::now();
    let rows = run_grid(&core, &grid).map_err(|e| e.to_string())?;
    if let Some(out) = &args.out {
        write_results(out, &rows, core.num_providers(), &hash, format)
            .map_err(|e| e.to_string())?;
        println!("wrote {} episode rows to {}", rows.len(), out.display());
    }
    print!(
        "{}",
        render_summary(&aggregate(&rows, GroupKey::PolicyPattern), &hash)
    );
    println!(
        "{} episodes in {:.1}s",
        rows.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, String> {
    let axis = SweepAxis::parse(&args.axis)
        .ok_or_else(|| format!("unknown sweep axis '{}'; valid: alpha, l_ref", args.axis))?;
    if args.values.is_empty() {
        return Err("sweep needs at least one --values entry".to_string());
    }
    let core = load_pool(&args.grid.config).map_err(|e| e.to_string())?;
    let grid = build_grid(&args.grid, &core)?;
    let points = sweep(&core, &grid, axis, &args.values).map_err(|e| e.to_string())?;

    let mut body = String::new();
    for point in &points {
        // Header each block with the swept sibling's own config hash.
        let mut config = core.config.clone();
        match axis {
            SweepAxis::Alpha => config.additive_params.alpha = point.value,
            SweepAxis::LRef => config.router_params.l_ref_ms = point.value,
        }
        let _ = writeln!(body, "== {} = {} ==", axis.name(), point.value);
        body.push_str(&render_summary(&point.summaries, &config.config_hash()));
        body.push('\n');
    }
    print!("{body}");
    if let Some(out) = &args.out {
        write_text(out, &body)?;
        println!("wrote sweep summary to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, String> {
    let suite = Suite::parse(&args.suite).ok_or_else(|| {
        format!(
            "unknown suite '{}'; valid: all, scoring, estimators, regret, separation",
            args.suite
        )
    })?;
    let started = Instant::now();
    let report = run_suite(suite);
    print!("{}", report.render());
    println!("total {:.2}s", started.elapsed().as_secs_f64());
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_make_pool(args: &MakePoolArgs) -> Result<ExitCode, String> {
    let k = args.means.len();
    if args.means.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(format!("--means must lie in [0, 1], got {:?}", args.means));
    }
    let medians = if args.medians.is_empty() {
        vec![300.0; k]
    } else {
        args.medians.clone()
    };
    if medians.len() != k {
        return Err(format!(
            "--medians needs one entry per provider ({} means, {} medians)",
            k,
            medians.len()
        ));
    }
    if medians.iter().any(|m| *m <= 0.0) {
        return Err(format!("--medians must be positive, got {medians:?}"));
    }
    if args.p95_ratio < 1.0 {
        return Err(format!("--p95-ratio must be >= 1, got {}", args.p95_ratio));
    }
    if args.moderate_factor < 1.0 || args.stressed_factor < 1.0 {
        return Err("--moderate-factor and --stressed-factor must be >= 1".to_string());
    }
    if args.queries == 0 {
        return Err("--queries must be at least 1".to_string());
    }
    let quality = match args.beta_concentration {
        Some(c) if c <= 0.0 => {
            return Err(format!("--beta-concentration must be positive, got {c}"))
        }
        Some(c) => QualityKind::Beta { concentration: c },
        None => QualityKind::Bernoulli,
    };

    let (mut config, table) = make_synthetic_pool(&SynthPoolSpec {
        means: args.means.clone(),
        latency_medians_ms: medians,
        latency_p95_ratio: args.p95_ratio,
        moderate_factor: args.moderate_factor,
        stressed_factor: args.stressed_factor,
        queries: args.queries,
        quality,
        seed: args.seed,
        ..SynthPoolSpec::default()
    });
    let table_name = format!("{}_table.csv", args.name);
    config.response_table = table_name.clone();

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| format!("i/o error on {}: {e}", args.out_dir.display()))?;
    let table_path = args.out_dir.join(&table_name);
    write_table_file(&table_path, &table.to_raw(&config.provider_names()))
        .map_err(|e| e.to_string())?;
    let config_path = args.out_dir.join(format!("{}.json", args.name));
    config
        .write_to_path(&config_path)
        .map_err(|e| e.to_string())?;

    // Round-trip through the loader so what we report is what runs.
    let core: Arc<EnvCore> = load_pool(&config_path).map_err(|e| e.to_string())?;
    println!(
        "wrote {} ({} providers) and {} ({} queries)",
        config_path.display(),
        core.num_providers(),
        table_path.display(),
        core.table.num_queries()
    );
    println!("config_hash={}", core.config.config_hash());
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: &ReportArgs) -> Result<ExitCode, String> {
    let key = match args.by.as_str() {
        "policy" => GroupKey::Policy,
        "policy-pattern" => GroupKey::PolicyPattern,
        other => {
            return Err(format!(
                "unknown grouping '{other}'; valid: policy, policy-pattern"
            ))
        }
    };
    let origin = args.input.display().to_string();
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("i/o error on {origin}: {e}"))?;
    let rows = parse_results_csv(&text, &origin).map_err(|e| e.to_string())?;
    let hash = text
        .lines()
        .next()
        .and_then(|line| line.strip_prefix("# config_hash="))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap_or("unknown")
        .to_string();
    print!("{}", render_summary(&aggregate(&rows, key), &hash));
    Ok(ExitCode::SUCCESS)
}
