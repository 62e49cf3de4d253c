//! Command-line front end: scenario loading, solver dispatch, and JSON/CSV
//! result emission.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible instance.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use filtkit::block::{self, SolverKind};
use filtkit::dist::{self, CoordinateOptions, RouterSpec};
use filtkit::dynamic::DynamicSolver;
use filtkit::exec::{configure_threads, Exec};
use filtkit::flooding::{self, FloodingInstance, StepSchedule};
use filtkit::traffic::{apply_weight_ratio, gen_workload, GenOptions, Role, ScenarioConfig, ScenarioPreset, WeightedAddressSet};
use filtkit::Error;
use report::{ConfigEcho, DistReport, InfeasibleReport, Metrics, RouterReport, RunReport, SCHEMA};

#[derive(Parser)]
#[command(name = "filtkit", version, about = "Optimal source-prefix filter selection")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one filtering problem and print a JSON report.
    Solve(SolveArgs),
    /// Solve across a budget range and print CSV rows (F, CD, UBIP, objective).
    Sweep(SweepArgs),
    /// Time the cover-everything solver over generated blacklists; CSV (N, median_runtime_ms).
    Bench(BenchArgs),
    /// Replay insert/remove operations against a persisted solver state.
    Update(UpdateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    BlockAll,
    BlockSome,
    Flooding,
    DistFlooding,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepProblem {
    BlockAll,
    BlockSome,
}

#[derive(Args)]
struct CommonArgs {
    /// Address width in bits (4..=32).
    #[arg(long, default_value_t = 32)]
    width: u8,
    /// Worker threads; 1 keeps execution fully deterministic and sequential.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seed for generators; echoed into reports (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Omit timing fields so identical inputs give byte-identical output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(value_enum)]
    problem: Problem,
    /// Blacklist file: one `address[,weight]` per line.
    #[arg(long)]
    bad: Option<PathBuf>,
    /// Whitelist file: one `address[,weight]` per line.
    #[arg(long)]
    good: Option<PathBuf>,
    #[arg(long)]
    f_max: Option<usize>,
    /// Link capacity for flooding problems (integer traffic quanta).
    #[arg(long)]
    capacity: Option<u64>,
    /// Uniform weighting ratio w_b/w_g applied to both sets before solving.
    #[arg(long)]
    weight_ratio: Option<f64>,
    /// Router scenario file (dist-flooding only).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Generate the workload from a scenario preset (builtin name or
    /// key-value file) instead of reading --bad/--good.
    #[arg(long)]
    preset: Option<String>,
    /// Coordination rounds (dist-flooding).
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    /// Relative duality-gap stop (dist-flooding).
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Solve flooding by Lagrangian relaxation instead of the exact DP.
    #[arg(long)]
    lagrangian: bool,
    /// Subgradient iterations (with --lagrangian).
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Initial step size; defaults to capacity / (traffic + 1).
    #[arg(long)]
    step0: Option<f64>,
    /// Write per-iteration (or per-round) records as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(value_enum)]
    problem: SweepProblem,
    #[arg(long)]
    bad: PathBuf,
    #[arg(long)]
    good: PathBuf,
    /// Inclusive budget range, e.g. 1..9.
    #[arg(long)]
    f_range: String,
    #[arg(long)]
    weight_ratio: Option<f64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Inclusive blacklist-size range swept by doubling, e.g. 12500..100000.
    #[arg(long)]
    n_range: String,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 1000)]
    f_max: usize,
    #[arg(long, default_value_t = 50)]
    clusters: u64,
    /// Generated whitelist size.
    #[arg(long, default_value_t = 1000)]
    good_n: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct UpdateArgs {
    /// State snapshot; created from --bad/--good when missing.
    #[arg(long)]
    state: PathBuf,
    /// Operations file: `insert ADDR[,w]` / `remove ADDR` lines.
    #[arg(long)]
    ops: PathBuf,
    #[arg(long)]
    bad: Option<PathBuf>,
    #[arg(long)]
    good: Option<PathBuf>,
    #[arg(long)]
    f_max: Option<usize>,
    /// Which problem the state tracks (when creating a new state).
    #[arg(long, value_enum, default_value_t = SweepProblem::BlockAll)]
    problem: SweepProblem,
    /// After the replay, compare against a fresh solve and report equality.
    #[arg(long)]
    verify: bool,
    /// Abort on the first per-op error instead of reporting inline.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    common: CommonArgs,
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Update(args) => cmd_update(args),
    };
    match result {
        Ok(code) => code,
        Err(err) if err.is_infeasible() => {
            let (reason, max_blockable) = match &err {
                Error::Infeasible { reason, max_blockable } => {
                    (reason.clone(), *max_blockable)
                }
                _ => unreachable!(),
            };
            let report = InfeasibleReport { schema: SCHEMA, error: "infeasible", reason, max_blockable };
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            2
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn load_sets(
    bad: Option<&Path>,
    good: Option<&Path>,
    width: u8,
    weight_ratio: Option<f64>,
) -> filtkit::Result<(WeightedAddressSet, WeightedAddressSet)> {
    let mut bad_set = match bad {
        Some(path) => WeightedAddressSet::load_path(path, Role::Bad, width)?,
        None => {
            return Err(Error::Scenario("--bad FILE is required for this problem".into()))
        }
    };
    let mut good_set = match good {
        Some(path) => WeightedAddressSet::load_path(path, Role::Good, width)?,
        None => WeightedAddressSet::new(width, Role::Good)?,
    };
    if let Some(ratio) = weight_ratio {
        apply_weight_ratio(&mut bad_set, &mut good_set, ratio)?;
    }
    Ok((bad_set, good_set))
}

fn cmd_solve(args: SolveArgs) -> filtkit::Result<i32> {
    let exec = configure_threads(args.common.threads);
    if args.problem == Problem::DistFlooding {
        return cmd_solve_dist(args, exec);
    }
    let (bad, good, width, f_max, capacity) = match &args.preset {
        Some(name) => {
            let mut preset = match ScenarioPreset::builtin(name) {
                Ok(p) => p,
                Err(_) => ScenarioPreset::parse_path(name)?,
            };
            if let Some(seed) = args.common.seed {
                preset.config.seed = seed;
            }
            let (bad, good) = preset.generate()?;
            let (mut bad, mut good) = (bad.set, good.set);
            if let Some(ratio) = args.weight_ratio {
                apply_weight_ratio(&mut bad, &mut good, ratio)?;
            }
            let f_max = args.f_max.unwrap_or(preset.config.f_max);
            let capacity = args.capacity.or(preset.config.capacity);
            (bad, good, preset.config.width, f_max, capacity)
        }
        None => {
            let (bad, good) = load_sets(
                args.bad.as_deref(),
                args.good.as_deref(),
                args.common.width,
                args.weight_ratio,
            )?;
            let f_max = args
                .f_max
                .ok_or_else(|| Error::Scenario("--f-max N is required".into()))?;
            (bad, good, args.common.width, f_max, args.capacity)
        }
    };
    let started = Instant::now();
    let (problem, solution, dual_bound) = match args.problem {
        Problem::BlockAll => ("block-all", block::solve_block_all(&bad, &good, f_max, exec)?, None),
        Problem::BlockSome => {
            ("block-some", block::solve_block_some(&bad, &good, f_max, exec)?, None)
        }
        Problem::Flooding => {
            let capacity = capacity
                .ok_or_else(|| Error::Scenario("--capacity C is required for flooding".into()))?;
            let instance = FloodingInstance::new(bad.clone(), good.clone(), f_max, capacity)?;
            if args.lagrangian {
                let result = flooding::solve_flooding_lagrangian(
                    &instance,
                    args.max_iters,
                    StepSchedule { step0: args.step0 },
                )?;
                if let Some(path) = &args.trace {
                    write_jsonl(path, result.trace.iter())?;
                }
                let primal = result.best_primal.ok_or_else(|| {
                    // Not a proof of infeasibility: the subgradient may
                    // simply not have converged to a feasible iterate.
                    Error::Scenario(format!(
                        "no capacity-feasible iterate in {} iterations (dual bound {:.3});                          raise --max-iters or use the exact solver",
                        args.max_iters, result.dual_bound
                    ))
                })?;
                ("flooding", primal, Some(result.dual_bound))
            } else {
                ("flooding", flooding::solve_flooding(&instance, exec)?, None)
            }
        }
        Problem::DistFlooding => unreachable!("handled above"),
    };
    let runtime_ms = (!args.common.no_timing).then(|| elapsed_ms(started));
    let report = RunReport {
        schema: SCHEMA,
        problem: problem.to_string(),
        config: ConfigEcho {
            bad: args.bad.as_ref().map(|p| p.display().to_string()),
            good: args.good.as_ref().map(|p| p.display().to_string()),
            scenario: args.preset.clone(),
            f_max: Some(f_max),
            width,
            capacity,
            weight_ratio: args.weight_ratio,
            threads: args.common.threads,
        },
        filters: report::filters_to_text(&solution.filters),
        metrics: Metrics::from(&solution),
        dual_bound,
        runtime_ms,
        seed: args.common.seed.unwrap_or(0),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(0)
}

fn cmd_solve_dist(args: SolveArgs, exec: Exec) -> filtkit::Result<i32> {
    let scenario_path = args
        .scenario
        .as_ref()
        .ok_or_else(|| Error::Scenario("--scenario FILE is required for dist-flooding".into()))?;
    let (routers, global_bad) = parse_scenario(scenario_path)?;
    let opts = CoordinateOptions {
        max_rounds: args.rounds,
        step0: args.step0,
        epsilon: args.epsilon,
    };
    let started = Instant::now();
    let result = dist::coordinate(&routers, &global_bad, &opts, exec)?;
    if let Some(path) = &args.trace {
        #[derive(serde::Serialize)]
        struct RoundRecord {
            k: usize,
            dual_value: f64,
            conflict_count: usize,
            recovered_total_cd: Option<u64>,
            price_total: f64,
        }
        let records: Vec<RoundRecord> = result
            .rounds
            .iter()
            .map(|r| RoundRecord {
                k: r.k,
                dual_value: r.dual_value,
                conflict_count: r.conflicts.len(),
                recovered_total_cd: r.recovered_total_cd,
                price_total: r.prices.total(),
            })
            .collect();
        write_jsonl(path, records.iter())?;
    }
    let runtime_ms = (!args.common.no_timing).then(|| elapsed_ms(started));
    let routers_report = result.assignments.as_ref().map(|assignment| {
        routers
            .iter()
            .zip(assignment)
            .map(|(spec, sol)| RouterReport {
                id: spec.id.clone(),
                filters: report::filters_to_text(&sol.filters),
                metrics: Metrics::from(sol),
            })
            .collect()
    });
    let report = DistReport {
        schema: SCHEMA,
        problem: "dist-flooding".to_string(),
        config: ConfigEcho {
            bad: None,
            good: None,
            scenario: Some(scenario_path.display().to_string()),
            f_max: None,
            width: global_bad.width(),
            capacity: None,
            weight_ratio: None,
            threads: args.common.threads,
        },
        routers: routers_report,
        total_collateral_damage: result.total_cd,
        dual_bound: result.dual_bound,
        gap: result.gap(),
        rounds_run: result.rounds.len(),
        recovery_failures: result.recovery_failures,
        runtime_ms,
        seed: args.common.seed.unwrap_or(0),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> filtkit::Result<i32> {
    let exec = configure_threads(args.common.threads);
    let (bad, good) = load_sets(
        Some(&args.bad),
        Some(&args.good),
        args.common.width,
        args.weight_ratio,
    )?;
    let (start, end) = parse_range(&args.f_range)?;
    let kind = match args.problem {
        SweepProblem::BlockAll => SolverKind::All,
        SweepProblem::BlockSome => SolverKind::Some,
    };
    let rows = block::sweep_filters(kind, &bad, &good, start as usize..=end as usize, exec)?;
    let mut csv = String::from("F,CD,UBIP,objective\n");
    for row in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.f, row.collateral_damage, row.unblocked_bad_count, row.objective
        ));
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> filtkit::Result<i32> {
    let exec = configure_threads(args.common.threads);
    let (start, end) = parse_range(&args.n_range)?;
    if start == 0 {
        return Err(Error::Scenario("bench sizes must be positive".into()));
    }
    let mut csv = String::from("N,median_runtime_ms\n");
    let mut n = start;
    while n <= end {
        let median = bench_block_all(
            n,
            args.clusters,
            args.good_n,
            args.f_max,
            args.common.width,
            args.common.seed.unwrap_or(0),
            args.trials,
            exec,
        )?;
        csv.push_str(&format!("{n},{median:.3}\n"));
        if n > end / 2 {
            break;
        }
        n *= 2;
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(0)
}

/// Median wall time of a full solve (tree build included) on a generated
/// clustered blacklist of size `n`.
#[allow(clippy::too_many_arguments)]
pub fn bench_block_all(
    n: u64,
    clusters: u64,
    good_n: u64,
    f_max: usize,
    width: u8,
    seed: u64,
    trials: usize,
    exec: Exec,
) -> filtkit::Result<f64> {
    let config = ScenarioConfig::new(width, f_max, None, 1.0, seed)?;
    let opts = GenOptions::defaults(width);
    let (bad, good) = gen_workload(&config, n, clusters.min(n), good_n, clusters.min(good_n), &opts)?;
    // One untimed warm-up solve keeps first-touch allocation out of the
    // measurement.
    std::hint::black_box(block::solve_block_all(&bad.set, &good.set, f_max, exec)?);
    let mut times: Vec<f64> = (0..trials.max(1))
        .map(|_| {
            let started = Instant::now();
            let sol = block::solve_block_all(&bad.set, &good.set, f_max, exec)?;
            std::hint::black_box(sol.collateral_damage);
            Ok(elapsed_ms(started))
        })
        .collect::<filtkit::Result<_>>()?;
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(times[times.len() / 2])
}

fn cmd_update(args: UpdateArgs) -> filtkit::Result<i32> {
    let exec = configure_threads(args.common.threads);
    let mut state = if args.state.exists() {
        let text = std::fs::read_to_string(&args.state)
            .map_err(|e| Error::Scenario(format!("cannot read state: {e}")))?;
        DynamicSolver::restore(&text, exec)?
    } else {
        let kind = match args.problem {
            SweepProblem::BlockAll => SolverKind::All,
            SweepProblem::BlockSome => SolverKind::Some,
        };
        let f_max = args.f_max.ok_or_else(|| {
            Error::Scenario("--f-max is required when creating a new state".into())
        })?;
        let (bad, good) =
            load_sets(args.bad.as_deref(), args.good.as_deref(), args.common.width, None)?;
        DynamicSolver::new(bad, good, kind, f_max, exec)?
    };

    let ops_text = std::fs::read_to_string(&args.ops)
        .map_err(|e| Error::Scenario(format!("cannot read ops: {e}")))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (idx, raw) in ops_text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let result = apply_op_line(&mut state, line, args.common.width);
        match result {
            Ok(report) => {
                #[derive(serde::Serialize)]
                struct OpRecord<'a> {
                    op_index: usize,
                    #[serde(flatten)]
                    report: &'a filtkit::dynamic::ChangeReport,
                }
                let record = OpRecord { op_index: idx + 1, report: &report };
                writeln!(out, "{}", serde_json::to_string(&record).expect("serializable"))
                    .map_err(|e| Error::Scenario(format!("stdout: {e}")))?;
            }
            Err(err) => {
                #[derive(serde::Serialize)]
                struct OpError {
                    op_index: usize,
                    error: String,
                }
                let record = OpError { op_index: idx + 1, error: err.to_string() };
                writeln!(out, "{}", serde_json::to_string(&record).expect("serializable"))
                    .map_err(|e| Error::Scenario(format!("stdout: {e}")))?;
                if args.strict {
                    return Err(err);
                }
            }
        }
    }

    if args.verify {
        #[derive(serde::Serialize)]
        struct VerifyRecord {
            verify: bool,
            objective: i64,
            fresh_objective: i64,
            equal: bool,
        }
        let objective = state.objective();
        let fresh_objective = state.fresh_objective()?;
        let record = VerifyRecord {
            verify: true,
            objective,
            fresh_objective,
            equal: objective == fresh_objective,
        };
        writeln!(out, "{}", serde_json::to_string(&record).expect("serializable"))
            .map_err(|e| Error::Scenario(format!("stdout: {e}")))?;
    }

    std::fs::write(&args.state, state.snapshot())
        .map_err(|e| Error::Scenario(format!("cannot write state: {e}")))?;
    Ok(0)
}

fn apply_op_line(
    state: &mut DynamicSolver,
    line: &str,
    width: u8,
) -> filtkit::Result<filtkit::dynamic::ChangeReport> {
    let (verb, rest) = line
        .split_once(char::is_whitespace)
        .ok_or_else(|| Error::Scenario(format!("bad op line {line:?}")))?;
    let rest = rest.trim();
    match verb {
        "insert" => {
            let (addr_s, weight) = match rest.split_once(',') {
                Some((a, w)) => {
                    let weight: u64 = w.trim().parse().map_err(|_| {
                        Error::Scenario(format!("bad weight in op {line:?}"))
                    })?;
                    (a.trim(), weight)
                }
                None => (rest, 1),
            };
            let value = filtkit::prefix::parse_address_text(addr_s, width)?;
            state.insert_ip(value, weight)
        }
        "remove" => {
            let value = filtkit::prefix::parse_address_text(rest, width)?;
            state.remove_ip(value)
        }
        other => Err(Error::Scenario(format!("unknown op {other:?}"))),
    }
}

/// Scenario file for dist-flooding: optional global `bad = FILE` and
/// `width = N`, then `[router ID]` sections with `f_max`, `capacity`,
/// `bad`, `good` keys. Paths are relative to the scenario file.
fn parse_scenario(path: &Path) -> filtkit::Result<(Vec<RouterSpec>, WeightedAddressSet)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Scenario(format!("cannot read scenario: {e}")))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut width: u8 = 32;
    let mut global_bad_path: Option<PathBuf> = None;

    struct Partial {
        id: String,
        f_max: Option<usize>,
        capacity: Option<u64>,
        bad: Option<PathBuf>,
        good: Option<PathBuf>,
    }
    let mut sections: Vec<Partial> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Scenario(format!("scenario line {}: {msg}", idx + 1));
        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| err("unterminated section header".into()))?;
            let id = header
                .strip_prefix("router ")
                .ok_or_else(|| err(format!("unknown section {header:?}")))?;
            sections.push(Partial {
                id: id.trim().to_string(),
                f_max: None,
                capacity: None,
                bad: None,
                good: None,
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected key = value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        match sections.last_mut() {
            None => match key {
                "width" => {
                    width = value.parse().map_err(|_| err(format!("bad width {value:?}")))?
                }
                "bad" => global_bad_path = Some(dir.join(value)),
                other => return Err(err(format!("unknown global key {other:?}"))),
            },
            Some(section) => match key {
                "f_max" => {
                    section.f_max =
                        Some(value.parse().map_err(|_| err(format!("bad f_max {value:?}")))?)
                }
                "capacity" => {
                    section.capacity =
                        Some(value.parse().map_err(|_| err(format!("bad capacity {value:?}")))?)
                }
                "bad" => section.bad = Some(dir.join(value)),
                "good" => section.good = Some(dir.join(value)),
                other => return Err(err(format!("unknown router key {other:?}"))),
            },
        }
    }
    if sections.is_empty() {
        return Err(Error::Scenario("scenario defines no routers".into()));
    }
    let mut routers = Vec::with_capacity(sections.len());
    for section in sections {
        let id = section.id;
        let miss =
            |what: &str| Error::Scenario(format!("router {id} is missing {what}"));
        let bad_path = section.bad.ok_or_else(|| miss("a bad file"))?;
        let bad = WeightedAddressSet::load_path(&bad_path, Role::Bad, width)?;
        let good = match section.good {
            Some(p) => WeightedAddressSet::load_path(&p, Role::Good, width)?,
            None => WeightedAddressSet::new(width, Role::Good)?,
        };
        let f_max = section.f_max.ok_or_else(|| miss("f_max"))?;
        let capacity = section.capacity.ok_or_else(|| miss("capacity"))?;
        routers.push(RouterSpec { id: id.clone(), f_max, capacity, good, bad });
    }
    let global_bad = match global_bad_path {
        Some(p) => WeightedAddressSet::load_path(&p, Role::Bad, width)?,
        None => {
            let mut union = WeightedAddressSet::new(width, Role::Bad)?;
            for r in &routers {
                for (v, w) in r.bad.iter() {
                    if !union.contains(v) {
                        union.insert(v, w)?;
                    }
                }
            }
            union
        }
    };
    Ok((routers, global_bad))
}

fn parse_range(text: &str) -> filtkit::Result<(u64, u64)> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| Error::Scenario(format!("expected A..B, got {text:?}")))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let start: u64 =
        a.parse().map_err(|_| Error::Scenario(format!("bad range start {a:?}")))?;
    let end: u64 = b.parse().map_err(|_| Error::Scenario(format!("bad range end {b:?}")))?;
    if start > end {
        return Err(Error::Scenario(format!("empty range {text:?}")));
    }
    Ok((start, end))
}

fn emit(out: Option<&Path>, text: &str) -> filtkit::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Scenario(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_jsonl<T: serde::Serialize>(
    path: &Path,
    records: impl Iterator<Item = T>,
) -> filtkit::Result<()> {
    let mut text = String::new();
    for record in records {
        text.push_str(&serde_json::to_string(&record).expect("serializable"));
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|e| Error::Scenario(format!("cannot write {}: {e}", path.display())))
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}
