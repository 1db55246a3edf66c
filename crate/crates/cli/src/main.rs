//! `hexplan`: generate terrains, run planners, benchmark and validate.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 validation failure,
//! 3 planner timeout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hexapod_planner::bench::{
    aggregate, bar_chart_svg, gait_csv, map_name, overhead_svg, run_matrix, timed_run, write_csv,
    ChartMetric, MatrixSpec, Method, RunRecord,
};
use hexapod_planner::config::PlannerConfig;
use hexapod_planner::mcts::{JsonLinesTrace, NoTrace};
use hexapod_planner::model::{validate_sequence, SolutionSequence};
use hexapod_planner::plan::PlanStatus;
use hexapod_planner::terrain::{
    generate_designed_terrain, generate_random_map, DesignedKind, DesignedParams, RandomMapParams,
    Terrain,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hexplan",
    version,
    about = "Hexapod footstep planning on sparse footholds"
)]
struct Cli {
    /// Planner configuration (TOML with [robot], [expert], [search], [reward]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a terrain file.
    Generate(GenerateArgs),
    /// Run one planner on a terrain file.
    Plan(PlanArgs),
    /// Run the method x density x map matrix.
    Benchmark(BenchArgs),
    /// Check a sequence file against a terrain.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Uniform random footholds.
    #[arg(
        long,
        conflicts_with = "designed",
        required_unless_present = "designed"
    )]
    random: bool,
    /// Designed terrain: gap, hole or trenches.
    #[arg(long, value_parser = parse_kind)]
    designed: Option<DesignedKind>,
    /// Number of random footholds.
    #[arg(long, default_value_t = 400)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    goal_x: Option<f64>,
    /// Grid pitch of designed terrains (m).
    #[arg(long)]
    pitch: Option<f64>,
    #[arg(long)]
    gap_width: Option<f64>,
    #[arg(long)]
    hole_length: Option<f64>,
    #[arg(long)]
    hole_width: Option<f64>,
    /// Comma-separated trench widths (m).
    #[arg(long, value_delimiter = ',')]
    trench_widths: Option<Vec<f64>>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    terrain: PathBuf,
    /// tripod, wave, free-gait, fast-mcts-random, fast-mcts-expert,
    /// sliding-mcts or standard-mcts.
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per Sliding-MCTS decision.
    #[arg(long)]
    n_samp: Option<usize>,
    /// Wall-clock limit (s).
    #[arg(long, default_value_t = 120.0)]
    time_limit: f64,
    /// Directory for the sequence, record, gait and plot files.
    #[arg(long, default_value = "plan-out")]
    out_dir: PathBuf,
    /// Search trace (JSON lines).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Desk-scale run: 5 maps per density, 200 samples per decision.
    #[arg(long)]
    quick: bool,
    /// Maps per density (default 20, or 5 with --quick).
    #[arg(long)]
    maps: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [300, 350, 400])]
    densities: Vec<usize>,
    /// Comma-separated methods (default: the six benchmark methods).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    n_samp: Option<usize>,
    /// Per-run wall-clock limit (s).
    #[arg(long, default_value_t = 120.0)]
    time_limit: f64,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Skip the SVG charts.
    #[arg(long)]
    no_charts: bool,
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    terrain: PathBuf,
    #[arg(long)]
    sequence: PathBuf,
}

fn parse_kind(s: &str) -> Result<DesignedKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(p) => PlannerConfig::load(p)?,
        None => PlannerConfig::default(),
    };
    match cli.command {
        Command::Generate(a) => generate(&cfg, a),
        Command::Plan(a) => plan(cfg, a),
        Command::Benchmark(a) => benchmark(cfg, a),
        Command::Validate(a) => validate(&cfg, a),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_terrain(path: &Path) -> Result<Terrain> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Terrain::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn generate(cfg: &PlannerConfig, a: GenerateArgs) -> Result<u8> {
    let terrain = match a.designed {
        Some(kind) => {
            let d = DesignedParams::default();
            let p = DesignedParams {
                goal_x: a.goal_x.unwrap_or(d.goal_x),
                pitch: a.pitch.unwrap_or(d.pitch),
                gap_width: a.gap_width.unwrap_or(d.gap_width),
                hole_length: a.hole_length.unwrap_or(d.hole_length),
                hole_width: a.hole_width.unwrap_or(d.hole_width),
                trench_widths: a.trench_widths.unwrap_or(d.trench_widths),
                ..d
            };
            generate_designed_terrain(&cfg.robot, kind, &p)?
        }
        None => {
            let d = RandomMapParams::with_count(a.count);
            let p = RandomMapParams {
                goal_x: a.goal_x.unwrap_or(d.goal_x),
                ..d
            };
            generate_random_map(&cfg.robot, &p, a.seed)?
        }
    };
    write_file(&a.output, terrain.to_json())?;
    println!(
        "wrote {} ({} footholds, goal x = {})",
        a.output.display(),
        terrain.len(),
        terrain.goal_x()
    );
    Ok(0)
}

fn plan(mut cfg: PlannerConfig, a: PlanArgs) -> Result<u8> {
    let terrain = read_terrain(&a.terrain)?;
    cfg.search.seed = a.seed.unwrap_or(cfg.search.seed);
    cfg.search.n_samp = a.n_samp.unwrap_or(cfg.search.n_samp);
    cfg.validate()?;
    let map = a
        .terrain
        .file_stem()
        .map_or("terrain".into(), |s| s.to_string_lossy().into_owned());
    let limit = Duration::from_secs_f64(a.time_limit.max(0.0));

    let (rec, outcome) = match &a.trace {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut sink = JsonLinesTrace::new(BufWriter::new(f));
            let res = timed_run(a.method, &terrain, &cfg, Some(limit), &map, 0, &mut sink);
            sink.finish()
                .with_context(|| format!("writing {}", p.display()))?;
            res
        }
        None => timed_run(a.method, &terrain, &cfg, Some(limit), &map, 0, &mut NoTrace),
    };
    let outcome = outcome.context("planner stopped at its iteration cap")?;

    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let out = |name: &str| a.out_dir.join(name);
    write_file(&out("sequence.json"), outcome.sequence.to_json())?;
    write_file(
        &out("record.json"),
        serde_json::to_string_pretty(&rec)? + "\n",
    )?;
    let mut csv = Vec::new();
    write_csv(&mut csv, std::slice::from_ref(&rec))?;
    write_file(&out("record.csv"), csv)?;
    write_file(&out("gait.csv"), gait_csv(&outcome.sequence))?;
    write_file(&out("plot.svg"), overhead_svg(&terrain, &outcome.sequence))?;

    println!(
        "{}: {} after {} steps, advance {:.3} m, mean step {:.3} m, {:.3e} s/step",
        rec.method, rec.status, rec.steps, rec.advance_m, rec.mean_step_m, rec.step_time_s
    );
    let report = validate_sequence(&cfg.robot, &terrain, &outcome.sequence);
    if !report.passed() {
        eprintln!("planner output is invalid: {report}");
        return Ok(EXIT_INVALID);
    }
    Ok(if outcome.status == PlanStatus::Timeout {
        EXIT_TIMEOUT
    } else {
        0
    })
}

fn benchmark(mut cfg: PlannerConfig, a: BenchArgs) -> Result<u8> {
    let base = if a.quick {
        MatrixSpec::quick()
    } else {
        MatrixSpec::full()
    };
    cfg.search.n_samp = a
        .n_samp
        .unwrap_or(if a.quick { 200 } else { cfg.search.n_samp });
    cfg.validate()?;
    let spec = MatrixSpec {
        densities: a.densities,
        maps_per_density: a.maps.unwrap_or(base.maps_per_density),
        seed_base: a.seed_base,
        methods: a.methods.unwrap_or(base.methods),
        time_limit: Some(Duration::from_secs_f64(a.time_limit.max(0.0))),
        jobs: a.jobs.max(1),
        ..base
    };
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let total = spec.densities.len() * spec.maps_per_density * spec.methods.len();
    eprintln!("running {total} planner runs");
    let progress = |r: &RunRecord| {
        eprintln!(
            "{:>18} {:>16} {:>10} {:7.3} m {:.2e} s/step",
            map_name(r.density, r.seed),
            r.method,
            r.status,
            r.advance_m,
            r.step_time_s
        );
    };
    let records = run_matrix(&spec, &cfg, &progress)?;
    let aggs = aggregate(&records);

    let runs_path = a.out_dir.join("runs.csv");
    let mut w = BufWriter::new(File::create(&runs_path)?);
    write_csv(&mut w, &records)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(a.out_dir.join("aggregate.csv"))?);
    write_csv(&mut w, &aggs)?;
    w.flush()?;
    if !a.no_charts {
        for (name, metric) in [
            ("advance.svg", ChartMetric::Advance),
            ("step_length.svg", ChartMetric::StepLength),
            ("step_time.svg", ChartMetric::StepTime),
        ] {
            write_file(&a.out_dir.join(name), bar_chart_svg(&aggs, metric))?;
        }
    }
    println!(
        "{:>8} {:>16} {:>5} {:>10} {:>10} {:>10} {:>12}",
        "density", "method", "runs", "goal", "advance", "step", "s/step"
    );
    for g in &aggs {
        println!(
            "{:>8} {:>16} {:>5} {:>10.2} {:>10.3} {:>10.3} {:>12.3e}",
            g.density,
            g.method,
            g.runs,
            g.goal_rate,
            g.mean_advance_m,
            g.mean_step_m,
            g.mean_step_time_s
        );
    }
    println!("wrote {} and aggregate.csv", runs_path.display());
    Ok(0)
}

fn validate(cfg: &PlannerConfig, a: ValidateArgs) -> Result<u8> {
    let terrain = read_terrain(&a.terrain)?;
    let text = fs::read_to_string(&a.sequence)
        .with_context(|| format!("reading {}", a.sequence.display()))?;
    let seq = SolutionSequence::from_json(&text)
        .with_context(|| format!("parsing {}", a.sequence.display()))?;
    let report = validate_sequence(&cfg.robot, &terrain, &seq);
    println!("{report}");
    Ok(if report.passed() { 0 } else { EXIT_INVALID })
}
