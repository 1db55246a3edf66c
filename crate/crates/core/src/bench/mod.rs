//! Benchmark harness: run any planner on a terrain, sweep the map matrix,
//! aggregate per-run records and export CSV/SVG artifacts.

mod gait;
mod svg;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PlannerConfig;
use crate::expert::{run_expert, run_periodic, Gait};
use crate::mcts::{
    fast_mcts_plan, sliding_mcts_plan, standard_mcts_plan, NoTrace, SearchContext, SearchError,
    SimPolicy, TraceSink,
};
use crate::model::HexapodState;
use crate::plan::{PlanOutcome, StepLimits};
use crate::terrain::{generate_random_map, RandomMapParams, Terrain, TerrainError};

pub use gait::{gait_csv, gait_rows, GaitRow, LegPhase};
pub use svg::{bar_chart_svg, overhead_svg, ChartMetric};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tripod,
    Wave,
    FreeGait,
    FastMctsRandom,
    FastMctsExpert,
    SlidingMcts,
    /// Plain UCT; available for single runs, not part of the matrix.
    StandardMcts,
}

impl Method {
    /// The methods compared in the benchmark matrix.
    pub const BENCHMARK: [Method; 6] = [
        Method::Tripod,
        Method::Wave,
        Method::FreeGait,
        Method::FastMctsRandom,
        Method::FastMctsExpert,
        Method::SlidingMcts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tripod => "tripod",
            Method::Wave => "wave",
            Method::FreeGait => "free-gait",
            Method::FastMctsRandom => "fast-mcts-random",
            Method::FastMctsExpert => "fast-mcts-expert",
            Method::SlidingMcts => "sliding-mcts",
            Method::StandardMcts => "standard-mcts",
        }
    }

    /// Single-step rule-based planners.
    pub fn is_expert(self) -> bool {
        matches!(self, Method::Tripod | Method::Wave | Method::FreeGait)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::BENCHMARK
            .iter()
            .chain(&[Method::StandardMcts])
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| BenchError::UnknownMethod(s.to_string()))
    }
}

/// Runs `method` from the nominal stance. The deadline bounds wall-clock
/// time; an expired deadline yields a `Timeout` outcome.
pub fn run_method(
    method: Method,
    terrain: &Terrain,
    cfg: &PlannerConfig,
    deadline: Option<Instant>,
    trace: &mut dyn TraceSink,
) -> Result<PlanOutcome, SearchError> {
    let model = &cfg.robot;
    let start = HexapodState::initial(model);
    let limits = StepLimits {
        n_stop: cfg.search.n_stop,
        stuck_eps: cfg.search.stuck_eps,
        deadline,
        ..StepLimits::default()
    };
    let ctx = SearchContext {
        model,
        terrain,
        expert: &cfg.expert,
    };
    let s = &cfg.search;
    Ok(match method {
        Method::Tripod => run_periodic(model, terrain, &start, Gait::Tripod, &cfg.expert, &limits),
        Method::Wave => run_periodic(model, terrain, &start, Gait::Wave, &cfg.expert, &limits),
        Method::FreeGait => run_expert(model, terrain, &start, &cfg.expert, &limits),
        Method::FastMctsRandom => {
            fast_mcts_plan(&ctx, &start, s, SimPolicy::Random, deadline, trace)?.outcome
        }
        Method::FastMctsExpert => {
            fast_mcts_plan(&ctx, &start, s, SimPolicy::Expert, deadline, trace)?.outcome
        }
        Method::SlidingMcts => {
            sliding_mcts_plan(&ctx, &start, s, &cfg.reward, deadline, trace).outcome
        }
        Method::StandardMcts => {
            standard_mcts_plan(&ctx, &start, s, s.sim_policy, deadline, trace).outcome
        }
    })
}

/// One planner run. Timing columns are the only fields that vary between
/// repeated runs with the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub map: String,
    pub seed: u64,
    /// Random footholds on the map; 0 for designed terrains.
    pub density: usize,
    pub method: Method,
    /// `goal`, `stuck`, `incomplete`, `timeout` or `error`.
    pub status: String,
    pub goal: bool,
    pub advance_m: f64,
    pub steps: usize,
    pub mean_step_m: f64,
    pub mean_margin_m: f64,
    pub total_time_s: f64,
    pub step_time_s: f64,
}

impl RunRecord {
    pub fn new(
        map: &str,
        seed: u64,
        density: usize,
        method: Method,
        outcome: &PlanOutcome,
        total_time_s: f64,
    ) -> Self {
        let seq = &outcome.sequence;
        let steps = seq.step_count();
        Self {
            map: map.to_string(),
            seed,
            density,
            method,
            status: outcome.status.name().to_string(),
            goal: outcome.reached_goal(),
            advance_m: seq.advance(),
            steps,
            mean_step_m: seq.mean_step_length(),
            mean_margin_m: seq.mean_stability_margin(),
            total_time_s,
            step_time_s: total_time_s / steps.max(1) as f64,
        }
    }

    /// Placeholder for a run that failed before producing a sequence.
    pub fn failed(map: &str, seed: u64, density: usize, method: Method, total_time_s: f64) -> Self {
        Self {
            map: map.to_string(),
            seed,
            density,
            method,
            status: "error".into(),
            goal: false,
            advance_m: 0.0,
            steps: 0,
            mean_step_m: 0.0,
            mean_margin_m: 0.0,
            total_time_s,
            step_time_s: total_time_s,
        }
    }

    /// Same record with the timing columns zeroed.
    pub fn without_timing(&self) -> Self {
        Self {
            total_time_s: 0.0,
            step_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// Times one run and turns it into a record.
pub fn timed_run(
    method: Method,
    terrain: &Terrain,
    cfg: &PlannerConfig,
    time_limit: Option<Duration>,
    map: &str,
    density: usize,
    trace: &mut dyn TraceSink,
) -> (RunRecord, Option<PlanOutcome>) {
    let t0 = Instant::now();
    let res = run_method(method, terrain, cfg, time_limit.map(|d| t0 + d), trace);
    let dt = t0.elapsed().as_secs_f64();
    match res {
        Ok(o) => (
            RunRecord::new(map, terrain.seed(), density, method, &o, dt),
            Some(o),
        ),
        Err(_) => (
            RunRecord::failed(map, terrain.seed(), density, method, dt),
            None,
        ),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpec {
    pub densities: Vec<usize>,
    pub maps_per_density: usize,
    pub seed_base: u64,
    pub methods: Vec<Method>,
    pub map: RandomMapParams,
    pub time_limit: Option<Duration>,
    /// Concurrent runs; 1 keeps per-step timings free of contention.
    pub jobs: usize,
}

impl MatrixSpec {
    /// Full-size matrix: 20 maps at each of the three densities.
    pub fn full() -> Self {
        Self {
            densities: vec![300, 350, 400],
            maps_per_density: 20,
            seed_base: 0,
            methods: Method::BENCHMARK.to_vec(),
            map: RandomMapParams::default(),
            time_limit: Some(Duration::from_secs(120)),
            jobs: 1,
        }
    }

    /// Desk-scale matrix: 5 maps per density.
    pub fn quick() -> Self {
        Self {
            maps_per_density: 5,
            ..Self::full()
        }
    }
}

pub fn map_name(density: usize, seed: u64) -> String {
    format!("random-{density}-{seed}")
}

/// Runs every (density, map, method) combination. Records come back in
/// that nesting order whatever the number of jobs. Map `i` of every density
/// uses seed `seed_base + i`.
pub fn run_matrix(
    spec: &MatrixSpec,
    cfg: &PlannerConfig,
    progress: &(dyn Fn(&RunRecord) + Sync),
) -> Result<Vec<RunRecord>, BenchError> {
    let mut maps = Vec::new();
    for &density in &spec.densities {
        for i in 0..spec.maps_per_density as u64 {
            let params = RandomMapParams {
                count: density,
                ..spec.map.clone()
            };
            let seed = spec.seed_base + i;
            maps.push((density, generate_random_map(&cfg.robot, &params, seed)?));
        }
    }
    let jobs: Vec<(usize, &Terrain, Method)> = maps
        .iter()
        .flat_map(|(d, t)| spec.methods.iter().map(move |&m| (*d, t, m)))
        .collect();
    let one = |&(density, terrain, method): &(usize, &Terrain, Method)| {
        let mut cfg = cfg.clone();
        cfg.search.seed = terrain.seed();
        let name = map_name(density, terrain.seed());
        let (rec, _) = timed_run(
            method,
            terrain,
            &cfg,
            spec.time_limit,
            &name,
            density,
            &mut NoTrace,
        );
        progress(&rec);
        rec
    };
    if spec.jobs <= 1 {
        return Ok(jobs.iter().map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .expect("thread pool");
    Ok(pool.install(|| jobs.par_iter().map(one).collect()))
}

/// Per-(density, method) summary of a set of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub density: usize,
    pub method: Method,
    pub runs: usize,
    pub goal_rate: f64,
    pub mean_advance_m: f64,
    /// Sample standard deviation (0 for a single run).
    pub std_advance_m: f64,
    pub mean_step_m: f64,
    pub mean_step_time_s: f64,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Groups by (density, method), sorted by density then method order.
pub fn aggregate(records: &[RunRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(usize, Method)> = records.iter().map(|r| (r.density, r.method)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(density, method)| {
            let rs: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.density == density && r.method == method)
                .collect();
            let col = |f: fn(&RunRecord) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let adv = col(|r| r.advance_m);
            Aggregate {
                density,
                method,
                runs: rs.len(),
                goal_rate: mean(&col(|r| f64::from(u8::from(r.goal)))),
                mean_advance_m: mean(&adv),
                std_advance_m: sample_std(&adv),
                mean_step_m: mean(&col(|r| r.mean_step_m)),
                mean_step_time_s: mean(&col(|r| r.step_time_s)),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(out: impl Write, rows: &[T]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records(input: impl Read) -> Result<Vec<RunRecord>, BenchError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(BenchError::from)
}
