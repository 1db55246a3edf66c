//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! on any failure.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use hexapod_planner::bench::{aggregate, gait_rows, map_name, timed_run, Method, RunRecord};
use hexapod_planner::config::PlannerConfig;
use hexapod_planner::expert::ExpertWeights;
use hexapod_planner::geometry::{Polygon2, Vec2};
use hexapod_planner::mcts::{
    sliding_decide, standard_mcts_plan, NoTrace, NodeId, RewardWeights, SearchConfig,
    SearchContext, SimPolicy, Tree,
};
use hexapod_planner::model::{
    max_step_length, support_state_table, validate_sequence, HexapodState, RobotModel,
};
use hexapod_planner::plan::{PlanOutcome, PlanStatus};
use hexapod_planner::terrain::{
    generate_designed_terrain, generate_random_map, DesignedKind, DesignedParams, RandomMapParams,
    Terrain,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

const CASES: usize = 1000;
const SLACK: f64 = 0.05;
const DENSITIES: [usize; 3] = [300, 350, 400];
const MAPS: u64 = 5;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn support_table() -> Check {
    let table: BTreeSet<u8> = support_state_table().iter().map(|s| s.bits()).collect();
    let brute: BTreeSet<u8> = brute_force_support_masks().into_iter().collect();
    ensure(
        support_state_table().len() == 42 && table == brute,
        format!(
            "{} entries, brute force {}",
            support_state_table().len(),
            brute.len()
        ),
    )
}

fn convex_poly(rng: &mut ChaCha8Rng) -> Vec<Vec2> {
    loop {
        let n = rng.gen_range(3..9);
        let pts: Vec<Vec2> = (0..n)
            .map(|_| {
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = rng.gen_range(0.25..0.48);
                v(0.5 + r * a.cos(), 0.5 + r * a.sin())
            })
            .collect();
        let h = gift_wrap(&pts);
        if h.len() >= 3 && fan_area_centroid(&h).0 > 0.02 {
            return h;
        }
    }
}

fn geometry_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = [0.0f64; 4];
    for i in 0..CASES {
        let p = convex_poly(&mut rng);
        let poly = Polygon2::new(p.clone()).map_err(|e| format!("case {i}: {e}"))?;
        let c = poly.centroid().map_err(|e| format!("case {i}: {e}"))?;

        let (fa, fc) = fan_area_centroid(&p);
        let d = (poly.area() - fa).abs().max(c.distance(fc));
        worst[0] = worst[0].max(d);
        if d > 1e-9 {
            return Err(format!("case {i}: analytic area/centroid off by {d:e}"));
        }

        let shift = (rng.gen::<f64>(), rng.gen::<f64>());
        let (sa, sc) = sampled_area_centroid(&p, 1 << 18, shift);
        let d = (poly.area() - sa)
            .abs()
            .max((c.x - sc.x).abs())
            .max((c.y - sc.y).abs());
        worst[1] = worst[1].max(d);
        if d > 1e-3 {
            return Err(format!("case {i}: sampled area/centroid off by {d:e}"));
        }

        let q = v(rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2));
        let m = poly.point_margin(q);
        let bd = boundary_dist(&p, q);
        if (m.abs() - bd).abs() > 1e-9 || (bd > 1e-9 && (m > 0.0) != crossing_inside(&p, q)) {
            return Err(format!("case {i}: point_margin {m} at {q:?}, oracle {bd}"));
        }
        let q2 = v(
            q.x + rng.gen_range(-1e-3..1e-3),
            q.y + rng.gen_range(-1e-3..1e-3),
        );
        let jump = (poly.point_margin(q2) - m).abs() - q.distance(q2);
        worst[2] = worst[2].max(jump);
        if jump > 1e-12 {
            return Err(format!("case {i}: point_margin jumps by {jump:e}"));
        }

        let d_min = (0..p.len())
            .map(|k| {
                let (a, b) = (p[k], p[(k + 1) % p.len()]);
                ((b - a).cross(c - a) / (b - a).norm()).abs()
            })
            .fold(f64::INFINITY, f64::min);
        let margin = rng.gen_range(0.0..0.95) * d_min;
        let s = poly.shrink(margin);
        let drift = s
            .centroid()
            .map_err(|e| format!("case {i}: {e}"))?
            .distance(c);
        let oracle = shrink_oracle(&p, margin);
        let off = s
            .vertices()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| a.distance(*b))
            .fold(drift, f64::max);
        worst[3] = worst[3].max(off);
        if off > 1e-9
            || s.vertices()
                .iter()
                .any(|w| poly.point_margin(*w) < margin - 1e-9)
        {
            return Err(format!("case {i}: shrink by {margin} off by {off:e}"));
        }
    }
    Ok(format!(
        "{CASES} cases each; worst analytic {:.1e}, sampled {:.1e}, shrink {:.1e}",
        worst[0], worst[1], worst[3]
    ))
}

fn step_length_oracle() -> Check {
    let m = RobotModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (s, support, dir) = random_stance(&m, &mut rng);
        let msl = max_step_length(&m, &s, support, dir).map_err(|e| format!("stance {i}: {e}"))?;
        let d = (msl - micro_advance_limit(&m, &s, support, dir)).abs();
        worst = worst.max(d);
        if d > 2e-3 {
            return Err(format!("stance {i}: off by {:.1} mm", d * 1e3));
        }
    }
    Ok(format!("100 stances, worst {:.2} mm", worst * 1e3))
}

struct Run {
    record: RunRecord,
    outcome: Option<PlanOutcome>,
    terrain_ix: usize,
}

fn quick_config() -> PlannerConfig {
    let mut cfg = PlannerConfig::default();
    cfg.search.n_samp = 200;
    cfg
}

fn run_suite() -> (Vec<Terrain>, Vec<Run>) {
    let base = quick_config();
    let mut terrains = Vec::new();
    let mut runs = Vec::new();
    for density in DENSITIES {
        for seed in 0..MAPS {
            let t = generate_random_map(&base.robot, &RandomMapParams::with_count(density), seed)
                .expect("random map");
            let mut cfg = base.clone();
            cfg.search.seed = seed;
            for method in Method::BENCHMARK {
                let (record, outcome) = timed_run(
                    method,
                    &t,
                    &cfg,
                    Some(Duration::from_secs(120)),
                    &map_name(density, seed),
                    density,
                    &mut NoTrace,
                );
                runs.push(Run {
                    record,
                    outcome,
                    terrain_ix: terrains.len(),
                });
            }
            terrains.push(t);
        }
    }
    (terrains, runs)
}

fn all_sequences_valid(terrains: &[Terrain], runs: &[Run]) -> Check {
    let model = RobotModel::default();
    for r in runs {
        let Some(o) = &r.outcome else {
            return Err(format!("{} {}: no sequence", r.record.map, r.record.method));
        };
        let rep = validate_sequence(&model, &terrains[r.terrain_ix], &o.sequence);
        if !rep.passed() {
            return Err(format!("{} {}: {rep}", r.record.map, r.record.method));
        }
    }
    Ok(format!(
        "{} sequences on {} maps",
        runs.len(),
        terrains.len()
    ))
}

fn visits_conserved(t: &Tree) -> bool {
    t.ids().all(|id| {
        let below: u64 = t[id].children.iter().map(|&c| t[c].n_visit).sum();
        t[id].n_visit == u64::from(id != NodeId::ROOT) + below
    })
}

fn bookkeeping() -> Check {
    let m = RobotModel::default();
    let t = generate_random_map(&m, &RandomMapParams::with_count(400), 0).expect("map");
    let w = ExpertWeights::default();
    let ctx = SearchContext {
        model: &m,
        terrain: &t,
        expert: &w,
    };
    let cfg = SearchConfig {
        budget: 10_000,
        n_samp: 10_000,
        ..SearchConfig::default()
    };
    let start = HexapodState::initial(&m);
    let r = standard_mcts_plan(&ctx, &start, &cfg, SimPolicy::Random, None, &mut NoTrace);
    if r.tree.root().n_visit != r.iterations || r.iterations != 10_000 {
        return Err(format!(
            "root visits {} after {} iterations",
            r.tree.root().n_visit,
            r.iterations
        ));
    }
    if !visits_conserved(&r.tree) {
        return Err("standard tree breaks visit conservation".into());
    }
    let mut tree = Tree::new(start);
    let (mut l_max, mut counter) = (0.0, 0);
    sliding_decide(
        &mut tree,
        &ctx,
        &cfg,
        &RewardWeights::default(),
        SimPolicy::Random,
        &mut l_max,
        &mut counter,
        &mut NoTrace,
    )
    .ok_or("sliding decision found no child")?;
    if tree.root().n_visit != 10_000 || !visits_conserved(&tree) {
        return Err("sliding tree breaks visit conservation".into());
    }
    let bad = tree
        .ids()
        .flat_map(|id| tree[id].children.iter().map(move |&c| (id, c)))
        .filter(|&(p, c)| tree[p].score < tree[c].score)
        .count();
    ensure(
        bad == 0,
        format!(
            "10000 iterations; {} + {} nodes; {bad} parent scores below a child",
            r.tree.len(),
            tree.len()
        ),
    )
}

fn determinism() -> Check {
    let cfg = quick_config();
    let t = generate_random_map(&cfg.robot, &RandomMapParams::with_count(400), 2).expect("map");
    let methods: Vec<Method> = Method::BENCHMARK
        .iter()
        .copied()
        .chain([Method::StandardMcts])
        .collect();
    for &m in &methods {
        let run = || {
            hexapod_planner::bench::run_method(m, &t, &cfg, None, &mut NoTrace)
                .map(|o| o.sequence.to_json())
                .map_err(|e| format!("{m}: {e}"))
        };
        if run()? != run()? {
            return Err(format!("{m}: sequences differ"));
        }
    }
    Ok(format!("{} planners", methods.len()))
}

fn mean_of(
    runs: &[Run],
    density: Option<usize>,
    methods: &[Method],
    f: fn(&RunRecord) -> f64,
) -> f64 {
    let xs: Vec<f64> = runs
        .iter()
        .map(|r| &r.record)
        .filter(|r| density.is_none_or(|d| r.density == d) && methods.contains(&r.method))
        .map(f)
        .collect();
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn advance(runs: &[Run], d: usize, m: Method) -> f64 {
    mean_of(runs, Some(d), &[m], |r| r.advance_m)
}

/// `a <= b` up to the relative slack.
fn at_most(a: f64, b: f64) -> bool {
    a <= b * (1.0 + SLACK) + 1e-9
}

fn passability(runs: &[Run]) -> Check {
    use Method::*;
    let mut notes = Vec::new();
    let mut ok = true;
    for d in DENSITIES {
        let (tri, free, fe, sl) = (
            advance(runs, d, Tripod),
            advance(runs, d, FreeGait),
            advance(runs, d, FastMctsExpert),
            advance(runs, d, SlidingMcts),
        );
        ok &= at_most(tri, free) && at_most(free, fe) && at_most(free, sl);
        notes.push(format!(
            "{d}: {tri:.2} <= {free:.2} <= {fe:.2}, sliding {sl:.2}"
        ));
    }
    ensure(ok, notes.join("; "))
}

fn density_monotone(runs: &[Run]) -> Check {
    let mut bad = Vec::new();
    for m in Method::BENCHMARK {
        let a: Vec<f64> = DENSITIES.iter().map(|&d| advance(runs, d, m)).collect();
        if !(at_most(a[0], a[1]) && at_most(a[1], a[2])) {
            bad.push(format!("{m} {a:.2?}"));
        }
    }
    ensure(
        bad.is_empty(),
        if bad.is_empty() {
            "all six methods".into()
        } else {
            bad.join("; ")
        },
    )
}

fn speed_ordering(runs: &[Run]) -> Check {
    use Method::*;
    let step = |m| mean_of(runs, Some(300), &[m], |r| r.mean_step_m);
    let (tri, fr, free, sl) = (
        step(Tripod),
        step(FastMctsRandom),
        step(FreeGait),
        step(SlidingMcts),
    );
    ensure(
        tri > fr * (1.0 - SLACK) && sl > free * (1.0 - SLACK),
        format!("tripod {tri:.3} vs fast-random {fr:.3}; sliding {sl:.3} vs free gait {free:.3} m"),
    )
}

fn planning_time(runs: &[Run]) -> Check {
    use Method::*;
    let t = |ms: &[Method]| mean_of(runs, None, ms, |r| r.step_time_s);
    let expert = t(&[Tripod, Wave, FreeGait]);
    let fast = t(&[FastMctsRandom, FastMctsExpert]);
    let sliding = t(&[SlidingMcts]);
    ensure(
        fast >= 10.0 * expert && sliding >= 10.0 * fast,
        format!(
            "expert {expert:.2e} s, fast {fast:.2e} s (x{:.1}), sliding {sliding:.2e} s (x{:.1})",
            fast / expert,
            sliding / fast
        ),
    )
}

fn fast_improves_expert(runs: &[Run]) -> Check {
    let on = |m: Method| -> Vec<(String, f64)> {
        runs.iter()
            .filter(|r| r.record.density == 300 && r.record.method == m)
            .map(|r| (r.record.map.clone(), r.record.advance_m))
            .collect()
    };
    let fe = on(Method::FastMctsExpert);
    let free = on(Method::FreeGait);
    let bad: Vec<String> = fe
        .iter()
        .zip(&free)
        .filter(|(a, b)| a.1 < b.1 - 1e-9)
        .map(|(a, b)| format!("{}: {:.2} < {:.2}", a.0, a.1, b.1))
        .collect();
    ensure(
        bad.is_empty() && fe.len() == MAPS as usize,
        if bad.is_empty() {
            format!("{} maps", fe.len())
        } else {
            bad.join("; ")
        },
    )
}

fn designed_terrains() -> Check {
    let t0 = Instant::now();
    let cfg = PlannerConfig::default();
    let mut notes = Vec::new();
    for kind in DesignedKind::ALL {
        let t = generate_designed_terrain(&cfg.robot, kind, &DesignedParams::default())
            .map_err(|e| e.to_string())?;
        let run = |m| {
            hexapod_planner::bench::run_method(m, &t, &cfg, None, &mut NoTrace)
                .map_err(|e| format!("{kind} {m}: {e}"))
        };
        let sl = run(Method::SlidingMcts)?;
        let rep = validate_sequence(&cfg.robot, &t, &sl.sequence);
        if !sl.reached_goal() || !rep.passed() {
            return Err(format!("{kind}: sliding {} ({rep})", sl.status));
        }
        notes.push(format!("{kind} goal in {}", sl.sequence.step_count()));
        if kind == DesignedKind::Hole {
            let faulty = gait_rows(&sl.sequence)
                .iter()
                .filter(|r| r.fault_legs() >= 1)
                .count();
            if faulty == 0 {
                return Err("hole: no step with a fault leg".into());
            }
            let tri = run(Method::Tripod)?;
            if tri.status != PlanStatus::Stuck {
                return Err(format!("hole: tripod ended {}", tri.status));
            }
            notes.push(format!(
                "{faulty} fault-leg steps, tripod stuck at {:.2} m",
                tri.sequence.advance()
            ));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs <= 600.0, format!("{}; {secs:.0} s", notes.join(", ")))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, r: Check| {
        let (tag, msg) = match r {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failures += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} {n:>2} {name}: {msg}");
    };

    report(1, "support-state table", support_table());
    report(2, "geometry oracles", geometry_oracles());
    report(3, "max step length oracle", step_length_oracle());

    let t0 = Instant::now();
    let (terrains, runs) = run_suite();
    let suite_secs = t0.elapsed().as_secs_f64();

    report(
        4,
        "sequence validity",
        all_sequences_valid(&terrains, &runs),
    );
    report(5, "tree bookkeeping", bookkeeping());
    report(6, "determinism", determinism());
    report(7, "passability ordering", passability(&runs));
    report(8, "density monotonicity", density_monotone(&runs));
    report(9, "speed ordering", speed_ordering(&runs));
    report(10, "planning-time ordering", planning_time(&runs));
    report(11, "designed terrains", designed_terrains());
    report(
        12,
        "fast search improves the expert",
        fast_improves_expert(&runs),
    );

    let records: Vec<RunRecord> = runs.into_iter().map(|r| r.record).collect();
    println!("\nquick suite: {} runs in {suite_secs:.0} s", records.len());
    println!(
        "{:>7} {:<17} {:>6} {:>9} {:>9} {:>11}",
        "density", "method", "goal", "advance", "step", "step time"
    );
    for a in aggregate(&records) {
        println!(
            "{:>7} {:<17} {:>6.2} {:>9.3} {:>9.3} {:>11.2e}",
            a.density,
            a.method.name(),
            a.goal_rate,
            a.mean_advance_m,
            a.mean_step_m,
            a.mean_step_time_s
        );
    }

    if failures > 0 {
        println!("\n{failures} criteria failed");
        std::process::exit(1);
    }
}
