//! Single-step rule-based planning: the free fault-tolerant gait and the
//! periodic tripod and wave baselines that reuse its step-length and
//! foothold rules.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point3, Polygon2, Vec2, GEOM_EPS};
use crate::model::{
    leg_margins, max_step_length, stance_margin, support_margin, support_polygon,
    support_state_table, FaultState, HexapodState, RobotModel, SupportState, LEG_COUNT,
};
use crate::plan::{drive, PlanOutcome, StepLimits};
use crate::terrain::Terrain;

/// Candidate support states whose maximum step is at or below this never
/// become actions (m).
pub const MIN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpertWeights {
    /// Support-state score weight on the maximum step.
    pub w1: f64,
    /// Support-state score weight on the stability margin.
    pub w2: f64,
    /// Foothold score weight on the mean kinematic margin of swing legs.
    pub w_l: f64,
    /// Foothold score weight on the stability margin after the step.
    pub w_m: f64,
    /// Footholds kept per swing leg before combinations are enumerated.
    pub top_k: usize,
    /// Steps looked ahead to avoid dead ends.
    pub lookahead: usize,
}

impl Default for ExpertWeights {
    fn default() -> Self {
        Self {
            w1: 0.7,
            w2: 0.3,
            w_l: 0.7,
            w_m: 0.3,
            top_k: 3,
            lookahead: 3,
        }
    }
}

impl ExpertWeights {
    pub fn validate(&self) -> Result<(), String> {
        for (name, w) in [
            ("w1", self.w1),
            ("w2", self.w2),
            ("w_l", self.w_l),
            ("w_m", self.w_m),
        ] {
            if !(w.is_finite() && w > 0.0) {
                return Err(format!("expert weight {name} must be positive, got {w}"));
            }
        }
        if self.top_k == 0 {
            return Err("expert top_k must be at least 1".into());
        }
        Ok(())
    }
}

/// A support state that survived filtering, with its maximum step and the
/// stability margin reached after taking that step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportCandidate {
    pub support: SupportState,
    pub max_step: f64,
    pub margin: f64,
}

impl SupportCandidate {
    pub fn score(&self, w: &ExpertWeights) -> f64 {
        w.w1 * self.max_step + w.w2 * self.margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FootTarget {
    /// Supporting leg: the foot does not move.
    Stay,
    Land(Point3),
    /// No foothold in reach: the leg is carried as a fault leg.
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAction {
    pub support: SupportState,
    pub step_length: f64,
    pub direction: Vec2,
    pub targets: [FootTarget; LEG_COUNT],
    /// Maximum step of `support` from the source state.
    pub max_step: f64,
}

impl CandidateAction {
    pub fn fault(&self) -> FaultState {
        FaultState::from_legs(
            &(0..LEG_COUNT)
                .filter(|&l| self.targets[l] == FootTarget::Float)
                .collect::<Vec<_>>(),
        )
    }
}

/// Chosen swing-leg footholds and their combined score.
#[derive(Debug, Clone, PartialEq)]
pub struct FootholdPlan {
    pub targets: [FootTarget; LEG_COUNT],
    pub score: f64,
}

/// Unit vector from the COG toward the goal point.
pub fn motion_direction(state: &HexapodState, terrain: &Terrain) -> Vec2 {
    (terrain.goal_point() - state.cog_xy())
        .normalized()
        .unwrap_or(Vec2::new(1.0, 0.0))
}

/// Successor state after executing `action` from `state`.
pub fn apply_action(
    model: &RobotModel,
    state: &HexapodState,
    action: &CandidateAction,
) -> HexapodState {
    let mut next = state.clone();
    let d = action.direction * action.step_length;
    next.cog.x += d.x;
    next.cog.y += d.y;
    for leg in 0..LEG_COUNT {
        match action.targets[leg] {
            FootTarget::Stay => {}
            FootTarget::Land(p) => next.feet[leg] = Some(p),
            FootTarget::Float => next.feet[leg] = None,
        }
    }
    next.support = Some(action.support);
    next.fault = action.fault();
    next.step_from_parent = state.cog_xy().distance(next.cog_xy());
    next.stability_margin = stance_margin(model, &next);
    next
}

/// Table states minus those that would use a fault or floating leg, repeat
/// the previous support state, or are unstable before moving. Survivors keep
/// table order.
pub fn candidate_support_states(
    model: &RobotModel,
    state: &HexapodState,
    dir: Vec2,
) -> Vec<SupportCandidate> {
    let margins = leg_margins(model, state, dir);
    let grounded = state.grounded().bits();
    let cog = state.cog_xy();
    let mut out = Vec::new();
    for &s in support_state_table() {
        if s.bits() & !grounded != 0 || s.intersects(state.fault.bits()) {
            continue;
        }
        if state.support == Some(s) {
            continue;
        }
        let Ok(poly) = support_polygon(state, s) else {
            continue;
        };
        let poly = poly.shrink(model.stability_margin);
        if poly.point_margin(cog) < -GEOM_EPS {
            continue;
        }
        let km = s
            .legs()
            .map(|l| margins[l].unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min);
        let aa = poly.ray_exit(cog, dir).distance;
        let max_step = km.min(aa).max(0.0);
        out.push(SupportCandidate {
            support: s,
            max_step,
            margin: poly.point_margin(cog + dir * max_step),
        });
    }
    out
}

/// Highest-scoring candidate; the earliest in table order wins ties.
pub fn select_support_state<'a>(
    candidates: &'a [SupportCandidate],
    weights: &ExpertWeights,
) -> Option<&'a SupportCandidate> {
    let mut best: Option<(&SupportCandidate, f64)> = None;
    for c in candidates {
        let f = c.score(weights);
        if best.is_none_or(|(_, b)| f > b) {
            best = Some((c, f));
        }
    }
    best.map(|(c, _)| c)
}

/// Per swing leg, the top-k footholds in its workspace at the future body
/// position, ranked by kinematic margin (stable, so lexicographic order
/// breaks ties). Returned with each foothold's margin.
fn swing_options(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    support: SupportState,
    cog: Vec2,
    dir: Vec2,
    top_k: usize,
) -> Vec<(usize, Vec<(Point3, f64)>)> {
    support
        .swing()
        .map(|leg| {
            let sector = model.leg_sector(leg, cog, state.yaw);
            let mut opts: Vec<(Point3, f64)> = terrain
                .footholds_in_sector(&sector)
                .into_iter()
                .filter(|p| !support.legs().any(|l| state.feet[l] == Some(*p)))
                .map(|p| (p, sector.ray_exit(p.xy(), -dir).distance))
                .collect();
            opts.sort_by(|a, b| b.1.total_cmp(&a.1));
            opts.truncate(top_k);
            (leg, opts)
        })
        .collect()
}

/// Foothold combination for the swing legs of `support` after the body moves
/// `step_length` along `dir`. Legs with nothing in reach float.
pub fn select_footholds(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    support: SupportState,
    step_length: f64,
    dir: Vec2,
    weights: &ExpertWeights,
) -> FootholdPlan {
    let cog = state.cog_xy() + dir * step_length;
    let options = swing_options(model, state, terrain, support, cog, dir, weights.top_k);
    let mut targets = [FootTarget::Stay; LEG_COUNT];
    let mut active: Vec<(usize, &[(Point3, f64)])> = Vec::new();
    for (leg, opts) in &options {
        if opts.is_empty() {
            targets[*leg] = FootTarget::Float;
        } else {
            active.push((*leg, opts));
        }
    }

    let fixed: Vec<Vec2> = support
        .legs()
        .filter_map(|l| state.feet[l].map(|p| p.xy()))
        .collect();
    let mut pts = fixed.clone();
    let mut pick = vec![0usize; active.len()];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        pts.truncate(fixed.len());
        let mut km = 0.0;
        for (i, (_, opts)) in active.iter().enumerate() {
            let (p, k) = opts[pick[i]];
            pts.push(p.xy());
            km += k;
        }
        let km_mean = if active.is_empty() {
            0.0
        } else {
            km / active.len() as f64
        };
        let shared = (0..active.len())
            .any(|i| (0..i).any(|j| active[i].1[pick[i]].0 == active[j].1[pick[j]].0));
        if !shared {
            let sm = Polygon2::convex_hull(&pts)
                .map(|p| p.shrink(model.stability_margin).point_margin(cog))
                .unwrap_or(f64::MIN);
            let f = weights.w_l * km_mean + weights.w_m * sm;
            if best.as_ref().is_none_or(|(_, b)| f > *b) {
                best = Some((pick.clone(), f));
            }
        }
        // Odometer over the combination space, first leg slowest.
        let mut i = active.len();
        loop {
            if i == 0 {
                let Some((choice, score)) = best else {
                    return contested_footholds(targets, &active);
                };
                for (j, (leg, opts)) in active.iter().enumerate() {
                    targets[*leg] = FootTarget::Land(opts[choice[j]].0);
                }
                return FootholdPlan { targets, score };
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < active[i].1.len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

/// Every combination puts two legs on one foothold: legs claim their best
/// free option in leg order and the rest float.
fn contested_footholds(
    mut targets: [FootTarget; LEG_COUNT],
    active: &[(usize, &[(Point3, f64)])],
) -> FootholdPlan {
    let mut taken: Vec<Point3> = Vec::new();
    for (leg, opts) in active {
        targets[*leg] = match opts.iter().find(|(p, _)| !taken.contains(p)) {
            Some((p, _)) => {
                taken.push(*p);
                FootTarget::Land(*p)
            }
            None => FootTarget::Float,
        };
    }
    FootholdPlan {
        targets,
        score: f64::MIN,
    }
}

/// Builds the action for `support` with step `step_length`, choosing
/// footholds by the expert rule.
pub fn action_for(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    candidate: &SupportCandidate,
    step_length: f64,
    dir: Vec2,
    weights: &ExpertWeights,
) -> CandidateAction {
    let plan = select_footholds(
        model,
        state,
        terrain,
        candidate.support,
        step_length,
        dir,
        weights,
    );
    CandidateAction {
        support: candidate.support,
        step_length,
        direction: dir,
        targets: plan.targets,
        max_step: candidate.max_step,
    }
}

/// Support candidates allowing a step, best score first (table order on
/// ties).
fn ranked_candidates(
    model: &RobotModel,
    state: &HexapodState,
    dir: Vec2,
    weights: &ExpertWeights,
) -> Vec<SupportCandidate> {
    let mut cands = candidate_support_states(model, state, dir);
    cands.retain(|c| c.max_step > MIN_STEP);
    cands.sort_by(|a, b| b.score(weights).total_cmp(&a.score(weights)));
    cands
}

/// Support states tried per level inside the dead-end check.
const LOOKAHEAD_BREADTH: usize = 4;

/// True when the expert can keep stepping from `state` for `depth` more
/// steps (or reaches the goal sooner). Only the best few support states are
/// tried at each level.
fn can_continue(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    weights: &ExpertWeights,
    depth: usize,
) -> bool {
    if depth == 0 || state.reached(terrain.goal_x()) {
        return true;
    }
    let dir = motion_direction(state, terrain);
    ranked_candidates(model, state, dir, weights)
        .iter()
        .take(LOOKAHEAD_BREADTH)
        .any(|c| {
            let a = action_for(model, state, terrain, c, c.max_step, dir, weights);
            can_continue(
                model,
                &apply_action(model, state, &a),
                terrain,
                weights,
                depth - 1,
            )
        })
}

/// The free fault-tolerant gait's choice from `state`, or `None` when no
/// support state allows a step.
///
/// Support states are tried in score order and the first one that does not
/// run into a dead end within `weights.lookahead` further steps is taken.
/// Without this the greedy rule can exhaust the margins of too many legs at
/// once (a body-only move followed by a two-leg swing on flat ground). If
/// every choice dead-ends, the best-scoring one is returned.
pub fn expert_action(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    weights: &ExpertWeights,
) -> Option<CandidateAction> {
    let dir = motion_direction(state, terrain);
    let mut fallback = None;
    for c in ranked_candidates(model, state, dir, weights) {
        let action = action_for(model, state, terrain, &c, c.max_step, dir, weights);
        let next = apply_action(model, state, &action);
        if can_continue(model, &next, terrain, weights, weights.lookahead) {
            return Some(action);
        }
        fallback.get_or_insert(action);
    }
    fallback
}

/// One step of the free fault-tolerant gait; `None` means stuck.
pub fn expert_step(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    weights: &ExpertWeights,
) -> Option<HexapodState> {
    expert_action(model, state, terrain, weights).map(|a| apply_action(model, state, &a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gait {
    /// Two alternating groups of three legs.
    Tripod,
    /// One leg swings at a time, rear to front on each side.
    Wave,
}

/// Wave swing order: right side rear to front, then left side rear to front.
const WAVE_ORDER: [usize; LEG_COUNT] = [4, 5, 0, 3, 2, 1];

impl Gait {
    pub fn period(self) -> usize {
        match self {
            Gait::Tripod => 2,
            Gait::Wave => LEG_COUNT,
        }
    }

    /// Support state forced at `phase` of the cycle.
    pub fn support(self, phase: usize) -> SupportState {
        match self {
            Gait::Tripod if phase.is_multiple_of(2) => SupportState::from_legs(&[0, 2, 4]),
            Gait::Tripod => SupportState::from_legs(&[1, 3, 5]),
            Gait::Wave => SupportState::from_legs(&[WAVE_ORDER[phase % LEG_COUNT]]).complement(),
        }
    }
}

/// One step of a periodic gait. Periodic gaits have no fault legs, so a
/// swing leg without a foothold, or an unstable forced support state, means
/// stuck.
pub fn periodic_action(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    gait: Gait,
    phase: usize,
    weights: &ExpertWeights,
) -> Option<CandidateAction> {
    if !state.fault.is_empty() {
        return None;
    }
    let support = gait.support(phase);
    let dir = motion_direction(state, terrain);
    if support_margin(model, state, support, state.cog_xy()).ok()? < -GEOM_EPS {
        return None;
    }
    let max_step = max_step_length(model, state, support, dir).ok()?;
    let cand = SupportCandidate {
        support,
        max_step,
        margin: 0.0,
    };
    let action = action_for(model, state, terrain, &cand, max_step, dir, weights);
    if action.targets.contains(&FootTarget::Float) {
        return None;
    }
    Some(action)
}

pub fn periodic_step(
    model: &RobotModel,
    state: &HexapodState,
    terrain: &Terrain,
    gait: Gait,
    phase: usize,
    weights: &ExpertWeights,
) -> Option<HexapodState> {
    periodic_action(model, state, terrain, gait, phase, weights)
        .map(|a| apply_action(model, state, &a))
}

/// Runs the free fault-tolerant gait from `start` until goal, stuck or limit.
pub fn run_expert(
    model: &RobotModel,
    terrain: &Terrain,
    start: &HexapodState,
    weights: &ExpertWeights,
    limits: &StepLimits,
) -> PlanOutcome {
    drive(start.clone(), terrain.goal_x(), limits, |s, _| {
        expert_step(model, s, terrain, weights)
    })
}

/// Runs a periodic gait from phase 0.
pub fn run_periodic(
    model: &RobotModel,
    terrain: &Terrain,
    start: &HexapodState,
    gait: Gait,
    weights: &ExpertWeights,
    limits: &StepLimits,
) -> PlanOutcome {
    drive(start.clone(), terrain.goal_x(), limits, |s, k| {
        periodic_step(model, s, terrain, gait, k, weights)
    })
}
