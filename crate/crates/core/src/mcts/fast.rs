use std::time::Instant;

use super::simulate::{simulate, Horizon, Rollout};
use super::{
    sim_rng, NodeId, SearchConfig, SearchContext, SearchError, SimPolicy, TraceEvent, TraceSink,
    Tree,
};
use crate::expert::apply_action;
use crate::model::{HexapodState, SolutionSequence};
use crate::plan::{past, PlanOutcome, PlanStatus};

#[derive(Debug, Clone)]
pub struct FastResult {
    pub outcome: PlanOutcome,
    pub tree: Tree,
    /// Forward progress of the master branch end (m).
    pub dis_max: f64,
    /// Nodes expanded.
    pub expansions: u64,
    /// Rollouts run.
    pub simulations: u64,
}

/// Expands every untried action of `node` and runs one unbounded rollout
/// from each new child. Returns the child whose rollout ends farthest ahead
/// (the first on ties) with its rollout, or `None` if `node` has no actions.
/// `counter` numbers rollouts for seeding.
#[allow(clippy::too_many_arguments)]
pub fn expand_and_simulate(
    tree: &mut Tree,
    ctx: &SearchContext,
    node: NodeId,
    policy: SimPolicy,
    cfg: &SearchConfig,
    counter: &mut u64,
    trace: &mut dyn TraceSink,
) -> Option<(NodeId, Rollout)> {
    let limits = cfg.rollout_limits(policy);
    let origin = tree.root().state.cog.x;
    let mut best: Option<(NodeId, Rollout, f64)> = None;
    for pending in tree.take_all_untried(node, ctx) {
        let state = &tree[node].state;
        let action = pending.materialize(ctx, state);
        let child_state = apply_action(ctx.model, state, &action);
        let child = tree.add_child(node, child_state);
        let mut rng = sim_rng(cfg.seed, *counter);
        let r = simulate(
            ctx,
            &tree[child].state,
            policy,
            Horizon::Unbounded,
            &limits,
            &mut rng,
        );
        let end_x = r.states.last().unwrap_or(&tree[child].state).cog.x - origin;
        trace.record(TraceEvent::Iteration {
            iteration: *counter,
            depth: tree[child].depth,
            support: action.support.to_string(),
            step_length: action.step_length,
            passed: r.reached_goal,
            distance: end_x,
        });
        *counter += 1;
        if best.as_ref().is_none_or(|b| end_x > b.2) {
            best = Some((child, r, end_x));
        }
    }
    tree.refresh_exhausted(node);
    best.map(|(id, r, _)| (id, r))
}

/// Grafts the rollout states under `child` as a chain of tree nodes and
/// returns the last one, the new master branch end.
pub fn update_master_branch(tree: &mut Tree, child: NodeId, rollout: Vec<HexapodState>) -> NodeId {
    rollout
        .into_iter()
        .fold(child, |parent, state| tree.add_child(parent, state))
}

/// First node with untried actions on the walk from `node` up to the root.
/// `None` if there is none, root included.
pub fn trace_back(tree: &mut Tree, ctx: &SearchContext, node: NodeId) -> Option<NodeId> {
    let mut cur = Some(node);
    while let Some(id) = cur {
        if tree.untried_len(id, ctx) > 0 {
            return Some(id);
        }
        cur = tree[id].parent;
    }
    None
}

/// Master-branch search. Each round expands one node completely, rolls out
/// every child to the end, grafts the farthest rollout when it beats the
/// best so far, and backtracks from the branch end to the nearest node that
/// still has untried actions.
pub fn fast_mcts_plan(
    ctx: &SearchContext,
    start: &HexapodState,
    cfg: &SearchConfig,
    policy: SimPolicy,
    deadline: Option<Instant>,
    trace: &mut dyn TraceSink,
) -> Result<FastResult, SearchError> {
    let t0 = Instant::now();
    let goal_x = ctx.terrain.goal_x();
    let mut tree = Tree::new(start.clone());
    let mut end = NodeId::ROOT;
    let mut expand = Some(NodeId::ROOT);
    let mut dis_max = 0.0;
    let mut counter = 0u64;
    let mut expansions = 0u64;
    let status = loop {
        if tree[end].state.reached(goal_x) {
            break PlanStatus::Goal;
        }
        let Some(node) = expand else {
            break PlanStatus::Incomplete;
        };
        if expansions as usize >= cfg.iteration_cap {
            return Err(SearchError::IterationCap(cfg.iteration_cap));
        }
        if past(deadline) {
            break PlanStatus::Timeout;
        }
        expansions += 1;
        if let Some((child, r)) =
            expand_and_simulate(&mut tree, ctx, node, policy, cfg, &mut counter, trace)
        {
            let child_x = tree[child].state.cog.x;
            let dis = r.states.last().map_or(child_x, |s| s.cog.x) - start.cog.x;
            if dis > dis_max {
                dis_max = dis;
                end = update_master_branch(&mut tree, child, r.states);
                trace.record(TraceEvent::MasterBranch {
                    iteration: counter,
                    depth: tree[end].depth,
                    end_x: tree[end].state.cog.x,
                    dis_max,
                });
            }
        }
        expand = trace_back(&mut tree, ctx, end);
    };
    let mut sequence = SolutionSequence::from_states(tree.states_to(end));
    sequence.spread_planning_time(t0.elapsed().as_secs_f64());
    Ok(FastResult {
        outcome: PlanOutcome { sequence, status },
        tree,
        dis_max,
        expansions,
        simulations: counter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::mcts::testutil::{grid, Fixture};
    use crate::mcts::{NoTrace, VecTrace};
    use crate::model::validate_sequence;
    use crate::terrain::{Bounds, Terrain};

    #[test]
    fn expert_rollouts_reach_goal_on_grid() {
        let f = grid(3.0);
        let s = HexapodState::initial(&f.model);
        let r = fast_mcts_plan(
            &f.ctx(),
            &s,
            &SearchConfig::default(),
            SimPolicy::Expert,
            None,
            &mut NoTrace,
        )
        .unwrap();
        assert_eq!(r.outcome.status, PlanStatus::Goal);
        assert_eq!(r.expansions, 1);
        let rep = validate_sequence(&f.model, &f.terrain, &r.outcome.sequence);
        assert!(rep.passed(), "{rep}");
        assert!((r.outcome.sequence.advance() - r.dis_max).abs() < 1e-12);
    }

    #[test]
    fn random_rollouts_are_deterministic_and_valid() {
        let f = grid(3.0);
        let s = HexapodState::initial(&f.model);
        let cfg = SearchConfig {
            seed: 11,
            ..SearchConfig::default()
        };
        let a = fast_mcts_plan(&f.ctx(), &s, &cfg, SimPolicy::Random, None, &mut NoTrace).unwrap();
        let b = fast_mcts_plan(&f.ctx(), &s, &cfg, SimPolicy::Random, None, &mut NoTrace).unwrap();
        assert_eq!(a.outcome.sequence.states, b.outcome.sequence.states);
        assert_eq!(a.outcome.status, PlanStatus::Goal);
        let rep = validate_sequence(&f.model, &f.terrain, &a.outcome.sequence);
        assert!(rep.passed(), "{rep}");
    }

    /// A strip of footholds that ends 1.5 m ahead: the search backtracks all
    /// the way and reports the farthest branch.
    #[test]
    fn dead_end_backtracks_to_root() {
        let model = crate::model::RobotModel::default();
        let mut pts = Vec::new();
        for i in -20..=25 {
            for j in -15..=15 {
                pts.push(Point3::new(f64::from(i) * 0.1, f64::from(j) * 0.1, 0.0));
            }
        }
        let terrain = Terrain::new(
            Bounds {
                x_min: -2.5,
                x_max: 6.0,
                y_min: -2.0,
                y_max: 2.0,
            },
            5.0,
            0,
            pts,
        )
        .unwrap();
        let f = Fixture {
            model,
            terrain,
            expert: Default::default(),
        };
        let s = HexapodState::initial(&f.model);
        let cfg = SearchConfig::default();
        let mut tr = VecTrace::default();
        let r = fast_mcts_plan(&f.ctx(), &s, &cfg, SimPolicy::Expert, None, &mut tr).unwrap();
        assert_eq!(r.outcome.status, PlanStatus::Incomplete);
        assert!(r.expansions > 1);
        assert!(r.dis_max > 0.5 && r.dis_max < 2.5);
        assert!((r.outcome.sequence.advance() - r.dis_max).abs() < 1e-12);
        assert!(r.tree.root().untried().is_some_and(|u| u.is_empty()));
        let masters: Vec<f64> =
            tr.0.iter()
                .filter_map(|e| match e {
                    TraceEvent::MasterBranch { dis_max, .. } => Some(*dis_max),
                    _ => None,
                })
                .collect();
        assert!(masters.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn trace_back_walks_to_the_nearest_open_node() {
        let f = grid(3.0);
        let ctx = f.ctx();
        let s = HexapodState::initial(&f.model);
        let mut t = Tree::new(s.clone());
        let mut counter = 0;
        let (child, r) = expand_and_simulate(
            &mut t,
            &ctx,
            NodeId::ROOT,
            SimPolicy::Expert,
            &SearchConfig::default(),
            &mut counter,
            &mut NoTrace,
        )
        .unwrap();
        let end = update_master_branch(&mut t, child, r.states.clone());
        assert_eq!(t[end].depth as usize, 1 + r.states.len());
        assert_eq!(trace_back(&mut t, &ctx, child), Some(child));
        let _ = t.take_all_untried(child, &ctx);
        let _ = t.take_all_untried(NodeId::ROOT, &ctx);
        assert_eq!(trace_back(&mut t, &ctx, child), None);
    }
}
