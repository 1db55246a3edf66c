use std::time::Instant;

use rand::Rng;

use super::simulate::{simulate, Horizon};
use super::{
    sim_rng, Node, NodeId, SearchConfig, SearchContext, SimPolicy, TraceEvent, TraceSink, Tree,
};
use crate::expert::apply_action;
use crate::model::{HexapodState, SolutionSequence};
use crate::plan::{past, PlanOutcome, PlanStatus};

#[derive(Debug, Clone)]
pub struct StandardResult {
    pub outcome: PlanOutcome,
    pub tree: Tree,
    /// Simulations run.
    pub iterations: u64,
}

/// Adds one visit, and one pass if `passed`, to `leaf` and every ancestor.
pub fn backprop_pass(tree: &mut Tree, leaf: NodeId, passed: bool) {
    let mut cur = Some(leaf);
    while let Some(id) = cur {
        let n = tree.node_mut(id);
        n.n_visit += 1;
        n.n_pass += u64::from(passed);
        cur = n.parent;
    }
}

/// Descends by UCB1 to a node with untried actions. Dead ends met on the
/// way are marked exhausted and the descent restarts. `None` once the whole
/// tree is exhausted.
pub(crate) fn select_expandable(
    tree: &mut Tree,
    ctx: &SearchContext,
    c: f64,
    x: impl Fn(&Node) -> f64,
) -> Option<NodeId> {
    let mut id = NodeId::ROOT;
    loop {
        if tree[id].exhausted {
            return None;
        }
        if tree.untried_len(id, ctx) > 0 {
            return Some(id);
        }
        match super::ucb1_select(tree, id, c, &x) {
            Some(ch) => id = ch,
            None => {
                tree.refresh_exhausted(id);
                id = NodeId::ROOT;
            }
        }
    }
}

/// Expands a uniformly chosen untried action of `id`.
pub(crate) fn expand_random<R: Rng>(
    tree: &mut Tree,
    ctx: &SearchContext,
    id: NodeId,
    rng: &mut R,
) -> NodeId {
    let n = tree.untried_len(id, ctx);
    let pending = tree.take_untried(id, rng.gen_range(0..n));
    let state = &tree[id].state;
    let action = pending.materialize(ctx, state);
    let next = apply_action(ctx.model, state, &action);
    tree.add_child(id, next)
}

/// Plain UCT with pass/visit scoring: rollouts pass when they get
/// `cfg.horizon` metres ahead. Runs until a tree node reaches the goal, the
/// simulation budget is spent, the tree is exhausted or the deadline passes.
pub fn standard_mcts_plan(
    ctx: &SearchContext,
    start: &HexapodState,
    cfg: &SearchConfig,
    policy: SimPolicy,
    deadline: Option<Instant>,
    trace: &mut dyn TraceSink,
) -> StandardResult {
    let t0 = Instant::now();
    let goal_x = ctx.terrain.goal_x();
    let limits = cfg.rollout_limits(policy);
    let mut tree = Tree::new(start.clone());
    let mut iterations = 0u64;
    let mut found = None;
    let status = loop {
        if tree.root().state.reached(goal_x) {
            found = Some(NodeId::ROOT);
            break PlanStatus::Goal;
        }
        if iterations >= cfg.budget as u64 {
            break PlanStatus::Incomplete;
        }
        if past(deadline) {
            break PlanStatus::Timeout;
        }
        let Some(parent) = select_expandable(&mut tree, ctx, cfg.c, Node::pass_ratio) else {
            break PlanStatus::Stuck;
        };
        let mut rng = sim_rng(cfg.seed, iterations);
        let leaf = expand_random(&mut tree, ctx, parent, &mut rng);
        let r = simulate(
            ctx,
            &tree[leaf].state,
            policy,
            Horizon::Distance(cfg.horizon),
            &limits,
            &mut rng,
        );
        backprop_pass(&mut tree, leaf, r.passed);
        let s = &tree[leaf].state;
        trace.record(TraceEvent::Iteration {
            iteration: iterations,
            depth: tree[leaf].depth,
            support: s.support.map(|x| x.to_string()).unwrap_or_default(),
            step_length: s.step_from_parent,
            passed: r.passed,
            distance: r.distance,
        });
        iterations += 1;
        if s.reached(goal_x) {
            found = Some(leaf);
            break PlanStatus::Goal;
        }
    };
    let end = found.unwrap_or_else(|| tree.deepest());
    let mut sequence = SolutionSequence::from_states(tree.states_to(end));
    sequence.spread_planning_time(t0.elapsed().as_secs_f64());
    StandardResult {
        outcome: PlanOutcome { sequence, status },
        tree,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::testutil::grid;
    use crate::mcts::NoTrace;
    use crate::model::validate_sequence;

    fn check_visit_invariants(t: &Tree) {
        for id in t.ids() {
            let n = &t[id];
            assert!(n.n_pass <= n.n_visit);
            let sum: u64 = n.children.iter().map(|&c| t[c].n_visit).sum();
            let own = u64::from(id != NodeId::ROOT);
            assert_eq!(n.n_visit, own + sum, "node {id:?}");
        }
    }

    #[test]
    fn reaches_a_near_goal_on_a_dense_grid() {
        let f = grid(0.9);
        let cfg = SearchConfig {
            budget: 1500,
            horizon: 0.6,
            ..SearchConfig::default()
        };
        let s = HexapodState::initial(&f.model);
        let r = standard_mcts_plan(&f.ctx(), &s, &cfg, SimPolicy::Expert, None, &mut NoTrace);
        assert_eq!(r.outcome.status, PlanStatus::Goal);
        let rep = validate_sequence(&f.model, &f.terrain, &r.outcome.sequence);
        assert!(rep.passed(), "{rep}");
        assert_eq!(r.tree.root().n_visit, r.iterations);
        check_visit_invariants(&r.tree);
    }

    #[test]
    fn budget_exhaustion_returns_deepest_path() {
        let f = grid(6.0);
        let cfg = SearchConfig {
            budget: 60,
            ..SearchConfig::default()
        };
        let s = HexapodState::initial(&f.model);
        let mut tr = crate::mcts::VecTrace::default();
        let r = standard_mcts_plan(&f.ctx(), &s, &cfg, SimPolicy::Random, None, &mut tr);
        assert_eq!(r.outcome.status, PlanStatus::Incomplete);
        assert_eq!(r.iterations, 60);
        assert_eq!(tr.0.len(), 60);
        assert_eq!(
            r.outcome.sequence.step_count() as u32,
            r.tree[r.tree.deepest()].depth
        );
        check_visit_invariants(&r.tree);
        let again = standard_mcts_plan(&f.ctx(), &s, &cfg, SimPolicy::Random, None, &mut NoTrace);
        assert_eq!(again.outcome.sequence.states, r.outcome.sequence.states);
    }
}
