use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::simulate::{simulate, Horizon, Rollout};
use super::standard::{expand_random, select_expandable};
use super::{
    sim_rng, GoalFlag, NodeId, Score, SearchConfig, SearchContext, SimPolicy, TraceEvent,
    TraceSink, Tree,
};
use crate::model::{HexapodState, SolutionSequence};
use crate::plan::{past, PlanOutcome, PlanStatus};

/// Weights of the four reward terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    /// Mean rollout advance per step.
    pub sim_step: f64,
    /// Mean step length along the chain back to the root.
    pub step_exp: f64,
    /// Mean stability margin along the same chain.
    pub margin_exp: f64,
    /// The node's own step.
    pub dis_to_par: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            sim_step: 3.0,
            step_exp: 1.0,
            margin_exp: 0.5,
            dis_to_par: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeReward {
    pub sim_step: f64,
    pub step_exp: f64,
    pub margin_exp: f64,
    pub dis_to_par: f64,
    pub goal: GoalFlag,
}

impl NodeReward {
    pub fn total(&self, w: &RewardWeights) -> f64 {
        w.sim_step * self.sim_step
            + w.step_exp * self.step_exp
            + w.margin_exp * self.margin_exp
            + w.dis_to_par * self.dis_to_par
    }

    pub fn score(&self, w: &RewardWeights) -> Score {
        Score::new(self.goal, self.total(w))
    }
}

/// Reward of `node` after `rollout`. Chain means run over the node and its
/// ancestors up to the current root, whose step counts as zero. The rollout
/// advance is divided by `sim_steps`, or by the steps actually taken when the
/// rollout reached the goal. A node already past the goal line (empty
/// rollout) is flagged above any node that merely rolled out to it.
pub fn node_reward(tree: &Tree, node: NodeId, rollout: &Rollout, sim_steps: usize) -> NodeReward {
    let (mut steps, mut margins, mut n) = (0.0, 0.0, 0.0);
    let mut cur = Some(node);
    while let Some(id) = cur {
        let s = &tree[id].state;
        if id != NodeId::ROOT {
            steps += s.step_from_parent;
        }
        margins += s.stability_margin;
        n += 1.0;
        cur = tree[id].parent;
    }
    let denom = if rollout.reached_goal {
        rollout.steps().max(1)
    } else {
        sim_steps.max(1)
    };
    NodeReward {
        sim_step: rollout.distance / denom as f64,
        step_exp: steps / n,
        margin_exp: margins / n,
        dis_to_par: tree[node].state.step_from_parent,
        goal: match (rollout.reached_goal, rollout.states.is_empty()) {
            (false, _) => GoalFlag::None,
            (true, false) => GoalFlag::Rollout,
            (true, true) => GoalFlag::Node,
        },
    }
}

/// Sets the leaf's score, then adds a visit along the path to the root and
/// raises each ancestor's score to `score` where it is higher.
pub fn backprop_max(tree: &mut Tree, leaf: NodeId, score: Score) {
    let n = tree.node_mut(leaf);
    n.score = score;
    n.n_visit += 1;
    let mut cur = n.parent;
    while let Some(id) = cur {
        let n = tree.node_mut(id);
        n.n_visit += 1;
        if score > n.score {
            n.score = score;
        }
        cur = n.parent;
    }
}

#[derive(Debug, Clone)]
pub struct SlidingResult {
    pub outcome: PlanOutcome,
    /// Farthest forward position reached by any rollout (m).
    pub l_max: f64,
    pub decisions: u64,
    pub simulations: u64,
}

/// Runs `cfg.n_samp` samples on `tree` and returns the root child with the
/// best score (the first on ties), or `None` if the root has no children.
/// `l_max` is raised to the farthest rollout end.
#[allow(clippy::too_many_arguments)]
pub fn sliding_decide(
    tree: &mut Tree,
    ctx: &SearchContext,
    cfg: &SearchConfig,
    weights: &RewardWeights,
    policy: SimPolicy,
    l_max: &mut f64,
    counter: &mut u64,
    trace: &mut dyn TraceSink,
) -> Option<NodeId> {
    let limits = cfg.rollout_limits(policy);
    for _ in 0..cfg.n_samp {
        let Some(parent) = select_expandable(tree, ctx, cfg.c, |n| n.score.rank()) else {
            break;
        };
        let mut rng = sim_rng(cfg.seed, *counter);
        let leaf = expand_random(tree, ctx, parent, &mut rng);
        let r = simulate(
            ctx,
            &tree[leaf].state,
            policy,
            Horizon::Steps(cfg.sim_steps),
            &limits,
            &mut rng,
        );
        let end_x = r.states.last().unwrap_or(&tree[leaf].state).cog.x;
        *l_max = l_max.max(end_x);
        let score = node_reward(tree, leaf, &r, cfg.sim_steps).score(weights);
        backprop_max(tree, leaf, score);
        trace.record(TraceEvent::Iteration {
            iteration: *counter,
            depth: tree[leaf].depth,
            support: tree[leaf]
                .state
                .support
                .map(|s| s.to_string())
                .unwrap_or_default(),
            step_length: tree[leaf].state.step_from_parent,
            passed: r.reached_goal,
            distance: r.distance,
        });
        *counter += 1;
    }
    let root = tree.root();
    let mut best: Option<NodeId> = None;
    for &ch in &root.children {
        if best.is_none_or(|b| tree[ch].score > tree[b].score) {
            best = Some(ch);
        }
    }
    best
}

/// Receding-horizon search: each decision samples the tree under the current
/// root, commits to the best child, and keeps only that child's subtree.
/// Stops at the goal, when the root comes within `cfg.horizon_eps` of the
/// farthest rollout, after `cfg.stall_decisions` decisions in a row without
/// progress, or at the deadline.
pub fn sliding_mcts_plan(
    ctx: &SearchContext,
    start: &HexapodState,
    cfg: &SearchConfig,
    weights: &RewardWeights,
    deadline: Option<Instant>,
    trace: &mut dyn TraceSink,
) -> SlidingResult {
    let goal_x = ctx.terrain.goal_x();
    let mut tree = Tree::new(start.clone());
    let mut seq = SolutionSequence::new(start.clone());
    let mut l_max = start.cog.x;
    let mut counter = 0u64;
    let mut decisions = 0u64;
    let mut stalled = 0;
    let status = loop {
        if tree.root().state.reached(goal_x) {
            break PlanStatus::Goal;
        }
        if past(deadline) {
            break PlanStatus::Timeout;
        }
        let t0 = Instant::now();
        let best = sliding_decide(
            &mut tree,
            ctx,
            cfg,
            weights,
            cfg.sim_policy,
            &mut l_max,
            &mut counter,
            trace,
        );
        let Some(best) = best else {
            break PlanStatus::Stuck;
        };
        tree = tree.reroot(best);
        let root = tree.root();
        seq.push(root.state.clone(), t0.elapsed().as_secs_f64());
        trace.record(TraceEvent::Decision {
            decision: decisions,
            root_x: root.state.cog.x,
            n_samp: cfg.n_samp,
            support: root
                .state
                .support
                .map(|s| s.to_string())
                .unwrap_or_default(),
            step_length: root.state.step_from_parent,
            score: root.score.value,
            goal: root.score.goal != GoalFlag::None,
            l_max,
            wall_time_s: t0.elapsed().as_secs_f64(),
        });
        decisions += 1;
        if root.state.reached(goal_x) {
            break PlanStatus::Goal;
        }
        stalled = if root.state.step_from_parent < cfg.stuck_eps {
            stalled + 1
        } else {
            0
        };
        if stalled >= cfg.stall_decisions {
            break PlanStatus::Stuck;
        }
        if l_max - root.state.cog.x < cfg.horizon_eps {
            break PlanStatus::Incomplete;
        }
    };
    SlidingResult {
        outcome: PlanOutcome {
            sequence: seq,
            status,
        },
        l_max,
        decisions,
        simulations: counter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::testutil::grid;
    use crate::mcts::{NoTrace, VecTrace};
    use crate::model::validate_sequence;

    fn quick() -> SearchConfig {
        SearchConfig {
            n_samp: 60,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn reward_terms_by_hand() {
        let f = grid(3.0);
        let mut s = HexapodState::initial(&f.model);
        s.stability_margin = 0.2;
        let mut t = Tree::new(s.clone());
        let mut a = s.clone();
        a.step_from_parent = 0.3;
        a.stability_margin = 0.1;
        let ida = t.add_child(NodeId::ROOT, a.clone());
        let mut b = a.clone();
        b.step_from_parent = 0.6;
        b.stability_margin = 0.3;
        let idb = t.add_child(ida, b);
        let r = Rollout {
            passed: false,
            reached_goal: false,
            distance: 2.0,
            states: vec![],
        };
        let w = node_reward(&t, idb, &r, 20);
        assert!((w.sim_step - 0.1).abs() < 1e-12);
        assert!((w.step_exp - 0.3).abs() < 1e-12);
        assert!((w.margin_exp - 0.2).abs() < 1e-12);
        assert!((w.dis_to_par - 0.6).abs() < 1e-12);
        let total = w.total(&RewardWeights::default());
        assert!((total - (0.3 + 0.3 + 0.1 + 0.12)).abs() < 1e-12);
        assert_eq!(w.score(&RewardWeights::default()).goal, GoalFlag::None);
    }

    #[test]
    fn max_backprop_keeps_parent_at_least_child() {
        let s = HexapodState::initial(&crate::model::RobotModel::default());
        let mut t = Tree::new(s.clone());
        let a = t.add_child(NodeId::ROOT, s.clone());
        let b = t.add_child(a, s.clone());
        let c = t.add_child(a, s.clone());
        backprop_max(&mut t, a, Score::new(GoalFlag::None, 0.5));
        backprop_max(&mut t, b, Score::new(GoalFlag::None, 0.9));
        backprop_max(&mut t, c, Score::new(GoalFlag::None, 0.2));
        assert_eq!(t[a].score.value, 0.9);
        assert_eq!(t.root().score.value, 0.9);
        assert_eq!(t[a].n_visit, 3);
        backprop_max(&mut t, c, Score::new(GoalFlag::Rollout, 0.0));
        assert_eq!(t.root().score.goal, GoalFlag::Rollout);
    }

    #[test]
    fn decision_round_counts_samples() {
        let f = grid(4.0);
        let ctx = f.ctx();
        let mut t = Tree::new(HexapodState::initial(&f.model));
        let mut l_max = 0.0;
        let mut counter = 0;
        let cfg = quick();
        let best = sliding_decide(
            &mut t,
            &ctx,
            &cfg,
            &RewardWeights::default(),
            SimPolicy::Random,
            &mut l_max,
            &mut counter,
            &mut NoTrace,
        )
        .unwrap();
        assert_eq!(t.root().n_visit, cfg.n_samp as u64);
        assert_eq!(counter, cfg.n_samp as u64);
        assert!(l_max > 0.5);
        for id in t.ids() {
            for &ch in &t[id].children {
                assert!(t[ch].score <= t[id].score);
            }
        }
        let kept = t.reroot(best);
        assert_eq!(kept.root().n_visit, t[best].n_visit);
    }

    #[test]
    fn plans_to_goal_on_grid() {
        let f = grid(2.0);
        let s = HexapodState::initial(&f.model);
        let mut tr = VecTrace::default();
        let r = sliding_mcts_plan(
            &f.ctx(),
            &s,
            &quick(),
            &RewardWeights::default(),
            None,
            &mut tr,
        );
        assert_eq!(r.outcome.status, PlanStatus::Goal);
        let rep = validate_sequence(&f.model, &f.terrain, &r.outcome.sequence);
        assert!(rep.passed(), "{rep}");
        let decisions =
            tr.0.iter()
                .filter(|e| matches!(e, TraceEvent::Decision { .. }))
                .count();
        assert_eq!(decisions as u64, r.decisions);
        assert_eq!(r.outcome.sequence.step_count() as u64, r.decisions);
        let again = sliding_mcts_plan(
            &f.ctx(),
            &s,
            &quick(),
            &RewardWeights::default(),
            None,
            &mut NoTrace,
        );
        assert_eq!(again.outcome.sequence.states, r.outcome.sequence.states);
    }
}
