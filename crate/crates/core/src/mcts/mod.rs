//! Tree search over hexapod states: shared machinery (action space, tree,
//! UCB1, rollouts, pass/visit backpropagation) and the three planners built
//! on it.

mod actions;
mod fast;
mod simulate;
mod sliding;
mod standard;
mod trace;
mod tree;
mod ucb;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expert::ExpertWeights;
use crate::model::RobotModel;
use crate::terrain::Terrain;

pub use actions::{enumerate_actions, pending_actions, policy_step, random_action, PendingAction};
pub use fast::{expand_and_simulate, fast_mcts_plan, trace_back, update_master_branch, FastResult};
pub use simulate::{simulate, Horizon, Rollout, RolloutLimits};
pub use sliding::{
    backprop_max, node_reward, sliding_decide, sliding_mcts_plan, NodeReward, RewardWeights,
    SlidingResult,
};
pub use standard::{backprop_pass, standard_mcts_plan, StandardResult};
pub use trace::{JsonLinesTrace, NoTrace, TraceEvent, TraceSink, VecTrace};
pub use tree::{GoalFlag, Node, NodeId, Score, Tree};
pub use ucb::{ucb1, ucb1_select};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search exceeded its iteration cap of {0}")]
    IterationCap(usize),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
}

/// Rollout policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimPolicy {
    /// The free fault-tolerant gait.
    Expert,
    /// Uniform choice over the enumerated actions.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// UCB1 exploration coefficient.
    pub c: f64,
    /// Consecutive short steps that end an expert rollout.
    pub n_stop: usize,
    /// Consecutive short steps that end a random rollout.
    pub random_n_stop: usize,
    /// A step shorter than this makes no progress (m).
    pub stuck_eps: f64,
    /// Distance horizon of standard-search rollouts (m).
    pub horizon: f64,
    /// Fixed rollout length of the sliding search (steps).
    pub sim_steps: usize,
    /// Samples per sliding decision.
    pub n_samp: usize,
    /// The sliding search stops when the root is this close to the farthest
    /// rollout (m).
    pub horizon_eps: f64,
    /// Hard cap on the length of any rollout.
    pub max_rollout_steps: usize,
    /// Loop cap for the fast search.
    pub iteration_cap: usize,
    /// Consecutive sliding decisions with no progress before giving up.
    pub stall_decisions: usize,
    /// Simulation budget of the standard search.
    pub budget: usize,
    pub sim_policy: SimPolicy,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            c: 0.3,
            n_stop: 5,
            random_n_stop: 15,
            stuck_eps: 0.01,
            horizon: 2.0,
            sim_steps: 20,
            n_samp: 500,
            horizon_eps: 0.05,
            max_rollout_steps: 400,
            iteration_cap: 100_000,
            stall_decisions: 15,
            budget: 2000,
            sim_policy: SimPolicy::Random,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::InvalidConfig(m));
        if !(self.c.is_finite() && self.c >= 0.0) {
            return bad(format!("c must be >= 0, got {}", self.c));
        }
        for (name, v) in [
            ("n_stop", self.n_stop),
            ("random_n_stop", self.random_n_stop),
            ("sim_steps", self.sim_steps),
            ("n_samp", self.n_samp),
            ("max_rollout_steps", self.max_rollout_steps),
            ("iteration_cap", self.iteration_cap),
            ("stall_decisions", self.stall_decisions),
            ("budget", self.budget),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for (name, v) in [
            ("stuck_eps", self.stuck_eps),
            ("horizon", self.horizon),
            ("horizon_eps", self.horizon_eps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Rollout stop rules for `policy`.
    pub fn rollout_limits(&self, policy: SimPolicy) -> RolloutLimits {
        RolloutLimits {
            n_stop: match policy {
                SimPolicy::Expert => self.n_stop,
                SimPolicy::Random => self.random_n_stop,
            },
            stuck_eps: self.stuck_eps,
            max_steps: self.max_rollout_steps,
        }
    }
}

/// Everything a search needs to generate moves.
#[derive(Debug, Clone, Copy)]
pub struct SearchContext<'a> {
    pub model: &'a RobotModel,
    pub terrain: &'a Terrain,
    pub expert: &'a ExpertWeights,
}

/// Generator for simulation `index` of a search seeded with `seed`. Streams
/// depend only on the pair, never on execution order.
pub fn sim_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
