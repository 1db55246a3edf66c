use rand::Rng;

use super::actions::policy_step;
use super::{SearchContext, SimPolicy};
use crate::model::HexapodState;

/// When a rollout counts as done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Pass once the COG is this far ahead of the start (m).
    Distance(f64),
    /// Run this many steps.
    Steps(usize),
    /// Run until stuck or at the goal.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutLimits {
    pub n_stop: usize,
    pub stuck_eps: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub passed: bool,
    pub reached_goal: bool,
    /// Forward (+x) progress from the start state (m).
    pub distance: f64,
    /// States visited after the start, in order.
    pub states: Vec<HexapodState>,
}

impl Rollout {
    pub fn steps(&self) -> usize {
        self.states.len()
    }
}

/// Plays `policy` forward from `start` until the goal, the horizon, the
/// stuck rule or the step cap ends the rollout.
pub fn simulate<R: Rng>(
    ctx: &SearchContext,
    start: &HexapodState,
    policy: SimPolicy,
    horizon: Horizon,
    limits: &RolloutLimits,
    rng: &mut R,
) -> Rollout {
    let goal_x = ctx.terrain.goal_x();
    let mut states: Vec<HexapodState> = Vec::new();
    let mut short = 0;
    let (passed, reached_goal) = loop {
        let cur = states.last().unwrap_or(start);
        if cur.reached(goal_x) {
            break (true, true);
        }
        match horizon {
            Horizon::Distance(h) if cur.cog.x - start.cog.x >= h => break (true, false),
            Horizon::Steps(n) if states.len() >= n => break (false, false),
            _ => {}
        }
        if states.len() >= limits.max_steps {
            break (false, false);
        }
        let Some(next) = policy_step(ctx, cur, policy, rng) else {
            break (false, false);
        };
        short = if next.step_from_parent < limits.stuck_eps {
            short + 1
        } else {
            0
        };
        states.push(next);
        if short >= limits.n_stop {
            break (false, false);
        }
    };
    let end = states.last().unwrap_or(start);
    Rollout {
        passed,
        reached_goal,
        distance: end.cog.x - start.cog.x,
        states,
    }
}
