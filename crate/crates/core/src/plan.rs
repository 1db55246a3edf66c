//! Outcome types shared by every planner.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{HexapodState, SolutionSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    /// The COG crossed the goal line.
    Goal,
    /// The planner ran out of moves or stopped making progress.
    Stuck,
    /// A search budget or step cap ended the run before the goal.
    Incomplete,
    /// The wall-clock deadline expired.
    Timeout,
}

impl PlanStatus {
    pub fn name(self) -> &'static str {
        match self {
            PlanStatus::Goal => "goal",
            PlanStatus::Stuck => "stuck",
            PlanStatus::Incomplete => "incomplete",
            PlanStatus::Timeout => "timeout",
        }
    }
}

impl fmt::Display for PlanStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub sequence: SolutionSequence,
    pub status: PlanStatus,
}

impl PlanOutcome {
    pub fn reached_goal(&self) -> bool {
        self.status == PlanStatus::Goal
    }
}

/// Stop rules for step-by-step planners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLimits {
    /// Consecutive short steps that count as being stuck.
    pub n_stop: usize,
    /// A step shorter than this makes no progress (m).
    pub stuck_eps: f64,
    pub max_steps: usize,
    pub deadline: Option<Instant>,
}

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            n_stop: 5,
            stuck_eps: 0.01,
            max_steps: 1000,
            deadline: None,
        }
    }
}

pub(crate) fn past(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Repeatedly applies `step` from `start`, timing each call, until the goal
/// is reached or one of the limits fires.
pub(crate) fn drive<F>(
    start: HexapodState,
    goal_x: f64,
    limits: &StepLimits,
    mut step: F,
) -> PlanOutcome
where
    F: FnMut(&HexapodState, usize) -> Option<HexapodState>,
{
    let mut seq = SolutionSequence::new(start);
    let mut short = 0;
    let status = loop {
        let cur = seq.last();
        if cur.reached(goal_x) {
            break PlanStatus::Goal;
        }
        if seq.step_count() >= limits.max_steps {
            break PlanStatus::Incomplete;
        }
        if past(limits.deadline) {
            break PlanStatus::Timeout;
        }
        let t0 = Instant::now();
        let next = step(cur, seq.step_count());
        let dt = t0.elapsed().as_secs_f64();
        let Some(next) = next else {
            break PlanStatus::Stuck;
        };
        short = if next.step_from_parent < limits.stuck_eps {
            short + 1
        } else {
            0
        };
        seq.push(next, dt);
        if short >= limits.n_stop {
            break PlanStatus::Stuck;
        }
    };
    PlanOutcome {
        sequence: seq,
        status,
    }
}
