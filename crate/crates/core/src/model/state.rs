use serde::{Deserialize, Serialize};

use super::{FaultState, RobotModel, SupportState, LEG_COUNT};
use crate::geometry::{Point3, Vec2};

/// Robot state after a transition.
///
/// `support` and `fault` describe the transition that produced this state
/// (`support` is `None` for the initial stance). Fault legs carry no
/// foothold: their foot is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HexapodState {
    /// Body heading about the vertical axis (rad); 0 in planar runs.
    pub yaw: f64,
    pub cog: Point3,
    pub support: Option<SupportState>,
    pub fault: FaultState,
    pub feet: [Option<Point3>; LEG_COUNT],
    /// Body displacement from the previous state (m).
    pub step_from_parent: f64,
    /// Margin of the COG against the shrunk polygon of all grounded feet.
    pub stability_margin: f64,
}

impl HexapodState {
    /// Standing at the origin on the nominal stance.
    pub fn initial(model: &RobotModel) -> Self {
        let feet = model.start_stance().map(Some);
        let mut state = Self {
            yaw: 0.0,
            cog: Point3::new(0.0, 0.0, model.standing_height),
            support: None,
            fault: FaultState::NONE,
            feet,
            step_from_parent: 0.0,
            stability_margin: 0.0,
        };
        state.stability_margin = super::stance_margin(model, &state);
        state
    }

    pub fn cog_xy(&self) -> Vec2 {
        self.cog.xy()
    }

    /// Legs currently standing on a foothold.
    pub fn grounded(&self) -> SupportState {
        SupportState::from_bits(
            (0..LEG_COUNT)
                .filter(|&l| self.feet[l].is_some())
                .fold(0u8, |m, l| m | (1 << l)),
        )
        .expect("six legs")
    }

    pub fn reached(&self, goal_x: f64) -> bool {
        self.cog.x >= goal_x
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step_length: f64,
    pub stability_margin: f64,
    /// Wall-clock planning time attributed to this step. Not serialized so
    /// that sequence files stay reproducible.
    #[serde(skip)]
    pub planning_time_s: f64,
}

/// Ordered states from the start stance to where planning stopped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSequence {
    pub states: Vec<HexapodState>,
    /// One entry per transition (`states.len() - 1`).
    pub steps: Vec<StepMetrics>,
}

impl SolutionSequence {
    pub fn new(start: HexapodState) -> Self {
        Self {
            states: vec![start],
            steps: Vec::new(),
        }
    }

    pub fn from_states(states: Vec<HexapodState>) -> Self {
        let steps = states
            .iter()
            .skip(1)
            .map(|s| StepMetrics {
                step_length: s.step_from_parent,
                stability_margin: s.stability_margin,
                planning_time_s: 0.0,
            })
            .collect();
        Self { states, steps }
    }

    pub fn push(&mut self, state: HexapodState, planning_time_s: f64) {
        self.steps.push(StepMetrics {
            step_length: state.step_from_parent,
            stability_margin: state.stability_margin,
            planning_time_s,
        });
        self.states.push(state);
    }

    /// Spreads `total_s` evenly over all steps.
    pub fn spread_planning_time(&mut self, total_s: f64) {
        let n = self.steps.len().max(1) as f64;
        for s in &mut self.steps {
            s.planning_time_s = total_s / n;
        }
    }

    pub fn start(&self) -> &HexapodState {
        &self.states[0]
    }

    pub fn last(&self) -> &HexapodState {
        self.states.last().expect("sequence holds the start state")
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Forward (+x) progress of the COG from the start.
    pub fn advance(&self) -> f64 {
        self.last().cog.x - self.start().cog.x
    }

    pub fn path_length(&self) -> f64 {
        self.steps.iter().map(|s| s.step_length).sum()
    }

    pub fn mean_step_length(&self) -> f64 {
        if self.steps.is_empty() {
            0.0
        } else {
            self.path_length() / self.steps.len() as f64
        }
    }

    pub fn mean_stability_margin(&self) -> f64 {
        if self.steps.is_empty() {
            0.0
        } else {
            self.steps.iter().map(|s| s.stability_margin).sum::<f64>() / self.steps.len() as f64
        }
    }

    pub fn total_planning_time(&self) -> f64 {
        self.steps.iter().map(|s| s.planning_time_s).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
