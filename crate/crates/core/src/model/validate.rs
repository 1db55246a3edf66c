use std::fmt;

use serde::Serialize;

use super::{support_margin, HexapodState, RobotModel, SolutionSequence, SupportState, LEG_COUNT};
use crate::geometry::{Point3, GEOM_EPS};
use crate::terrain::Terrain;

/// Interior samples of the COG path checked for stability, per transition.
const INTERIOR_SAMPLES: usize = 10;
/// Horizontal distance under which a foot counts as standing on a foothold.
const FOOTHOLD_TOL: f64 = 1e-6;
const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptySequence,
    MetricsMismatch,
    MissingSupport,
    InadmissibleSupport,
    RepeatedSupport,
    FaultSupport,
    SupportFootMoved,
    FaultFootMismatch,
    Unstable,
    NotOnTerrain,
    Unreachable,
    StepMismatch,
    SharedFoothold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Index of the state the violation was found in (0 = start stance).
    pub state: usize,
    pub leg: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state {}: {:?}", self.state, self.kind)?;
        if let Some(leg) = self.leg {
            write!(f, " (leg {})", leg + 1)?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub transitions: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first() {
            None => write!(f, "ok ({} transitions)", self.transitions),
            Some(v) => write!(
                f,
                "FAILED with {} violation(s); first: {v}",
                self.violations.len()
            ),
        }
    }
}

struct Checker<'a> {
    model: &'a RobotModel,
    terrain: &'a Terrain,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, state: usize, leg: Option<usize>, kind: ViolationKind, detail: String) {
        self.out.push(Violation {
            state,
            leg,
            kind,
            detail,
        });
    }

    fn on_terrain(&mut self, idx: usize, leg: usize, foot: Point3) {
        if !self.terrain.has_foothold(foot, FOOTHOLD_TOL) {
            self.push(
                idx,
                Some(leg),
                ViolationKind::NotOnTerrain,
                format!("foot at ({:.6}, {:.6}) is not a foothold", foot.x, foot.y),
            );
        }
    }

    fn reachable(&mut self, idx: usize, leg: usize, foot: Point3, at: &HexapodState, when: &str) {
        let sector = self.model.leg_sector(leg, at.cog_xy(), at.yaw);
        if !sector.contains_tol(foot.xy(), GEOM_EPS) {
            self.push(
                idx,
                Some(leg),
                ViolationKind::Unreachable,
                format!(
                    "foot ({:.6}, {:.6}) outside the workspace {when}",
                    foot.x, foot.y
                ),
            );
        }
    }

    fn fault_consistency(&mut self, idx: usize, s: &HexapodState) {
        for leg in 0..LEG_COUNT {
            if s.fault.contains(leg) != s.feet[leg].is_none() {
                self.push(
                    idx,
                    Some(leg),
                    ViolationKind::FaultFootMismatch,
                    "a leg floats exactly when it is faulted".into(),
                );
            }
        }
        for leg in 0..LEG_COUNT {
            let Some(p) = s.feet[leg] else { continue };
            if let Some(other) = (0..leg)
                .find(|&o| s.feet[o].is_some_and(|q| q.xy().distance(p.xy()) < FOOTHOLD_TOL))
            {
                self.push(
                    idx,
                    Some(leg),
                    ViolationKind::SharedFoothold,
                    format!("stands on the foothold of leg {}", other + 1),
                );
            }
        }
    }

    fn start(&mut self, s: &HexapodState) {
        self.fault_consistency(0, s);
        for leg in 0..LEG_COUNT {
            if let Some(foot) = s.feet[leg] {
                self.on_terrain(0, leg, foot);
                self.reachable(0, leg, foot, s, "at the start");
            }
        }
        let grounded = s.grounded();
        if !grounded.is_admissible() {
            self.push(
                0,
                None,
                ViolationKind::InadmissibleSupport,
                format!("start stance has only {} grounded legs", grounded.count()),
            );
        } else {
            let m = support_margin(self.model, s, grounded, s.cog_xy()).unwrap_or(f64::MIN);
            if m < -STABILITY_TOL {
                self.push(
                    0,
                    None,
                    ViolationKind::Unstable,
                    format!("start margin {m:.6}"),
                );
            }
        }
    }

    fn transition(&mut self, idx: usize, prev: &HexapodState, next: &HexapodState) {
        let Some(support) = next.support else {
            self.push(
                idx,
                None,
                ViolationKind::MissingSupport,
                "no support state".into(),
            );
            return;
        };
        if !support.is_admissible() {
            self.push(
                idx,
                None,
                ViolationKind::InadmissibleSupport,
                format!("{support} has fewer than 3 legs"),
            );
            return;
        }
        if prev.support == Some(support) {
            self.push(
                idx,
                None,
                ViolationKind::RepeatedSupport,
                format!("{support} repeats the previous support state"),
            );
        }
        self.fault_consistency(idx, next);

        let mut support_ok = true;
        for leg in support.legs() {
            if next.fault.contains(leg) || prev.fault.contains(leg) || prev.feet[leg].is_none() {
                self.push(
                    idx,
                    Some(leg),
                    ViolationKind::FaultSupport,
                    "fault or floating leg used as support".into(),
                );
                support_ok = false;
                continue;
            }
            if next.feet[leg] != prev.feet[leg] {
                self.push(
                    idx,
                    Some(leg),
                    ViolationKind::SupportFootMoved,
                    "supporting foot changed position".into(),
                );
            }
        }

        for leg in 0..LEG_COUNT {
            let Some(foot) = next.feet[leg] else { continue };
            if !support.contains(leg) {
                self.on_terrain(idx, leg, foot);
            }
            self.reachable(idx, leg, foot, next, "on arrival");
            if support.contains(leg) {
                self.reachable(idx, leg, foot, prev, "on departure");
            }
        }

        let step = prev.cog_xy().distance(next.cog_xy());
        if (step - next.step_from_parent).abs() > 1e-9 {
            self.push(
                idx,
                None,
                ViolationKind::StepMismatch,
                format!(
                    "recorded step {:.9} but the COG moved {step:.9}",
                    next.step_from_parent
                ),
            );
        }

        if support_ok {
            self.stable_path(idx, prev, next, support);
        }
    }

    fn stable_path(
        &mut self,
        idx: usize,
        prev: &HexapodState,
        next: &HexapodState,
        support: SupportState,
    ) {
        let (a, b) = (prev.cog_xy(), next.cog_xy());
        let n = INTERIOR_SAMPLES + 1;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let p = a + (b - a) * t;
            let m = match support_margin(self.model, prev, support, p) {
                Ok(m) => m,
                Err(e) => {
                    self.push(idx, None, ViolationKind::Unstable, e.to_string());
                    return;
                }
            };
            if m < -STABILITY_TOL {
                self.push(
                    idx,
                    None,
                    ViolationKind::Unstable,
                    format!("margin {m:.6} at fraction {t:.3} of the body move"),
                );
                return;
            }
        }
    }
}

/// Checks every transition of `seq` against the robot and terrain rules and
/// reports all violations found.
pub fn validate_sequence(
    model: &RobotModel,
    terrain: &Terrain,
    seq: &SolutionSequence,
) -> ValidationReport {
    let mut c = Checker {
        model,
        terrain,
        out: Vec::new(),
    };
    let Some(first) = seq.states.first() else {
        c.push(0, None, ViolationKind::EmptySequence, "no states".into());
        return ValidationReport {
            transitions: 0,
            violations: c.out,
        };
    };
    if seq.steps.len() + 1 != seq.states.len() {
        c.push(
            0,
            None,
            ViolationKind::MetricsMismatch,
            format!(
                "{} states but {} step records",
                seq.states.len(),
                seq.steps.len()
            ),
        );
    }
    c.start(first);
    for (i, pair) in seq.states.windows(2).enumerate() {
        c.transition(i + 1, &pair[0], &pair[1]);
    }
    ValidationReport {
        transitions: seq.states.len() - 1,
        violations: c.out,
    }
}
