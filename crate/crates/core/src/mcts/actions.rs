use rand::Rng;

use super::{SearchContext, SimPolicy};
use crate::expert::{
    action_for, apply_action, candidate_support_states, expert_step, motion_direction,
    CandidateAction, SupportCandidate, MIN_STEP,
};
use crate::geometry::Vec2;
use crate::model::HexapodState;

/// Step lengths per support state, as fractions of its maximum step.
const STEP_FRACTIONS: u8 = 3;

/// An action whose footholds have not been chosen yet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingAction {
    pub candidate: SupportCandidate,
    /// Step is `fraction / 3` of the maximum step (1, 2 or 3).
    pub fraction: u8,
    pub direction: Vec2,
}

impl PendingAction {
    pub fn step_length(&self) -> f64 {
        self.candidate.max_step * f64::from(self.fraction) / f64::from(STEP_FRACTIONS)
    }

    pub fn materialize(&self, ctx: &SearchContext, state: &HexapodState) -> CandidateAction {
        action_for(
            ctx.model,
            state,
            ctx.terrain,
            &self.candidate,
            self.step_length(),
            self.direction,
            ctx.expert,
        )
    }
}

/// Support states that allow a step, each with the three step lengths, in
/// table order.
pub fn pending_actions(ctx: &SearchContext, state: &HexapodState) -> Vec<PendingAction> {
    let dir = motion_direction(state, ctx.terrain);
    candidate_support_states(ctx.model, state, dir)
        .into_iter()
        .filter(|c| c.max_step > MIN_STEP)
        .flat_map(|candidate| {
            (1..=STEP_FRACTIONS).map(move |fraction| PendingAction {
                candidate,
                fraction,
                direction: dir,
            })
        })
        .collect()
}

/// The full action set of `state`: three step lengths per surviving support
/// state, footholds chosen by the expert rule.
pub fn enumerate_actions(ctx: &SearchContext, state: &HexapodState) -> Vec<CandidateAction> {
    pending_actions(ctx, state)
        .iter()
        .map(|p| p.materialize(ctx, state))
        .collect()
}

/// Uniform draw from [`enumerate_actions`], building only the drawn action.
pub fn random_action<R: Rng>(
    ctx: &SearchContext,
    state: &HexapodState,
    rng: &mut R,
) -> Option<CandidateAction> {
    let dir = motion_direction(state, ctx.terrain);
    let mut cands = candidate_support_states(ctx.model, state, dir);
    cands.retain(|c| c.max_step > MIN_STEP);
    if cands.is_empty() {
        return None;
    }
    let k = rng.gen_range(0..cands.len() * STEP_FRACTIONS as usize);
    let p = PendingAction {
        candidate: cands[k / STEP_FRACTIONS as usize],
        fraction: (k % STEP_FRACTIONS as usize) as u8 + 1,
        direction: dir,
    };
    Some(p.materialize(ctx, state))
}

/// One rollout step under `policy`; `None` when stuck.
pub fn policy_step<R: Rng>(
    ctx: &SearchContext,
    state: &HexapodState,
    policy: SimPolicy,
    rng: &mut R,
) -> Option<HexapodState> {
    match policy {
        SimPolicy::Expert => expert_step(ctx.model, state, ctx.terrain, ctx.expert),
        SimPolicy::Random => {
            random_action(ctx, state, rng).map(|a| apply_action(ctx.model, state, &a))
        }
    }
}
