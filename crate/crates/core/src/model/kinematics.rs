use super::{HexapodState, ModelError, RobotModel, SupportState, LEG_COUNT};
use crate::geometry::{Polygon2, RayExit, Vec2};

/// How far the body may advance along `dir` before `leg`'s foot leaves its
/// workspace (the foot travels along `-dir` in the body frame).
pub fn kinematic_margin(
    model: &RobotModel,
    state: &HexapodState,
    leg: usize,
    dir: Vec2,
) -> Result<RayExit, ModelError> {
    let foot = state.feet[leg].ok_or(ModelError::FloatingLeg(leg))?;
    Ok(model
        .leg_sector(leg, state.cog_xy(), state.yaw)
        .ray_exit(foot.xy(), -dir))
}

/// Kinematic margin of every grounded leg; `None` for floating legs.
pub fn leg_margins(
    model: &RobotModel,
    state: &HexapodState,
    dir: Vec2,
) -> [Option<f64>; LEG_COUNT] {
    std::array::from_fn(|leg| {
        kinematic_margin(model, state, leg, dir)
            .ok()
            .map(|exit| exit.distance)
    })
}

/// Convex hull of the horizontal projections of the feet of `legs`.
pub fn support_polygon(state: &HexapodState, legs: SupportState) -> Result<Polygon2, ModelError> {
    let mut pts = Vec::with_capacity(LEG_COUNT);
    for leg in legs.legs() {
        pts.push(state.feet[leg].ok_or(ModelError::FloatingLeg(leg))?.xy());
    }
    Ok(Polygon2::convex_hull(&pts)?)
}

fn shrunk_polygon(
    model: &RobotModel,
    state: &HexapodState,
    legs: SupportState,
) -> Result<Polygon2, ModelError> {
    Ok(support_polygon(state, legs)?.shrink(model.stability_margin))
}

/// Static margin of `cog` against the shrunk polygon of `legs`' feet.
pub fn support_margin(
    model: &RobotModel,
    state: &HexapodState,
    legs: SupportState,
    cog: Vec2,
) -> Result<f64, ModelError> {
    Ok(shrunk_polygon(model, state, legs)?.point_margin(cog))
}

/// Static margin of the state's own COG against all grounded feet.
pub fn stance_margin(model: &RobotModel, state: &HexapodState) -> f64 {
    support_margin(model, state, state.grounded(), state.cog_xy()).unwrap_or(f64::MIN)
}

/// Farthest COG advance along `dir` that keeps it inside the shrunk
/// polygon of the given supporting feet.
pub fn max_advance_for(
    model: &RobotModel,
    state: &HexapodState,
    support: SupportState,
    dir: Vec2,
) -> Result<RayExit, ModelError> {
    Ok(shrunk_polygon(model, state, support)?.ray_exit(state.cog_xy(), dir))
}

/// [`max_advance_for`] over every grounded foot.
pub fn max_advance(
    model: &RobotModel,
    state: &HexapodState,
    dir: Vec2,
) -> Result<RayExit, ModelError> {
    max_advance_for(model, state, state.grounded(), dir)
}

fn check_support(state: &HexapodState, support: SupportState) -> Result<(), ModelError> {
    let infeasible = |reason: String| Err(ModelError::InfeasibleSupport { support, reason });
    if !support.is_admissible() {
        return infeasible(format!("only {} supporting legs", support.count()));
    }
    if support.intersects(state.fault.bits()) {
        return infeasible(format!("fault legs {} cannot support", state.fault));
    }
    if let Some(leg) = support.legs().find(|&l| state.feet[l].is_none()) {
        return infeasible(format!("leg {} has no foothold", leg + 1));
    }
    Ok(())
}

/// Greedy step size: the smaller of every supporting leg's kinematic margin
/// and the maximum advance over the supporting feet.
pub fn max_step_length(
    model: &RobotModel,
    state: &HexapodState,
    support: SupportState,
    dir: Vec2,
) -> Result<f64, ModelError> {
    let margins = leg_margins(model, state, dir);
    max_step_length_from(&margins, model, state, support, dir)
}

/// [`max_step_length`] with precomputed per-leg kinematic margins.
pub fn max_step_length_from(
    margins: &[Option<f64>; LEG_COUNT],
    model: &RobotModel,
    state: &HexapodState,
    support: SupportState,
    dir: Vec2,
) -> Result<f64, ModelError> {
    check_support(state, support)?;
    let km = support
        .legs()
        .map(|l| margins[l].unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    let aa = max_advance_for(model, state, support, dir)?.distance;
    Ok(km.min(aa).max(0.0))
}
