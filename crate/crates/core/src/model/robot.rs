use serde::{Deserialize, Serialize};

use super::{ModelError, LEG_COUNT};
use crate::geometry::{Point3, Sector2, Vec2};

/// Link masses (kg). Kept for completeness; the planners are purely kinematic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkMasses {
    pub body: f64,
    pub coxa: f64,
    pub thigh: f64,
    pub shank: f64,
    pub foot: f64,
}

impl Default for LinkMasses {
    fn default() -> Self {
        Self {
            body: 121.9,
            coxa: 3.6,
            thigh: 22.0,
            shank: 7.2,
            foot: 0.2,
        }
    }
}

/// Fixed robot geometry.
///
/// Legs are indexed 0..6 counter-clockwise starting at the front-right leg:
/// front-right, front-left, middle-left, rear-left, rear-right, middle-right.
/// Each leg's workspace is an annular sector whose apex sits on the coxa
/// joint (on the body circle) and whose bisector points along the mount
/// direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotModel {
    pub body_radius: f64,
    pub coxa_len: f64,
    pub thigh_len: f64,
    pub shank_len: f64,
    pub foot_len: f64,
    /// Mount angle of each leg in the body frame, degrees from +x.
    pub leg_mount_deg: [f64; LEG_COUNT],
    pub workspace_r_min: f64,
    pub workspace_r_max: f64,
    pub workspace_half_angle_deg: f64,
    /// Constant stability margin used to shrink support polygons (m).
    pub stability_margin: f64,
    pub standing_height: f64,
    pub masses: LinkMasses,
}

impl Default for RobotModel {
    fn default() -> Self {
        Self {
            body_radius: 0.4,
            coxa_len: 0.18,
            thigh_len: 0.5,
            shank_len: 0.5,
            foot_len: 0.025,
            leg_mount_deg: [-30.0, 30.0, 90.0, 150.0, 210.0, 270.0],
            workspace_r_min: 0.25,
            workspace_r_max: 1.0,
            workspace_half_angle_deg: 40.0,
            stability_margin: 0.05,
            standing_height: 0.5,
            masses: LinkMasses::default(),
        }
    }
}

impl RobotModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidModel(msg));
        for (name, v) in [
            ("body_radius", self.body_radius),
            ("coxa_len", self.coxa_len),
            ("thigh_len", self.thigh_len),
            ("shank_len", self.shank_len),
            ("standing_height", self.standing_height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.stability_margin.is_finite() && self.stability_margin >= 0.0) {
            return bad(format!(
                "stability_margin must be >= 0, got {}",
                self.stability_margin
            ));
        }
        let reach = self.coxa_len + self.thigh_len + self.shank_len;
        if !(self.workspace_r_min >= 0.0 && self.workspace_r_min < self.workspace_r_max) {
            return bad(format!(
                "workspace radii must satisfy 0 <= r_min < r_max, got {} and {}",
                self.workspace_r_min, self.workspace_r_max
            ));
        }
        if self.workspace_r_max > reach {
            return bad(format!(
                "workspace_r_max {} exceeds leg reach {reach}",
                self.workspace_r_max
            ));
        }
        if !(self.workspace_half_angle_deg > 0.0 && self.workspace_half_angle_deg < 90.0) {
            return bad(format!(
                "workspace_half_angle_deg must be in (0, 90), got {}",
                self.workspace_half_angle_deg
            ));
        }
        for i in 0..LEG_COUNT {
            for j in (i + 1)..LEG_COUNT {
                let d = (self.leg_mount_deg[i] - self.leg_mount_deg[j]).rem_euclid(360.0);
                if d < 1e-9 || 360.0 - d < 1e-9 {
                    return bad(format!("legs {} and {} share a mount angle", i + 1, j + 1));
                }
            }
        }
        Ok(())
    }

    pub fn mount_direction(&self, leg: usize, yaw: f64) -> Vec2 {
        Vec2::from_angle(self.leg_mount_deg[leg].to_radians() + yaw)
    }

    /// Workspace sector of `leg` for a body at `cog` with heading `yaw`.
    pub fn leg_sector(&self, leg: usize, cog: Vec2, yaw: f64) -> Sector2 {
        let dir = self.mount_direction(leg, yaw);
        Sector2::new(
            cog + dir * self.body_radius,
            dir,
            self.workspace_half_angle_deg.to_radians(),
            self.workspace_r_min,
            self.workspace_r_max,
        )
        .expect("validated robot model yields valid sectors")
    }

    /// Foot position at the middle of the workspace bisector.
    pub fn nominal_foot(&self, leg: usize, cog: Vec2, yaw: f64) -> Point3 {
        let dir = self.mount_direction(leg, yaw);
        let p =
            cog + dir * (self.body_radius + 0.5 * (self.workspace_r_min + self.workspace_r_max));
        Point3::new(p.x, p.y, 0.0)
    }

    /// Nominal stance around the origin, rounded to the micrometre so that
    /// the positions survive a JSON round trip unchanged.
    pub fn start_stance(&self) -> [Point3; LEG_COUNT] {
        std::array::from_fn(|leg| {
            let p = self.nominal_foot(leg, Vec2::ZERO, 0.0);
            Point3::new(round_um(p.x), round_um(p.y), 0.0)
        })
    }
}

pub(crate) fn round_um(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
