//! Independent reference implementations used by the property tests and the
//! acceptance run. Nothing here calls into the library's geometry.

#![allow(dead_code)]

use hexapod_planner::geometry::{Point3, Vec2};
use hexapod_planner::model::{
    support_state_table, HexapodState, RobotModel, SupportState, LEG_COUNT,
};
use rand::Rng;

pub fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Area and centroid by fanning triangles out of the first vertex.
pub fn fan_area_centroid(p: &[Vec2]) -> (f64, Vec2) {
    let (mut area, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 1..p.len() - 1 {
        let a = 0.5 * cross(p[0], p[i], p[i + 1]);
        area += a;
        cx += a * (p[0].x + p[i].x + p[i + 1].x) / 3.0;
        cy += a * (p[0].y + p[i].y + p[i + 1].y) / 3.0;
    }
    (area, v(cx / area, cy / area))
}

/// Even-odd crossing test.
pub fn crossing_inside(p: &[Vec2], q: Vec2) -> bool {
    let mut inside = false;
    let n = p.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (p[i], p[j]);
        if (a.y > q.y) != (b.y > q.y) {
            let x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if q.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn seg_dist(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((q.x - a.x) * dx + (q.y - a.y) * dy) / l2).clamp(0.0, 1.0)
    };
    let (px, py) = (a.x + t * dx - q.x, a.y + t * dy - q.y);
    (px * px + py * py).sqrt()
}

pub fn boundary_dist(p: &[Vec2], q: Vec2) -> f64 {
    (0..p.len())
        .map(|i| seg_dist(q, p[i], p[(i + 1) % p.len()]))
        .fold(f64::INFINITY, f64::min)
}

/// Signed distance to the boundary, positive inside.
pub fn signed_margin(p: &[Vec2], q: Vec2) -> f64 {
    let d = boundary_dist(p, q);
    if crossing_inside(p, q) {
        d
    } else {
        -d
    }
}

/// Gift-wrapping hull, counter-clockwise, collinear points dropped.
pub fn gift_wrap(points: &[Vec2]) -> Vec<Vec2> {
    let start = *points
        .iter()
        .min_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
        .unwrap();
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut next = if points[0] == cur {
            points[1]
        } else {
            points[0]
        };
        for &p in points {
            if p == cur {
                continue;
            }
            let c = cross(cur, next, p);
            let farther = (p.x - cur.x).hypot(p.y - cur.y) > (next.x - cur.x).hypot(next.y - cur.y);
            if c < 0.0 || (c == 0.0 && farther) {
                next = p;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        cur = next;
        if hull.len() > points.len() {
            break;
        }
    }
    hull
}

/// Scales toward the fan centroid so the nearest edge line moves in by `m`.
pub fn shrink_oracle(p: &[Vec2], m: f64) -> Vec<Vec2> {
    let (_, c) = fan_area_centroid(p);
    let n = p.len();
    let d_min = (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            cross(a, b, c).abs() / (b.x - a.x).hypot(b.y - a.y)
        })
        .fold(f64::INFINITY, f64::min);
    let s = (1.0 - m / d_min).max(0.0);
    p.iter()
        .map(|q| v(c.x + (q.x - c.x) * s, c.y + (q.y - c.y) * s))
        .collect()
}

/// Radical-inverse low-discrepancy sequence.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Area and centroid of a polygon inside the unit square from `n` shifted
/// Halton samples.
pub fn sampled_area_centroid(p: &[Vec2], n: u64, shift: (f64, f64)) -> (f64, Vec2) {
    let (mut hits, mut sx, mut sy) = (0u64, 0.0, 0.0);
    for i in 1..=n {
        let x = (halton(i, 2) + shift.0).fract();
        let y = (halton(i, 3) + shift.1).fract();
        if crossing_inside(p, v(x, y)) {
            hits += 1;
            sx += x;
            sy += y;
        }
    }
    let area = hits as f64 / n as f64;
    (area, v(sx / hits as f64, sy / hits as f64))
}

/// Workspace membership straight from the sector definition at a body
/// position `cog`.
pub fn in_sector(model: &RobotModel, leg: usize, cog: Vec2, q: Vec2) -> bool {
    let mount = model.leg_mount_deg[leg].to_radians();
    let apex = v(
        cog.x + model.body_radius * mount.cos(),
        cog.y + model.body_radius * mount.sin(),
    );
    let (dx, dy) = (q.x - apex.x, q.y - apex.y);
    let r = dx.hypot(dy);
    let mut ang = dy.atan2(dx) - mount;
    while ang > std::f64::consts::PI {
        ang -= std::f64::consts::TAU;
    }
    while ang < -std::f64::consts::PI {
        ang += std::f64::consts::TAU;
    }
    let tol = 1e-9;
    r >= model.workspace_r_min - tol
        && r <= model.workspace_r_max + tol
        && ang.abs() <= model.workspace_half_angle_deg.to_radians() + tol
}

/// Largest whole-millimetre advance along `dir` for which every supporting
/// foot stays in its workspace and the COG stays in the shrunk support
/// polygon.
pub fn micro_advance_limit(
    model: &RobotModel,
    state: &HexapodState,
    support: SupportState,
    dir: Vec2,
) -> f64 {
    let feet: Vec<Vec2> = support
        .legs()
        .map(|l| state.feet[l].unwrap().xy())
        .collect();
    let poly = shrink_oracle(&gift_wrap(&feet), model.stability_margin);
    let c0 = state.cog.xy();
    let ok = |d: f64| {
        let c = v(c0.x + dir.x * d, c0.y + dir.y * d);
        signed_margin(&poly, c) >= -1e-9
            && support
                .legs()
                .all(|l| in_sector(model, l, c, state.feet[l].unwrap().xy()))
    };
    let mut k = 0u32;
    while k < 3000 && ok(f64::from(k + 1) * 1e-3) {
        k += 1;
    }
    f64::from(k) * 1e-3
}

/// A random stance with every foot inside its sector, a support state whose
/// shrunk polygon contains the COG, and a motion direction within 60 degrees
/// of +x.
pub fn random_stance<R: Rng>(
    model: &RobotModel,
    rng: &mut R,
) -> (HexapodState, SupportState, Vec2) {
    let half = model.workspace_half_angle_deg.to_radians();
    loop {
        let mut s = HexapodState::initial(model);
        for leg in 0..LEG_COUNT {
            let mount = model.leg_mount_deg[leg].to_radians();
            let r = rng.gen_range(model.workspace_r_min + 0.01..model.workspace_r_max - 0.01);
            let a = mount + rng.gen_range(-0.98 * half..0.98 * half);
            s.feet[leg] = Some(Point3::new(
                model.body_radius * mount.cos() + r * a.cos(),
                model.body_radius * mount.sin() + r * a.sin(),
                0.0,
            ));
        }
        let table = support_state_table();
        let support = table[rng.gen_range(0..table.len())];
        let feet: Vec<Vec2> = support.legs().map(|l| s.feet[l].unwrap().xy()).collect();
        let hull = gift_wrap(&feet);
        if hull.len() < 3 || fan_area_centroid(&hull).0 < 0.05 {
            continue;
        }
        let poly = shrink_oracle(&hull, model.stability_margin);
        if signed_margin(&poly, s.cog.xy()) < 0.01 {
            continue;
        }
        let th = rng.gen_range(-1.0..1.0f64);
        return (s, support, v(th.cos(), th.sin()));
    }
}

/// Every 6-bit mask with at least three supporting legs.
pub fn brute_force_support_masks() -> Vec<u8> {
    (0u8..64).filter(|m| m.count_ones() >= 3).collect()
}
