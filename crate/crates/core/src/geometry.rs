//! Planar geometry used by the stability and reachability checks.
//!
//! Everything here works on horizontal projections. Polygons are assumed
//! counter-clockwise wherever orientation matters; the support polygons built
//! by [`Polygon2::convex_hull`] always are.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for geometric equality and boundary membership (m).
pub const GEOM_EPS: f64 = 1e-9;
/// Areas at or below this are treated as degenerate (m²).
pub const AREA_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    InvalidPolygon(usize),
    #[error("polygon is degenerate (area {0:e} m²)")]
    DegeneratePolygon(f64),
    #[error("invalid sector: {0}")]
    InvalidSector(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// World-frame point (m). Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Result of casting a ray to the boundary of a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayExit {
    /// Distance travelled before leaving the region; 0 when the origin was outside.
    pub distance: f64,
    /// False when the ray origin was not inside the region.
    pub inside: bool,
}

impl RayExit {
    const OUTSIDE: RayExit = RayExit {
        distance: 0.0,
        inside: false,
    };
}

/// Distance from `q` to the segment `a`–`b`.
pub fn segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= 0.0 {
        return q.distance(a);
    }
    let t = ((q - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    q.distance(a + ab * t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2 {
    vertices: Vec<Vec2>,
}

impl Polygon2 {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidPolygon(vertices.len()));
        }
        Ok(Self { vertices })
    }

    /// Convex hull (Andrew's monotone chain), counter-clockwise.
    ///
    /// Collinear or coincident input still yields a 3-vertex polygon: the two
    /// extreme points plus their midpoint. Such a polygon has zero area and
    /// every margin against it is measured from the segment.
    pub fn convex_hull(points: &[Vec2]) -> Result<Self, GeometryError> {
        if points.len() < 3 {
            return Err(GeometryError::InvalidPolygon(points.len()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        let n = pts.len();
        let mut hull: Vec<Vec2> = Vec::with_capacity(n * 2);
        for pass in 0..2 {
            let start = hull.len();
            for k in 0..n {
                let p = if pass == 0 { pts[k] } else { pts[n - 1 - k] };
                while hull.len() >= start + 2 {
                    let a = hull[hull.len() - 2];
                    let b = hull[hull.len() - 1];
                    if (b - a).cross(p - a) <= 0.0 {
                        hull.pop();
                    } else {
                        break;
                    }
                }
                hull.push(p);
            }
            hull.pop();
        }
        match hull.len() {
            0 => Ok(Self {
                vertices: vec![pts[0]; 3],
            }),
            1 | 2 => {
                let a = pts[0];
                let b = pts[pts.len() - 1];
                Ok(Self {
                    vertices: vec![a, (a + b) * 0.5, b],
                })
            }
            _ => Ok(Self { vertices: hull }),
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn reversed(&self) -> Polygon2 {
        let mut v = self.vertices.clone();
        v.reverse();
        Polygon2 { vertices: v }
    }

    fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area; positive for counter-clockwise vertex order.
    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn has_interior(&self) -> bool {
        self.area().abs() > AREA_EPS
    }

    /// Area centroid.
    pub fn centroid(&self) -> Result<Vec2, GeometryError> {
        let area = self.area();
        if area.abs() <= AREA_EPS {
            return Err(GeometryError::DegeneratePolygon(area));
        }
        let (mut cx, mut cy) = (0.0, 0.0);
        for (a, b) in self.edges() {
            let w = a.cross(b);
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        Ok(Vec2::new(cx / (6.0 * area), cy / (6.0 * area)))
    }

    fn vertex_mean(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(Vec2::ZERO, |acc, &v| acc + v) * (1.0 / n)
    }

    /// Uniformly scales a convex polygon toward its centroid so that the
    /// nearest edge moves inward by `margin`.
    ///
    /// The scale factor is `max(0, 1 - margin / d_min)` with `d_min` the
    /// smallest centroid-to-edge distance. When `margin >= d_min` every
    /// vertex collapses onto the centroid and the result has no interior.
    pub fn shrink(&self, margin: f64) -> Polygon2 {
        let margin = margin.max(0.0);
        if margin == 0.0 {
            return self.clone();
        }
        let center = self.centroid().unwrap_or_else(|_| self.vertex_mean());
        let d_min = self
            .edges()
            .map(|(a, b)| {
                let ab = b - a;
                let len = ab.norm();
                if len <= 0.0 {
                    center.distance(a)
                } else {
                    (ab.cross(center - a) / len).abs()
                }
            })
            .fold(f64::INFINITY, f64::min);
        let scale = if d_min > 0.0 {
            (1.0 - margin / d_min).max(0.0)
        } else {
            0.0
        };
        Polygon2 {
            vertices: self
                .vertices
                .iter()
                .map(|&v| center + (v - center) * scale)
                .collect(),
        }
    }

    /// True when every edge sees `q` on its left (within `tol`).
    fn inside(&self, q: Vec2, tol: f64) -> bool {
        self.edges().all(|(a, b)| {
            let ab = b - a;
            let len = ab.norm();
            len <= 0.0 || ab.cross(q - a) / len >= -tol
        })
    }

    /// Signed distance from `q` to the boundary of a convex CCW polygon:
    /// positive inside, negative outside.
    pub fn point_margin(&self, q: Vec2) -> f64 {
        let d = self
            .edges()
            .map(|(a, b)| segment_distance(q, a, b))
            .fold(f64::INFINITY, f64::min);
        if self.has_interior() && self.inside(q, 0.0) {
            d
        } else {
            -d
        }
    }

    /// Distance along `dir` (unit) from an interior `origin` to the boundary.
    pub fn ray_exit(&self, origin: Vec2, dir: Vec2) -> RayExit {
        if !self.has_interior() || !self.inside(origin, GEOM_EPS) {
            return RayExit::OUTSIDE;
        }
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            let ab = b - a;
            let len = ab.norm();
            if len <= 0.0 {
                continue;
            }
            // Inward-positive signed distance to the edge line and its rate of
            // change along the ray.
            let dist = ab.cross(origin - a) / len;
            let rate = ab.cross(dir) / len;
            if rate < 0.0 {
                best = best.min((dist / -rate).max(0.0));
            }
        }
        RayExit {
            distance: if best.is_finite() { best } else { 0.0 },
            inside: true,
        }
    }
}

/// Annular sector: the planar workspace of one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector2 {
    pub apex: Vec2,
    heading: Vec2,
    half_angle: f64,
    pub r_min: f64,
    pub r_max: f64,
    // Unit directions of the two radial edges.
    edge_ccw: Vec2,
    edge_cw: Vec2,
}

impl Sector2 {
    pub fn new(
        apex: Vec2,
        heading: Vec2,
        half_angle: f64,
        r_min: f64,
        r_max: f64,
    ) -> Result<Self, GeometryError> {
        let heading = heading
            .normalized()
            .ok_or_else(|| GeometryError::InvalidSector("zero heading".into()))?;
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(GeometryError::InvalidSector(format!(
                "half angle {half_angle} outside (0, pi/2)"
            )));
        }
        if !(r_min >= 0.0 && r_min < r_max) {
            return Err(GeometryError::InvalidSector(format!(
                "radii must satisfy 0 <= r_min < r_max, got {r_min}, {r_max}"
            )));
        }
        Ok(Self {
            apex,
            heading,
            half_angle,
            r_min,
            r_max,
            edge_ccw: heading.rotated(half_angle),
            edge_cw: heading.rotated(-half_angle),
        })
    }

    pub fn heading(&self) -> Vec2 {
        self.heading
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn contains(&self, q: Vec2) -> bool {
        self.contains_tol(q, GEOM_EPS)
    }

    pub fn contains_tol(&self, q: Vec2, tol: f64) -> bool {
        let v = q - self.apex;
        let r = v.norm();
        r >= self.r_min - tol
            && r <= self.r_max + tol
            && self.edge_cw.cross(v) >= -tol
            && v.cross(self.edge_ccw) >= -tol
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut pts = vec![
            self.apex + self.edge_cw * self.r_min,
            self.apex + self.edge_cw * self.r_max,
            self.apex + self.edge_ccw * self.r_min,
            self.apex + self.edge_ccw * self.r_max,
        ];
        // Outer-arc extremes along the axes, when they fall inside the span.
        for axis in [
            Vec2::new(1.0, 0.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, -1.0),
        ] {
            if axis.dot(self.heading) >= self.half_angle.cos() {
                pts.push(self.apex + axis * self.r_max);
            }
        }
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts[1..] {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Distance along `dir` (unit) from `origin` to the first boundary
    /// crossing: inner arc, outer arc, or either radial edge.
    pub fn ray_exit(&self, origin: Vec2, dir: Vec2) -> RayExit {
        if !self.contains(origin) {
            return RayExit::OUTSIDE;
        }
        let w = origin - self.apex;
        let mut best = f64::INFINITY;

        // Radial edges: the wedge is the intersection of two half-planes.
        for (value, rate) in [
            (self.edge_cw.cross(w), self.edge_cw.cross(dir)),
            (w.cross(self.edge_ccw), dir.cross(self.edge_ccw)),
        ] {
            if rate < 0.0 {
                best = best.min((value / -rate).max(0.0));
            }
        }

        // |w + t d|^2 = r^2  ->  t^2 + 2 b t + c = 0
        let b = w.dot(dir);
        let c_out = w.norm_sq() - self.r_max * self.r_max;
        let disc_out = (b * b - c_out).max(0.0);
        best = best.min((-b + disc_out.sqrt()).max(0.0));

        if self.r_min > 0.0 && b < 0.0 {
            let c_in = w.norm_sq() - self.r_min * self.r_min;
            let disc_in = b * b - c_in;
            if disc_in > 0.0 {
                best = best.min((-b - disc_in.sqrt()).max(0.0));
            }
        }

        RayExit {
            distance: best,
            inside: true,
        }
    }
}
