//! Discrete-foothold environments: seeded random maps, the three designed
//! terrains, sector queries, and the JSON file format.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point3, Sector2, Vec2};
use crate::model::{round_um, RobotModel};

/// Side length of the spatial-hash cells (m).
const CELL: f64 = 0.5;
/// Footholds closer than this in x and y are duplicates (m).
const DEDUP_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("foothold ({x}, {y}) lies outside the terrain bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid terrain parameters: {0}")]
    InvalidParams(String),
    #[error("unknown designed terrain kind `{0}` (expected gap, hole or trenches)")]
    UnknownKind(String),
    #[error("terrain file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    fn including(mut self, p: Vec2) -> Self {
        self.x_min = self.x_min.min(p.x);
        self.x_max = self.x_max.max(p.x);
        self.y_min = self.y_min.min(p.y);
        self.y_max = self.y_max.max(p.y);
        self
    }
}

/// On-disk layout of a terrain.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TerrainFile {
    bounds: Bounds,
    goal_x: f64,
    seed: u64,
    footholds: Vec<Point3>,
}

/// Uniform grid of point indices.
#[derive(Debug, Clone, Default)]
struct GridIndex {
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl GridIndex {
    fn build(bounds: &Bounds, points: &[Point3]) -> Self {
        let nx = (((bounds.x_max - bounds.x_min) / CELL).floor() as usize) + 1;
        let ny = (((bounds.y_max - bounds.y_min) / CELL).floor() as usize) + 1;
        let mut index = Self {
            x0: bounds.x_min,
            y0: bounds.y_min,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = index.cell_of(p.x, p.y);
            index.cells[cy * nx + cx].push(i as u32);
        }
        index
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let cx = ((x - self.x0) / CELL)
            .floor()
            .clamp(0.0, (self.nx - 1) as f64) as usize;
        let cy = ((y - self.y0) / CELL)
            .floor()
            .clamp(0.0, (self.ny - 1) as f64) as usize;
        (cx, cy)
    }

    fn candidates(&self, lo: Vec2, hi: Vec2) -> impl Iterator<Item = u32> + '_ {
        let (cx0, cy0) = self.cell_of(lo.x, lo.y);
        let (cx1, cy1) = self.cell_of(hi.x, hi.y);
        (cy0..=cy1).flat_map(move |cy| {
            (cx0..=cx1).flat_map(move |cx| self.cells[cy * self.nx + cx].iter().copied())
        })
    }
}

/// Finite set of valid footholds plus the goal line.
#[derive(Debug, Clone)]
pub struct Terrain {
    bounds: Bounds,
    goal_x: f64,
    seed: u64,
    footholds: Vec<Point3>,
    index: GridIndex,
}

impl PartialEq for Terrain {
    fn eq(&self, o: &Self) -> bool {
        self.bounds == o.bounds
            && self.goal_x == o.goal_x
            && self.seed == o.seed
            && self.footholds == o.footholds
    }
}

impl Terrain {
    /// Builds a terrain, dropping later duplicates (1 mm resolution).
    pub fn new(
        bounds: Bounds,
        goal_x: f64,
        seed: u64,
        footholds: Vec<Point3>,
    ) -> Result<Self, TerrainError> {
        let mut seen = std::collections::HashSet::with_capacity(footholds.len());
        let mut kept = Vec::with_capacity(footholds.len());
        for p in footholds {
            if !bounds.contains(p.xy()) {
                return Err(TerrainError::OutOfBounds { x: p.x, y: p.y });
            }
            let key = (
                (p.x / DEDUP_RESOLUTION).round() as i64,
                (p.y / DEDUP_RESOLUTION).round() as i64,
            );
            if seen.insert(key) {
                kept.push(p);
            }
        }
        let index = GridIndex::build(&bounds, &kept);
        Ok(Self {
            bounds,
            goal_x,
            seed,
            footholds: kept,
            index,
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn goal_x(&self) -> f64 {
        self.goal_x
    }

    /// Point the robot heads for: on the goal line at y = 0.
    pub fn goal_point(&self) -> Vec2 {
        Vec2::new(self.goal_x, 0.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn footholds(&self) -> &[Point3] {
        &self.footholds
    }

    pub fn len(&self) -> usize {
        self.footholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.footholds.is_empty()
    }

    /// Footholds whose horizontal projection lies in `sector`, sorted
    /// lexicographically by (x, y, z).
    pub fn footholds_in_sector(&self, sector: &Sector2) -> Vec<Point3> {
        let (lo, hi) = sector.bounding_box();
        let mut out: Vec<Point3> = self
            .index
            .candidates(lo, hi)
            .map(|i| self.footholds[i as usize])
            .filter(|p| sector.contains(p.xy()))
            .collect();
        out.sort_by(|a, b| {
            a.x.total_cmp(&b.x)
                .then(a.y.total_cmp(&b.y))
                .then(a.z.total_cmp(&b.z))
        });
        out
    }

    /// True when some foothold lies within `tol` of `p` horizontally.
    pub fn has_foothold(&self, p: Point3, tol: f64) -> bool {
        let d = Vec2::new(tol, tol);
        self.index
            .candidates(p.xy() - d, p.xy() + d)
            .any(|i| self.footholds[i as usize].xy().distance(p.xy()) <= tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TerrainFile {
            bounds: self.bounds,
            goal_x: self.goal_x,
            seed: self.seed,
            footholds: self.footholds.clone(),
        })
        .expect("terrain serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, TerrainError> {
        let f: TerrainFile = serde_json::from_str(s)?;
        Self::new(f.bounds, f.goal_x, f.seed, f.footholds)
    }
}

/// Random benchmark map: `count` uniform footholds on a corridor.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMapParams {
    pub count: usize,
    /// Rear end of the sampling rectangle along x.
    pub x_min: f64,
    pub length: f64,
    pub width: f64,
    pub goal_x: f64,
}

impl RandomMapParams {
    pub fn with_count(count: usize) -> Self {
        Self {
            count,
            ..Self::default()
        }
    }
}

impl Default for RandomMapParams {
    fn default() -> Self {
        Self {
            count: 400,
            x_min: -2.25,
            length: 12.5,
            width: 5.0,
            goal_x: 8.0,
        }
    }
}

/// Nominal-stance footholds for the start pose, followed by `count` uniform
/// points on `[x_min, x_min + length] x [-width/2, width/2]`. The default
/// rectangle is centred on the segment from the start to the goal, so the
/// rear legs have ground behind the start pose.
///
/// Points are drawn sequentially from one seeded stream, so a sparser map is
/// a prefix of a denser map with the same seed.
pub fn generate_random_map(
    model: &RobotModel,
    params: &RandomMapParams,
    seed: u64,
) -> Result<Terrain, TerrainError> {
    if params.count == 0 || params.length <= 0.0 || params.width <= 0.0 {
        return Err(TerrainError::InvalidParams(format!(
            "random map needs count > 0 and a positive area, got {params:?}"
        )));
    }
    let half = 0.5 * params.width;
    let mut bounds = Bounds {
        x_min: params.x_min,
        x_max: params.x_min + params.length,
        y_min: -half,
        y_max: half,
    };
    let mut points: Vec<Point3> = model.start_stance().to_vec();
    for p in &points {
        bounds = bounds.including(p.xy());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..params.count {
        let x = round_um(params.x_min + rng.gen_range(0.0..params.length));
        let y = round_um(rng.gen_range(-half..half));
        points.push(Point3::new(x, y, 0.0));
    }
    Terrain::new(bounds, params.goal_x, seed, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignedKind {
    /// A full-width band without footholds.
    Gap,
    /// A rectangle without footholds in the middle of flat ground.
    Hole,
    /// Several full-width bands of different widths.
    Trenches,
}

impl DesignedKind {
    pub const ALL: [DesignedKind; 3] = [
        DesignedKind::Gap,
        DesignedKind::Hole,
        DesignedKind::Trenches,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DesignedKind::Gap => "gap",
            DesignedKind::Hole => "hole",
            DesignedKind::Trenches => "trenches",
        }
    }
}

impl fmt::Display for DesignedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignedKind {
    type Err = TerrainError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gap" => Ok(DesignedKind::Gap),
            "hole" => Ok(DesignedKind::Hole),
            "trenches" | "trench" => Ok(DesignedKind::Trenches),
            other => Err(TerrainError::UnknownKind(other.to_string())),
        }
    }
}

/// Dimensions of the designed terrains. Excluded regions are open sets:
/// grid points exactly on their border are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedParams {
    pub pitch: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub half_width: f64,
    pub goal_x: f64,
    pub gap_start: f64,
    pub gap_width: f64,
    pub hole_start: f64,
    /// Extent of the hole along x.
    pub hole_length: f64,
    /// Extent of the hole along y, centred on the walking line.
    pub hole_width: f64,
    pub trench_start: f64,
    pub trench_widths: Vec<f64>,
    /// Solid ground between consecutive trenches.
    pub trench_spacing: f64,
}

impl Default for DesignedParams {
    fn default() -> Self {
        Self {
            pitch: 0.1,
            x_min: -1.5,
            x_max: 7.5,
            half_width: 2.0,
            goal_x: 5.5,
            gap_start: 2.5,
            gap_width: 0.5,
            hole_start: 2.5,
            hole_length: 1.2,
            hole_width: 2.9,
            trench_start: 1.5,
            trench_widths: vec![0.3, 0.5, 0.4],
            trench_spacing: 0.8,
        }
    }
}

impl DesignedParams {
    /// Empty x-bands for `kind` (open intervals).
    pub fn bands(&self, kind: DesignedKind) -> Vec<(f64, f64)> {
        match kind {
            DesignedKind::Gap => vec![(self.gap_start, self.gap_start + self.gap_width)],
            DesignedKind::Hole => vec![(self.hole_start, self.hole_start + self.hole_length)],
            DesignedKind::Trenches => {
                let mut x = self.trench_start;
                self.trench_widths
                    .iter()
                    .map(|&w| {
                        let band = (x, x + w);
                        x += w + self.trench_spacing;
                        band
                    })
                    .collect()
            }
        }
    }

    fn excluded(&self, kind: DesignedKind, p: Vec2) -> bool {
        const E: f64 = 1e-9;
        let in_band = |(a, b): (f64, f64)| p.x > a + E && p.x < b - E;
        match kind {
            DesignedKind::Hole => {
                in_band(self.bands(kind)[0]) && p.y.abs() < 0.5 * self.hole_width - E
            }
            _ => self.bands(kind).into_iter().any(in_band),
        }
    }

    fn validate(&self, model: &RobotModel, kind: DesignedKind) -> Result<(), TerrainError> {
        let bad = |m: String| Err(TerrainError::InvalidParams(m));
        if !(self.pitch > 0.0 && self.x_max > self.x_min && self.half_width > 0.0) {
            return bad(format!(
                "need pitch > 0, x_max > x_min and half_width > 0 ({self:?})"
            ));
        }
        // Stay clear of the start stance and the goal line.
        let stance_reach = model.body_radius + model.workspace_r_max;
        for (a, b) in self.bands(kind) {
            if b.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) {
                return bad(format!("empty band [{a}, {b}]"));
            }
            if a < stance_reach || b > self.goal_x {
                return bad(format!(
                    "band [{a}, {b}] must lie between x = {stance_reach} and the goal {}",
                    self.goal_x
                ));
            }
        }
        match kind {
            DesignedKind::Gap => {
                if self.gap_width >= model.workspace_r_max {
                    return bad(format!(
                        "gap width {} must be below the leg reach {}",
                        self.gap_width, model.workspace_r_max
                    ));
                }
            }
            DesignedKind::Trenches => {
                if self.trench_widths.is_empty() || self.trench_spacing <= 0.0 {
                    return bad("trenches need at least one width and positive spacing".into());
                }
                if let Some(w) = self
                    .trench_widths
                    .iter()
                    .find(|&&w| w <= 0.0 || w >= model.workspace_r_max)
                {
                    return bad(format!(
                        "trench width {w} must be in (0, {})",
                        model.workspace_r_max
                    ));
                }
            }
            DesignedKind::Hole => {
                if !(self.hole_width > 0.0 && self.hole_width < 2.0 * self.half_width) {
                    return bad(format!(
                        "hole width {} must be in (0, {})",
                        self.hole_width,
                        2.0 * self.half_width
                    ));
                }
            }
        }
        if self.goal_x >= self.x_max {
            return bad(format!(
                "goal {} beyond the terrain end {}",
                self.goal_x, self.x_max
            ));
        }
        Ok(())
    }
}

/// Dense foothold grid with the regions of `kind` left empty.
pub fn generate_designed_terrain(
    model: &RobotModel,
    kind: DesignedKind,
    params: &DesignedParams,
) -> Result<Terrain, TerrainError> {
    params.validate(model, kind)?;
    grid_terrain(model, params, |p| params.excluded(kind, p))
}

/// Dense foothold grid without any excluded region.
pub fn generate_flat_grid(
    model: &RobotModel,
    params: &DesignedParams,
) -> Result<Terrain, TerrainError> {
    if !(params.pitch > 0.0 && params.x_max > params.x_min && params.half_width > 0.0) {
        return Err(TerrainError::InvalidParams(format!(
            "need pitch > 0, x_max > x_min and half_width > 0 ({params:?})"
        )));
    }
    grid_terrain(model, params, |_| false)
}

fn grid_terrain(
    model: &RobotModel,
    params: &DesignedParams,
    excluded: impl Fn(Vec2) -> bool,
) -> Result<Terrain, TerrainError> {
    let mut bounds = Bounds {
        x_min: params.x_min,
        x_max: params.x_max,
        y_min: -params.half_width,
        y_max: params.half_width,
    };
    let mut points: Vec<Point3> = model.start_stance().to_vec();
    for p in &points {
        bounds = bounds.including(p.xy());
    }
    let nx = ((params.x_max - params.x_min) / params.pitch + 1e-9).floor() as i64;
    let ny = ((2.0 * params.half_width) / params.pitch + 1e-9).floor() as i64;
    for i in 0..=nx {
        let x = round_um(params.x_min + i as f64 * params.pitch);
        for j in 0..=ny {
            let y = round_um(-params.half_width + j as f64 * params.pitch);
            if !excluded(Vec2::new(x, y)) {
                points.push(Point3::new(x, y, 0.0));
            }
        }
    }
    Terrain::new(bounds, params.goal_x, 0, points)
}
