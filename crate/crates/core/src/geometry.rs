//! 2D deployment area with opaque square obstacles and reflecting edges.
//!
//! Propagation is restricted to the direct path and single specular bounces
//! off obstacle edges or the area boundary. Reflected paths are found with
//! the mirror-image method: the transmitter is mirrored across the surface
//! line and the straight segment from the image to the receiver gives the
//! reflection point and the unfolded path length.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Overlap (in meters along a segment) below which a segment is considered
/// to only graze an obstacle.
const GRAZE_TOL_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at `dist` meters from `self` in direction `angle` (radians).
    pub fn polar_offset(self, dist: f64, angle: f64) -> Self {
        Self::new(self.x + dist * angle.cos(), self.y + dist * angle.sin())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (other - self).norm()
    }

    /// Absolute angle of the vector in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }

    /// Angle of `other` as seen from `self`, in `[0, 2π)`.
    pub fn bearing_to(self, other: Self) -> f64 {
        (other - self).angle()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2D {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle difference into `[-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = normalize_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Axis-aligned square obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub center: Point2D,
    pub side: f64,
}

impl Obstacle {
    pub fn new(cx: f64, cy: f64, side: f64) -> Self {
        Self {
            center: Point2D::new(cx, cy),
            side,
        }
    }

    /// `(xmin, xmax, ymin, ymax)`
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let h = self.side / 2.0;
        (
            self.center.x - h,
            self.center.x + h,
            self.center.y - h,
            self.center.y + h,
        )
    }

    /// Closed containment (edges included).
    pub fn contains_closed(&self, p: Point2D) -> bool {
        let (x0, x1, y0, y1) = self.bounds();
        p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1
    }

    /// Strict containment in the open interior.
    pub fn contains_interior(&self, p: Point2D) -> bool {
        let (x0, x1, y0, y1) = self.bounds();
        p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1
    }

    /// True iff the segment `a -> b` passes through the open interior by more
    /// than a grazing tolerance. Slab clipping over both axes.
    pub fn blocks_segment(&self, a: Point2D, b: Point2D) -> bool {
        let (x0, x1, y0, y1) = self.bounds();
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return self.contains_interior(a);
        }
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        for (p, dp, min, max) in [(a.x, d.x, x0, x1), (a.y, d.y, y0, y1)] {
            if dp.abs() * 1e12 < len {
                // parallel to this slab: must lie strictly between the faces
                if p <= min + GRAZE_TOL_M || p >= max - GRAZE_TOL_M {
                    return false;
                }
            } else {
                let t1 = (min - p) / dp;
                let t2 = (max - p) / dp;
                lo = lo.max(t1.min(t2));
                hi = hi.min(t1.max(t2));
            }
        }
        (hi - lo) * len > GRAZE_TOL_M
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceOwner {
    Obstacle(usize),
    Boundary,
}

/// A reflecting straight segment with the unit normal pointing into free space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionSurface {
    pub start: Point2D,
    pub end: Point2D,
    pub owner: SurfaceOwner,
    pub normal: Point2D,
}

impl ReflectionSurface {
    /// Signed distance of `p` from the surface line, positive on the free side.
    pub fn signed_distance(&self, p: Point2D) -> f64 {
        (p - self.start).dot(self.normal)
    }

    /// Mirror image of `p` across the surface line.
    pub fn mirror(&self, p: Point2D) -> Point2D {
        p - self.normal * (2.0 * self.signed_distance(p))
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    Los,
    Reflected,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Los => "los",
            PathKind::Reflected => "reflected",
        }
    }
}

/// One propagation path between a transmitter `a` and receiver `b`.
///
/// `departure_angle` is the bearing of the first leg as seen from `a`;
/// `arrival_angle` is the bearing, as seen from `b`, of the direction the
/// signal arrives from, so an antenna at `b` pointed along it is aligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    pub kind: PathKind,
    pub length: f64,
    pub departure_angle: f64,
    pub arrival_angle: f64,
    /// Angle between the incident ray and the surface plane (reflected only).
    pub grazing_angle: Option<f64>,
    pub surface_id: Option<usize>,
    pub reflection_point: Option<Point2D>,
}

/// Rectangular area `[0, width] x [0, height]` with one base station.
///
/// Immutable once built; the surface list holds four edges per obstacle
/// followed by the four boundary walls.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    width: f64,
    height: f64,
    bs_pos: Point2D,
    obstacles: Vec<Obstacle>,
    surfaces: Vec<ReflectionSurface>,
    reflective_boundary: bool,
}

impl Environment {
    pub fn new(width: f64, height: f64, bs_pos: Point2D, obstacles: Vec<Obstacle>) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::Environment(format!(
                "area must be positive and finite, got {width} x {height}"
            )));
        }
        let bare = Self {
            width,
            height,
            bs_pos,
            obstacles: Vec::new(),
            surfaces: Vec::new(),
            reflective_boundary: true,
        };
        if !bs_pos.is_finite() || !bare.contains(bs_pos) {
            return Err(Error::Environment(format!(
                "base station ({}, {}) outside the area",
                bs_pos.x, bs_pos.y
            )));
        }
        for (i, o) in obstacles.iter().enumerate() {
            if !(o.side > 0.0 && o.side.is_finite()) || !o.center.is_finite() {
                return Err(Error::Environment(format!("obstacle {i}: side must be positive")));
            }
            let (x0, x1, y0, y1) = o.bounds();
            if x0 < 0.0 || y0 < 0.0 || x1 > width || y1 > height {
                return Err(Error::Environment(format!("obstacle {i} extends outside the area")));
            }
            if o.contains_closed(bs_pos) {
                return Err(Error::Environment(format!("obstacle {i} covers the base station")));
            }
        }

        let mut surfaces = Vec::with_capacity(4 * obstacles.len() + 4);
        for (i, o) in obstacles.iter().enumerate() {
            let (x0, x1, y0, y1) = o.bounds();
            let owner = SurfaceOwner::Obstacle(i);
            let edges = [
                ((x0, y0), (x1, y0), (0.0, -1.0)),
                ((x1, y0), (x1, y1), (1.0, 0.0)),
                ((x1, y1), (x0, y1), (0.0, 1.0)),
                ((x0, y1), (x0, y0), (-1.0, 0.0)),
            ];
            surfaces.extend(edges.iter().map(|&(s, e, n)| ReflectionSurface {
                start: Point2D::new(s.0, s.1),
                end: Point2D::new(e.0, e.1),
                owner,
                normal: Point2D::new(n.0, n.1),
            }));
        }
        let walls = [
            ((0.0, 0.0), (width, 0.0), (0.0, 1.0)),
            ((width, 0.0), (width, height), (-1.0, 0.0)),
            ((width, height), (0.0, height), (0.0, -1.0)),
            ((0.0, height), (0.0, 0.0), (1.0, 0.0)),
        ];
        surfaces.extend(walls.iter().map(|&(s, e, n)| ReflectionSurface {
            start: Point2D::new(s.0, s.1),
            end: Point2D::new(e.0, e.1),
            owner: SurfaceOwner::Boundary,
            normal: Point2D::new(n.0, n.1),
        }));

        Ok(Self {
            obstacles,
            surfaces,
            ..bare
        })
    }

    /// Empty area with the base station in the middle.
    pub fn open(width: f64, height: f64) -> Result<Self> {
        Self::new(width, height, Point2D::new(width / 2.0, height / 2.0), Vec::new())
    }

    /// Same environment with boundary-wall reflections switched on or off.
    /// The walls stay in the surface list either way.
    pub fn with_reflective_boundary(mut self, on: bool) -> Self {
        self.reflective_boundary = on;
        self
    }

    pub fn reflective_boundary(&self) -> bool {
        self.reflective_boundary
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn bs_pos(&self) -> Point2D {
        self.bs_pos
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn surfaces(&self) -> &[ReflectionSurface] {
        &self.surfaces
    }

    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    /// True when `p` lies in the free part of the area (not inside any obstacle).
    pub fn is_free(&self, p: Point2D) -> bool {
        self.contains(p) && !self.obstacles.iter().any(|o| o.contains_interior(p))
    }

    /// Copy of this environment with one more obstacle.
    pub fn with_obstacle(&self, obstacle: Obstacle) -> Result<Self> {
        let mut obstacles = self.obstacles.clone();
        obstacles.push(obstacle);
        Ok(Self::new(self.width, self.height, self.bs_pos, obstacles)?.with_reflective_boundary(self.reflective_boundary))
    }

    /// True iff the open segment `a -> b` crosses no obstacle interior.
    /// Exactly grazing an edge or corner counts as clear.
    pub fn is_los_clear(&self, a: Point2D, b: Point2D) -> bool {
        !self.obstacles.iter().any(|o| o.blocks_segment(a, b))
    }

    /// Direct path (when unobstructed) plus every valid single-bounce path
    /// from `a` to `b`. An empty list means `b` is unreachable from `a`.
    pub fn single_bounce_paths(&self, a: Point2D, b: Point2D) -> Vec<PathGeometry> {
        let mut paths = Vec::new();
        if a == b {
            return paths;
        }
        if self.is_los_clear(a, b) {
            paths.push(PathGeometry {
                kind: PathKind::Los,
                length: a.distance(b),
                departure_angle: a.bearing_to(b),
                arrival_angle: b.bearing_to(a),
                grazing_angle: None,
                surface_id: None,
                reflection_point: None,
            });
        }
        for (id, surface) in self.surfaces.iter().enumerate() {
            if surface.owner == SurfaceOwner::Boundary && !self.reflective_boundary {
                continue;
            }
            if let Some(p) = self.reflect_once(surface, a, b) {
                paths.push(PathGeometry { surface_id: Some(id), ..p });
            }
        }
        paths
    }

    fn reflect_once(&self, s: &ReflectionSurface, a: Point2D, b: Point2D) -> Option<PathGeometry> {
        let da = s.signed_distance(a);
        let db = s.signed_distance(b);
        // both ends must see the reflecting face
        if da <= 0.0 || db <= 0.0 {
            return None;
        }
        let image = s.mirror(a);
        let hit = image + (b - image) * (da / (da + db));
        let seg = s.end - s.start;
        let u = (hit - s.start).dot(seg) / seg.dot(seg);
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        if !self.is_los_clear(a, hit) || !self.is_los_clear(hit, b) {
            return None;
        }
        let incident = a.distance(hit);
        let grazing = if incident > 0.0 {
            (da / incident).clamp(-1.0, 1.0).asin()
        } else {
            return None;
        };
        Some(PathGeometry {
            kind: PathKind::Reflected,
            length: image.distance(b),
            departure_angle: a.bearing_to(hit),
            arrival_angle: b.bearing_to(hit),
            grazing_angle: Some(grazing),
            surface_id: None,
            reflection_point: Some(hit),
        })
    }

    /// Serializes the environment as `[environment]` scenario keys.
    pub fn to_scenario_text(&self) -> String {
        let mut out = String::from("[environment]\n");
        out.push_str(&format!("width_m = {}\n", self.width));
        out.push_str(&format!("height_m = {}\n", self.height));
        out.push_str(&format!("bs_x = {}\n", self.bs_pos.x));
        out.push_str(&format!("bs_y = {}\n", self.bs_pos.y));
        out.push_str(&format!("reflective_boundary = {}\n", self.reflective_boundary));
        for o in &self.obstacles {
            out.push_str(&format!("obstacle = {}, {}, {}\n", o.center.x, o.center.y, o.side));
        }
        out
    }
}
