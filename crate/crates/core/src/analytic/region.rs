//! Polar region algebra around the BS: annular sectors, their unions, and
//! the residual areas left by previously explored beam footprints.

use std::f64::consts::TAU;

use crate::geometry::{normalize_angle, Point2D};

const ANGLE_EPS: f64 = 1e-12;

/// `{(r, θ) : r_in ≤ r < r_out, θ_start ≤ θ < θ_end}` in polar coordinates
/// around the BS. `theta_start` lies in `[0, 2π)`; `theta_end` may exceed
/// `2π` for sectors crossing the zero direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnularSector {
    pub r_in: f64,
    pub r_out: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl AnnularSector {
    pub fn new(r_in: f64, r_out: f64, theta_start: f64, span: f64) -> Self {
        debug_assert!(r_in >= 0.0 && r_in < r_out);
        debug_assert!(span > 0.0 && span <= TAU + ANGLE_EPS);
        let start = normalize_angle(theta_start);
        Self {
            r_in,
            r_out,
            theta_start: start,
            theta_end: start + span.min(TAU),
        }
    }

    pub fn span(&self) -> f64 {
        self.theta_end - self.theta_start
    }

    pub fn area(&self) -> f64 {
        0.5 * self.span() * (self.r_out * self.r_out - self.r_in * self.r_in)
    }

    /// Parts that do not cross the zero direction.
    pub fn split_at_zero(&self) -> Vec<AnnularSector> {
        if self.theta_end <= TAU + ANGLE_EPS {
            vec![Self {
                theta_end: self.theta_end.min(TAU),
                ..*self
            }]
        } else {
            vec![
                Self {
                    theta_end: TAU,
                    ..*self
                },
                Self {
                    theta_start: 0.0,
                    theta_end: self.theta_end - TAU,
                    ..*self
                },
            ]
        }
    }

    pub fn contains(&self, bs: Point2D, p: Point2D) -> bool {
        let r = bs.distance(p);
        if r < self.r_in || r >= self.r_out {
            return false;
        }
        if r == 0.0 {
            return true;
        }
        let t = bs.bearing_to(p);
        let t = if t < self.theta_start { t + TAU } else { t };
        t < self.theta_end
    }

    /// Overlap area with another sector.
    pub fn overlap_area(&self, other: &AnnularSector) -> f64 {
        let r0 = self.r_in.max(other.r_in);
        let r1 = self.r_out.min(other.r_out);
        if r1 <= r0 {
            return 0.0;
        }
        let mut ang = 0.0;
        for a in self.split_at_zero() {
            for b in other.split_at_zero() {
                let lo = a.theta_start.max(b.theta_start);
                let hi = a.theta_end.min(b.theta_end);
                if hi > lo {
                    ang += hi - lo;
                }
            }
        }
        0.5 * ang * (r1 * r1 - r0 * r0)
    }

    /// Rotated copy.
    pub fn rotated(&self, angle: f64) -> Self {
        Self::new(self.r_in, self.r_out, self.theta_start + angle, self.span())
    }
}

/// Union of pairwise-disjoint annular sectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnularRegion {
    pub parts: Vec<AnnularSector>,
}

impl AnnularRegion {
    pub fn new(parts: Vec<AnnularSector>) -> Self {
        Self { parts }
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.parts.iter().map(AnnularSector::area).sum()
    }

    pub fn contains(&self, bs: Point2D, p: Point2D) -> bool {
        self.parts.iter().any(|s| s.contains(bs, p))
    }

    pub fn overlap_area(&self, other: &AnnularRegion) -> f64 {
        self.parts
            .iter()
            .flat_map(|a| other.parts.iter().map(move |b| a.overlap_area(b)))
            .sum()
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self::new(self.parts.iter().map(|p| p.rotated(angle)).collect())
    }
}

/// Piecewise-constant explored radius as a function of direction: every
/// direction has been covered out to `radius` by some earlier footprint.
#[derive(Debug, Clone)]
pub struct CoverageProfile {
    /// `(segment start, radius)`, sorted, first start 0, covering `[0, 2π)`.
    segments: Vec<(f64, f64)>,
}

impl Default for CoverageProfile {
    fn default() -> Self {
        Self {
            segments: vec![(0.0, 0.0)],
        }
    }
}

impl CoverageProfile {
    pub fn new() -> Self {
        Self::default()
    }

    fn segment_end(&self, i: usize) -> f64 {
        self.segments.get(i + 1).map_or(TAU, |s| s.0)
    }

    /// Index of the segment starting at `angle`, splitting one if needed.
    fn cut(&mut self, angle: f64) -> usize {
        if angle >= TAU - ANGLE_EPS {
            return self.segments.len();
        }
        let i = self.segments.partition_point(|s| s.0 <= angle + ANGLE_EPS) - 1;
        if (self.segments[i].0 - angle).abs() <= ANGLE_EPS {
            return i;
        }
        let r = self.segments[i].1;
        self.segments.insert(i + 1, (angle, r));
        i + 1
    }

    /// Raises the explored radius over a footprint to at least its outer radius.
    pub fn cover(&mut self, sector: &AnnularSector) {
        for part in sector.split_at_zero() {
            let a = self.cut(part.theta_start);
            let b = self.cut(part.theta_end);
            for seg in &mut self.segments[a..b] {
                seg.1 = seg.1.max(part.r_out);
            }
        }
    }

    /// Part of `sector` beyond the explored radius.
    pub fn residual(&self, sector: &AnnularSector) -> AnnularRegion {
        let mut parts: Vec<AnnularSector> = Vec::new();
        for part in sector.split_at_zero() {
            let first = self.segments.partition_point(|s| s.0 <= part.theta_start + ANGLE_EPS) - 1;
            for i in first..self.segments.len() {
                let lo = self.segments[i].0.max(part.theta_start);
                let hi = self.segment_end(i).min(part.theta_end);
                if lo >= part.theta_end - ANGLE_EPS {
                    break;
                }
                if hi - lo <= ANGLE_EPS {
                    continue;
                }
                let r_in = self.segments[i].1.max(part.r_in);
                if r_in >= part.r_out {
                    continue;
                }
                match parts.last_mut() {
                    Some(prev) if prev.r_in == r_in && (prev.theta_end - lo).abs() <= ANGLE_EPS => prev.theta_end = hi,
                    _ => parts.push(AnnularSector {
                        r_in,
                        r_out: part.r_out,
                        theta_start: lo,
                        theta_end: hi,
                    }),
                }
            }
        }
        AnnularRegion::new(parts)
    }
}

/// Residual regions of a whole sequence of footprints: step `n` keeps the
/// part of its footprint not covered by any footprint explored before it.
pub fn residual_regions(footprints: &[AnnularSector]) -> Vec<AnnularRegion> {
    let mut profile = CoverageProfile::new();
    footprints
        .iter()
        .map(|s| {
            let r = profile.residual(s);
            profile.cover(s);
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn residual_of_first_is_whole_sector() {
        let s = AnnularSector::new(0.0, 100.0, deg(30.0), deg(15.0));
        let r = residual_regions(&[s]);
        assert_eq!(r[0].parts, vec![s]);
    }

    #[test]
    fn narrow_inside_wide() {
        let wide = AnnularSector::new(0.0, 50.0, 0.0, deg(90.0));
        let narrow = AnnularSector::new(0.0, 120.0, deg(30.0), deg(15.0));
        let r = residual_regions(&[wide, narrow]);
        assert_eq!(r[1].parts.len(), 1);
        assert_eq!(r[1].parts[0].r_in, 50.0);
        assert_abs_diff_eq!(r[1].area(), narrow.area() - 0.5 * deg(15.0) * 2500.0, epsilon = 1e-9);
    }

    #[test]
    fn straddling_sector_splits() {
        // only one explored wider neighbour overlaps half the footprint:
        // an annulus part plus a full circular part
        let prior = AnnularSector::new(0.0, 40.0, deg(0.0), deg(60.0));
        let s = AnnularSector::new(0.0, 80.0, deg(30.0), deg(60.0));
        let r = residual_regions(&[prior, s]);
        let parts = &r[1].parts;
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].r_in, 40.0);
        assert_abs_diff_eq!(parts[0].span(), deg(30.0), epsilon = 1e-12);
        assert_eq!(parts[1].r_in, 0.0);
        assert_abs_diff_eq!(parts[1].span(), deg(30.0), epsilon = 1e-12);
        assert_abs_diff_eq!(r[1].overlap_area(&AnnularRegion::new(vec![prior])), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn wider_after_narrower_is_empty() {
        let narrow: Vec<AnnularSector> = (0..4)
            .map(|k| AnnularSector::new(0.0, 100.0, deg(90.0 * k as f64), deg(90.0)))
            .collect();
        let mut all = narrow.clone();
        all.push(AnnularSector::new(0.0, 30.0, 0.0, TAU));
        let r = residual_regions(&all);
        assert!(r[4].is_empty());
    }

    #[test]
    fn wraparound_sector() {
        let s = AnnularSector::new(0.0, 10.0, deg(350.0), deg(20.0));
        let parts = s.split_at_zero();
        assert_eq!(parts.len(), 2);
        assert_abs_diff_eq!(parts[0].span() + parts[1].span(), deg(20.0), epsilon = 1e-12);
        assert!(s.contains(Point2D::default(), Point2D::new(5.0, 0.1)));
        assert!(s.contains(Point2D::default(), Point2D::new(5.0, -0.1)));
        let prior = AnnularSector::new(0.0, 5.0, deg(355.0), deg(10.0));
        let r = residual_regions(&[prior, s]);
        assert_abs_diff_eq!(r[1].area(), s.area() - prior.area(), epsilon = 1e-9);
    }
}
