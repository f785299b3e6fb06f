//! Probability mass of an isotropic bivariate normal over polar regions.
//!
//! Along a ray from the BS the radial integral of the density has a closed
//! form in `exp` and `erfc`; the remaining angular integral is done with
//! adaptive Gauss-Kronrod (7/15) quadrature. Each sector's angular range is
//! pre-split around the bearing of the distribution center so the narrow
//! angular peak of a small `σ` is never stepped over.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use super::region::{AnnularRegion, AnnularSector};
use crate::geometry::Point2D;

/// Default relative tolerance of the angular quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-4;

/// Masses below this are treated as zero by the error control.
const ABS_FLOOR: f64 = 1e-12;

/// Regions farther than this many σ from the center are skipped
/// (mass below `exp(-40.5)`).
const CUTOFF_SIGMAS: f64 = 9.0;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
// Gauss weights for the odd-indexed nodes above (1, 3, 5) and the center
const GAUSS_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// `Φ(b) - Φ(a)` for the standard normal, computed on the tail that keeps
/// precision.
fn normal_cdf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (libm::erfc(a * FRAC_1_SQRT_2) - libm::erfc(b * FRAC_1_SQRT_2))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b * FRAC_1_SQRT_2) - libm::erfc(-a * FRAC_1_SQRT_2))
    } else {
        1.0 - 0.5 * (libm::erfc(-a * FRAC_1_SQRT_2) + libm::erfc(b * FRAC_1_SQRT_2))
    }
}

/// Angular density: mass per radian along direction `theta` between radii
/// `r_in` and `r_out`, for a normal centered at `offset` (relative to the
/// BS) with standard deviation `sigma`.
fn ray_mass(theta: f64, r_in: f64, r_out: f64, offset: Point2D, sigma: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    // along-ray and cross-ray coordinates of the center
    let a = offset.x * c + offset.y * s;
    let b = offset.y * c - offset.x * s;
    let two_s2 = 2.0 * sigma * sigma;
    let d2 = |r: f64| (r - a) * (r - a) + b * b;
    let e_in = (-d2(r_in) / two_s2).exp();
    let e_out = (-d2(r_out) / two_s2).exp();
    let b2 = b * b;
    let gauss = (-b2 / two_s2).exp();
    let tail = if gauss > 0.0 {
        a / (sigma * (TAU).sqrt()) * gauss * normal_cdf_diff((r_in - a) / sigma, (r_out - a) / sigma)
    } else {
        0.0
    };
    ((e_in - e_out) / TAU + tail).max(0.0)
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut k = KRONROD_W[7] * fc;
    let mut g = GAUSS_W[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let pair = f(mid - dx) + f(mid + dx);
        k += KRONROD_W[i] * pair;
        if i % 2 == 1 {
            g += GAUSS_W[i / 2] * pair;
        }
    }
    (k * half, ((k - g) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gauss_kronrod(f, a, b);
    if err <= tol.max(ABS_FLOOR * 1e-3) || depth == 0 || b - a < 1e-15 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// Lower bound of the distance between `offset` and any point of `sector`.
fn distance_lower_bound(sector: &AnnularSector, offset: Point2D) -> f64 {
    let rho = offset.norm();
    let radial = (sector.r_in - rho).max(rho - sector.r_out).max(0.0);
    if rho == 0.0 {
        return radial;
    }
    let t = offset.angle();
    let inside = |x: f64| x >= sector.theta_start && x <= sector.theta_end;
    let ang = if inside(t) || inside(t + TAU) {
        0.0
    } else {
        let d1 = (sector.theta_start - t).rem_euclid(TAU);
        let d2 = (t - sector.theta_end).rem_euclid(TAU);
        d1.min(d2)
    };
    radial.max(rho * ang.min(FRAC_PI_2).sin())
}

fn sector_mass(sector: &AnnularSector, offset: Point2D, sigma: f64, rel_tol: f64) -> f64 {
    if distance_lower_bound(sector, offset) > CUTOFF_SIGMAS * sigma {
        return 0.0;
    }
    let f = |t: f64| ray_mass(t, sector.r_in, sector.r_out, offset, sigma);

    // breakpoints around the bearing of the center, scaled to the angular
    // width of the distribution as seen from the BS
    let (a, b) = (sector.theta_start, sector.theta_end);
    let mut cuts = vec![a, b];
    let rho = offset.norm();
    if rho > sigma {
        let tc = offset.angle();
        let step = (sigma / rho).min(PI / 8.0);
        for j in [-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
            for wrap in [-TAU, 0.0, TAU] {
                let x = tc + j * step + wrap;
                if x > a && x < b {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    // coarse pass for the tolerance scale, then adaptive refinement
    let pieces: Vec<(f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, _) = gauss_kronrod(&f, w[0], w[1]);
            (w[0], w[1], v)
        })
        .collect();
    let scale: f64 = pieces.iter().map(|p| p.2.abs()).sum();
    let tol = (rel_tol * scale).max(ABS_FLOOR);
    let n = pieces.len() as f64;
    pieces
        .iter()
        .map(|&(lo, hi, _)| adaptive(&f, lo, hi, tol / n, 40))
        .sum()
}

/// Mass of `N(center, σ² I)` over `region`, whose sectors are polar around
/// `bs_pos`. A zero `sigma` degenerates to the indicator of `center`.
pub fn normal_mass(region: &AnnularRegion, center: Point2D, sigma: f64, bs_pos: Point2D) -> f64 {
    normal_mass_with_tol(region, center, sigma, bs_pos, DEFAULT_REL_TOL)
}

pub fn normal_mass_with_tol(region: &AnnularRegion, center: Point2D, sigma: f64, bs_pos: Point2D, rel_tol: f64) -> f64 {
    if sigma <= 0.0 {
        return if region.contains(bs_pos, center) { 1.0 } else { 0.0 };
    }
    let offset = center - bs_pos;
    region
        .parts
        .iter()
        .flat_map(|s| s.split_at_zero())
        .map(|s| sector_mass(&s, offset, sigma, rel_tol))
        .sum()
}
