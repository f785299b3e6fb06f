//! Antenna gains, path loss and the beacon detection decision.

use std::f64::consts::{LN_10, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, wrap_pi, Environment, PathGeometry, PathKind, Point2D};

/// Boresight gain (dBi) of a symmetric pencil beam of half-power width
/// `width` radians, evaluated `offset` radians off boresight.
///
/// Gaussian main lobe with no side-lobe floor: the gain keeps falling
/// quadratically in the offset, and is exactly 3 dB down at `width / 2`.
pub fn antenna_gain_db(width: f64, offset: f64) -> f64 {
    let peak = 10.0 * (16.0 * PI / (6.76 * width * width)).log10();
    let rel = offset / width;
    peak - 12.0 * rel * rel
}

/// A steerable beam: half-power width and absolute boresight, both radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaBeam {
    pub width: f64,
    pub boresight: f64,
}

impl AntennaBeam {
    pub fn new(width: f64, boresight: f64) -> Self {
        debug_assert!(width > 0.0 && width <= TAU + 1e-12);
        Self {
            width,
            boresight: normalize_angle(boresight),
        }
    }

    /// Gain towards absolute direction `angle`.
    pub fn gain_towards(&self, angle: f64) -> f64 {
        antenna_gain_db(self.width, wrap_pi(angle - self.boresight))
    }
}

/// Link-budget constants. Defaults describe a 60 GHz small cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub threshold_dbm: f64,
    /// Path loss at the reference distance.
    pub pl_ref_db: f64,
    pub l0_m: f64,
    /// Propagation exponent beyond `l0_m`.
    pub k_far: f64,
    /// Propagation exponent up to `l0_m`.
    pub k_near: f64,
    pub wavelength_m: f64,
    /// Surface roughness standard deviation.
    pub roughness_m: f64,
    /// Relative permittivity of reflecting surfaces.
    pub permittivity: Complex64,
    /// Range shrink factor of the analytic sector approximation.
    pub eta: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        let k_far = 2.36;
        Self {
            tx_power_dbm: 30.0,
            threshold_dbm: -73.0,
            pl_ref_db: 82.02,
            l0_m: 5.0,
            k_far,
            k_near: 2.0,
            wavelength_m: 0.005,
            roughness_m: 0.0002,
            permittivity: Complex64::new(4.0, 0.2),
            eta: default_eta(k_far),
        }
    }
}

/// Range shrink caused by a worst-case 3 dB MT misalignment.
pub fn default_eta(k_far: f64) -> f64 {
    10f64.powf(-3.0 / (10.0 * k_far))
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.tx_power_dbm,
            self.threshold_dbm,
            self.pl_ref_db,
            self.l0_m,
            self.k_far,
            self.k_near,
            self.wavelength_m,
            self.roughness_m,
            self.permittivity.re,
            self.permittivity.im,
            self.eta,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("radio parameters must be finite".into()));
        }
        if self.threshold_dbm >= self.tx_power_dbm {
            return Err(Error::Parameter("threshold must be below transmit power".into()));
        }
        if self.l0_m <= 0.0 {
            return Err(Error::Parameter("l0 must be positive".into()));
        }
        if self.k_far <= 0.0 || self.k_near <= 0.0 {
            return Err(Error::Parameter("propagation exponents must be positive".into()));
        }
        if self.wavelength_m <= 0.0 || self.roughness_m < 0.0 {
            return Err(Error::Parameter("wavelength must be positive, roughness non-negative".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Parameter(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        Ok(())
    }

    /// Distance-dependent loss, with the near-field exponent up to `l0`.
    pub fn distance_loss_db(&self, length: f64) -> f64 {
        let k = if length > self.l0_m { self.k_far } else { self.k_near };
        self.pl_ref_db + k * 10.0 * (length / self.l0_m).log10()
    }

    /// Total loss along a path, including reflection attenuation.
    pub fn path_loss_db(&self, path: &PathGeometry) -> f64 {
        let base = self.distance_loss_db(path.length);
        match (path.kind, path.grazing_angle) {
            (PathKind::Reflected, Some(theta)) => base + self.reflection_extra_loss_db(theta),
            _ => base,
        }
    }

    /// Fresnel reflection loss plus roughness (Rayleigh) scattering loss at
    /// grazing angle `theta`, both as non-negative attenuations in dB.
    pub fn reflection_extra_loss_db(&self, theta: f64) -> f64 {
        self.fresnel_loss_db(theta) + self.roughness_loss_db(theta)
    }

    pub fn fresnel_loss_db(&self, theta: f64) -> f64 {
        let s = theta.sin();
        let c = theta.cos();
        let root = (self.permittivity - Complex64::new(c * c, 0.0)).sqrt();
        let ratio = (Complex64::new(s, 0.0) - root).norm() / (Complex64::new(s, 0.0) + root).norm();
        (20.0 * ratio.log10()).abs()
    }

    pub fn roughness_loss_db(&self, theta: f64) -> f64 {
        let g = PI * self.roughness_m * theta.sin() / self.wavelength_m;
        (-80.0 / LN_10 * g * g).abs()
    }

    pub fn received_power_dbm(&self, bs_beam: &AntennaBeam, mt_beam: &AntennaBeam, path: &PathGeometry) -> f64 {
        self.tx_power_dbm + bs_beam.gain_towards(path.departure_angle) + mt_beam.gain_towards(path.arrival_angle)
            - self.path_loss_db(path)
    }

    /// Largest BS-MT distance reachable with both beams perfectly aligned
    /// over a direct path. Unscaled by `eta`.
    pub fn max_aligned_range(&self, w_bs: f64, w_mt: f64) -> f64 {
        let allowed = self.tx_power_dbm + antenna_gain_db(w_bs, 0.0) + antenna_gain_db(w_mt, 0.0)
            - self.threshold_dbm;
        let k = if allowed > self.pl_ref_db { self.k_far } else { self.k_near };
        self.l0_m * 10f64.powf((allowed - self.pl_ref_db) / (10.0 * k))
    }
}

/// Strongest received power over a set of paths; `None` for no path.
pub fn best_received_power_dbm(
    params: &LinkBudget,
    bs_beam: &AntennaBeam,
    mt_beam: &AntennaBeam,
    paths: &[PathGeometry],
) -> Option<(f64, PathKind)> {
    paths
        .iter()
        .map(|p| (params.received_power_dbm(bs_beam, mt_beam, p), p.kind))
        .fold(None, |best, cur| match best {
            Some((b, _)) if b >= cur.0 => best,
            _ => Some(cur),
        })
}

/// True iff the beacon sent on `bs_beam` is decodable on `mt_beam` over at
/// least one propagation path.
pub fn detectable(
    env: &Environment,
    params: &LinkBudget,
    bs_beam: &AntennaBeam,
    mt_beam: &AntennaBeam,
    bs_pos: Point2D,
    mt_pos: Point2D,
) -> bool {
    let paths = env.single_bounce_paths(bs_pos, mt_pos);
    best_received_power_dbm(params, bs_beam, mt_beam, &paths)
        .is_some_and(|(p, _)| p >= params.threshold_dbm)
}
