//! Analytic model of discovery delay.
//!
//! Every beam configuration is approximated by a circular sector of radius
//! `η · max_aligned_range`. Step `n` of a search sequence can only discover
//! users in the residual region of its sector, the part not already covered
//! by sectors explored before it. The per-step discovery probability is the
//! mass of the location-error normal over that region, averaged over
//! nominal positions by Monte Carlo. MT steps split each BS step uniformly.

pub mod quadrature;
pub mod region;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codebook::{Algorithm, BeamConfig, Codebook, LevelRanges, SearchSequence};
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::radio::LinkBudget;

pub use quadrature::{normal_mass, normal_mass_with_tol, DEFAULT_REL_TOL};
pub use region::{residual_regions, AnnularRegion, AnnularSector, CoverageProfile};

/// Sector footprints of every codebook configuration around one BS.
#[derive(Debug, Clone)]
pub struct SectorApprox {
    codebook: Codebook,
    /// Unscaled aligned ranges, used for sequence construction.
    ranges: LevelRanges,
    radii: Vec<f64>,
    bs_pos: Point2D,
}

impl SectorApprox {
    pub fn new(codebook: &Codebook, link: &LinkBudget, mt_width_rad: f64, bs_pos: Point2D) -> Self {
        let ranges = LevelRanges::new(codebook, link, mt_width_rad);
        let radii = ranges.as_slice().iter().map(|r| link.eta * r).collect();
        Self {
            codebook: codebook.clone(),
            ranges,
            radii,
            bs_pos,
        }
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn ranges(&self) -> &LevelRanges {
        &self.ranges
    }

    pub fn bs_pos(&self) -> Point2D {
        self.bs_pos
    }

    /// Footprint radius of a width level.
    pub fn radius(&self, level: usize) -> f64 {
        self.radii[level]
    }

    pub fn sector_for_config(&self, c: BeamConfig) -> AnnularSector {
        AnnularSector::new(
            0.0,
            self.radii[c.level],
            self.codebook.start_deg(c).to_radians(),
            self.codebook.width_rad(c.level),
        )
    }

    pub fn footprints(&self, seq: &SearchSequence) -> Vec<AnnularSector> {
        seq.configs().iter().map(|&c| self.sector_for_config(c)).collect()
    }
}

/// Residual region of step `n` of `seq`.
pub fn residual_region(approx: &SectorApprox, seq: &SearchSequence, n: usize) -> AnnularRegion {
    let fp: Vec<AnnularSector> = seq.configs()[..=n].iter().map(|&c| approx.sector_for_config(c)).collect();
    residual_regions(&fp).pop().unwrap_or_default()
}

/// Per-step discovery probabilities for explicit footprints.
pub fn pmf_for_footprints(footprints: &[AnnularSector], nominal: Point2D, sigma: f64, bs_pos: Point2D, rel_tol: f64) -> Vec<f64> {
    residual_regions(footprints)
        .iter()
        .map(|r| if r.is_empty() { 0.0 } else { normal_mass_with_tol(r, nominal, sigma, bs_pos, rel_tol) })
        .collect()
}

/// `p[n]`: probability that a user reported at `nominal` with location
/// error `sigma` is discovered at BS step `n` of `seq`.
pub fn pmf_for_sequence(approx: &SectorApprox, seq: &SearchSequence, nominal: Point2D, sigma: f64) -> Vec<f64> {
    pmf_for_footprints(&approx.footprints(seq), nominal, sigma, approx.bs_pos, DEFAULT_REL_TOL)
}

/// Same as [`pmf_for_sequence`] with the sequence built by `algorithm`.
/// The random algorithm draws its permutation from `rng`.
pub fn pmf_given_position<R: Rng + ?Sized>(
    approx: &SectorApprox,
    algorithm: Algorithm,
    nominal: Point2D,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let seq = algorithm.sequence(&approx.codebook, &approx.ranges, nominal, approx.bs_pos, rng)?;
    Ok(pmf_for_sequence(approx, &seq, nominal, sigma))
}

/// Source of nominal user positions for the outer integral.
pub trait NominalSource: Sync {
    fn sample_nominal(&self, rng: &mut ChaCha8Rng) -> Result<Point2D>;
}

/// Point mass.
impl NominalSource for Point2D {
    fn sample_nominal(&self, _rng: &mut ChaCha8Rng) -> Result<Point2D> {
        Ok(*self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmfResult {
    pub p_bs: Vec<f64>,
    pub p_mt: Vec<f64>,
    pub p_unreachable: f64,
    /// Means conditioned on discovery.
    pub mean_bs: f64,
    pub mean_mt: f64,
    /// Monte Carlo standard errors of the means.
    pub mean_bs_stderr: f64,
    pub mean_mt_stderr: f64,
    pub mt_beams: usize,
    pub samples: usize,
}

impl PmfResult {
    pub fn reachable(&self) -> f64 {
        self.p_bs.iter().sum()
    }
}

/// MT-step probabilities: each BS step is split evenly over the `m` beams.
pub fn mt_pmf(p_bs: &[f64], m: usize) -> Vec<f64> {
    (0..p_bs.len() * m).map(|n| p_bs[n / m] / m as f64).collect()
}

/// Ratio estimate `Σa / Σb` with its delta-method standard error.
fn ratio_with_stderr(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let sb: f64 = b.iter().sum();
    if sb <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let r = a.iter().sum::<f64>() / sb;
    if a.len() < 2 {
        return (r, 0.0);
    }
    let mb = sb / n;
    let var = a.iter().zip(b).map(|(x, y)| (x - r * y).powi(2)).sum::<f64>() / (n - 1.0);
    (r, (var / n).sqrt() / mb)
}

/// Overall step distribution, averaging [`pmf_given_position`] over
/// `n_samples` nominal positions drawn from `users`.
pub fn pmf_overall(
    approx: &SectorApprox,
    algorithm: Algorithm,
    users: &dyn NominalSource,
    sigma: f64,
    mt_beams: usize,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PmfResult> {
    if n_samples == 0 {
        return Err(Error::Parameter("analytic model needs at least one sample".into()));
    }
    if mt_beams == 0 {
        return Err(Error::Parameter("MT needs at least one beam".into()));
    }
    let mut draws = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let nominal = users.sample_nominal(rng)?;
        draws.push((nominal, rng.random::<u64>()));
    }
    let per_sample: Vec<Vec<f64>> = draws
        .par_iter()
        .map(|&(nominal, seed)| {
            let mut sub = ChaCha8Rng::seed_from_u64(seed);
            pmf_given_position(approx, algorithm, nominal, sigma, &mut sub)
        })
        .collect::<Result<_>>()?;

    let steps = approx.codebook.total_configs();
    let mut p_bs = vec![0.0; steps];
    for p in &per_sample {
        for (acc, v) in p_bs.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let scale = 1.0 / n_samples as f64;
    p_bs.iter_mut().for_each(|v| *v *= scale);
    let reach: f64 = p_bs.iter().sum();

    let m = mt_beams as f64;
    let mass: Vec<f64> = per_sample.iter().map(|p| p.iter().sum()).collect();
    let bs_moment: Vec<f64> = per_sample
        .iter()
        .map(|p| p.iter().enumerate().map(|(n, v)| v * (n + 1) as f64).sum())
        .collect();
    let mt_moment: Vec<f64> = per_sample
        .iter()
        .map(|p| p.iter().enumerate().map(|(n, v)| v * (n as f64 * m + (m + 1.0) / 2.0)).sum())
        .collect();
    let (mean_bs, mean_bs_stderr) = ratio_with_stderr(&bs_moment, &mass);
    let (mean_mt, mean_mt_stderr) = ratio_with_stderr(&mt_moment, &mass);

    Ok(PmfResult {
        p_mt: mt_pmf(&p_bs, mt_beams),
        p_bs,
        p_unreachable: (1.0 - reach).max(0.0),
        mean_bs,
        mean_mt,
        mean_bs_stderr,
        mean_mt_stderr,
        mt_beams,
        samples: n_samples,
    })
}
