//! User populations and obstacle layouts.
//!
//! Every draw is seeded. A campaign seed first fixes the obstacle layout,
//! then one sub-seed per user; each user's nominal position, true position,
//! MT orientation, sweep start and algorithm randomness come from its own
//! sub-seed, so users can be sampled in parallel without changing results.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::analytic::NominalSource;
use crate::error::{Error, Result};
use crate::geometry::{Environment, Obstacle, Point2D};
use crate::scenario::ScenarioConfig;

/// Proposals allowed per rejection-sampled draw before giving up.
pub const MAX_PROPOSALS: usize = 10_000;

/// Distribution of nominal user positions, centered at the BS and truncated
/// to the free area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserDistribution {
    Uniform,
    Normal { sigma_d: f64 },
    /// Normal with no users closer than `hole` to the BS.
    RingNormal { sigma_d: f64, hole: f64 },
}

impl UserDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            UserDistribution::Uniform => Ok(()),
            UserDistribution::Normal { sigma_d } | UserDistribution::RingNormal { sigma_d, .. }
                if !(sigma_d > 0.0 && sigma_d.is_finite()) =>
            {
                Err(Error::Config(format!("sigma_d_m must be positive, got {sigma_d}")))
            }
            UserDistribution::RingNormal { hole, .. } if !(hole >= 0.0 && hole.is_finite()) => {
                Err(Error::Config(format!("hole_m must be non-negative, got {hole}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            UserDistribution::Uniform => "uniform".into(),
            UserDistribution::Normal { sigma_d } => format!("normal({sigma_d})"),
            UserDistribution::RingNormal { sigma_d, hole } => format!("ring_normal({sigma_d},{hole})"),
        }
    }

    /// Untruncated proposal.
    fn propose<R: Rng + ?Sized>(&self, env: &Environment, rng: &mut R) -> Point2D {
        match *self {
            UserDistribution::Uniform => {
                Point2D::new(rng.random_range(0.0..env.width()), rng.random_range(0.0..env.height()))
            }
            UserDistribution::Normal { sigma_d } | UserDistribution::RingNormal { sigma_d, .. } => {
                let n = Normal::new(0.0, sigma_d).expect("validated sigma");
                env.bs_pos() + Point2D::new(n.sample(rng), n.sample(rng))
            }
        }
    }

    fn accepts(&self, env: &Environment, p: Point2D) -> bool {
        let ring_ok = match *self {
            UserDistribution::RingNormal { hole, .. } => p.distance(env.bs_pos()) >= hole,
            _ => true,
        };
        ring_ok && env.is_free(p)
    }

    /// One nominal position inside the free area.
    pub fn sample<R: Rng + ?Sized>(&self, env: &Environment, rng: &mut R) -> Result<Point2D> {
        for _ in 0..MAX_PROPOSALS {
            let p = self.propose(env, rng);
            if self.accepts(env, p) {
                return Ok(p);
            }
        }
        Err(Error::Sampling(format!(
            "no {} position accepted in {MAX_PROPOSALS} proposals",
            self.name()
        )))
    }
}

/// Nominal positions of a distribution in a given environment, for the
/// analytic model's outer integral.
pub struct NominalSampler<'a> {
    pub distribution: UserDistribution,
    pub env: &'a Environment,
}

impl NominalSource for NominalSampler<'_> {
    fn sample_nominal(&self, rng: &mut ChaCha8Rng) -> Result<Point2D> {
        self.distribution.sample(self.env, rng)
    }
}

/// True position: `nominal` plus an isotropic normal error, redrawn until it
/// lands in the free area.
pub fn sample_true_position<R: Rng + ?Sized>(
    env: &Environment,
    nominal: Point2D,
    sigma_loc: f64,
    rng: &mut R,
) -> Result<Point2D> {
    if sigma_loc == 0.0 {
        return Ok(nominal);
    }
    let n = Normal::new(0.0, sigma_loc).map_err(|e| Error::Parameter(e.to_string()))?;
    for _ in 0..MAX_PROPOSALS {
        let p = nominal + Point2D::new(n.sample(rng), n.sample(rng));
        if env.is_free(p) {
            return Ok(p);
        }
    }
    Err(Error::Sampling(format!(
        "no true position accepted around ({}, {})",
        nominal.x, nominal.y
    )))
}

/// `count` squares of side `side` dropped uniformly inside the area; drops
/// covering the BS are redrawn.
pub fn drop_obstacles<R: Rng + ?Sized>(
    width: f64,
    height: f64,
    bs_pos: Point2D,
    count: usize,
    side: f64,
    rng: &mut R,
) -> Result<Vec<Obstacle>> {
    if side >= width || side >= height {
        return Err(Error::Config(format!("obstacle side {side} does not fit the area")));
    }
    let h = side / 2.0;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut placed = false;
        for _ in 0..MAX_PROPOSALS {
            let o = Obstacle::new(rng.random_range(h..width - h), rng.random_range(h..height - h), side);
            if !o.contains_closed(bs_pos) {
                out.push(o);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Sampling("cannot place an obstacle away from the BS".into()));
        }
    }
    Ok(out)
}

/// Fixed obstacles of the scenario plus a random drop drawn from `rng`.
pub fn build_environment<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Environment> {
    let mut obstacles = cfg.fixed_obstacles.clone();
    obstacles.extend(drop_obstacles(
        cfg.width_m,
        cfg.height_m,
        cfg.bs(),
        cfg.obstacles,
        cfg.obstacle_side_m,
        rng,
    )?);
    let walls = cfg.reflective_boundary.unwrap_or(!obstacles.is_empty());
    Ok(Environment::new(cfg.width_m, cfg.height_m, cfg.bs(), obstacles)?.with_reflective_boundary(walls))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    pub id: usize,
    pub nominal: Point2D,
    pub true_pos: Point2D,
    /// MT antenna rotation.
    pub orientation: f64,
    /// First MT beam of every sweep.
    pub start_index: usize,
    /// Seed for the search algorithm's own randomness.
    pub seed: u64,
}

/// Draws `cfg.users` users; one sub-seed per user is taken from `rng`.
pub fn sample_population<R: Rng + ?Sized>(cfg: &ScenarioConfig, env: &Environment, rng: &mut R) -> Result<Vec<User>> {
    let seeds: Vec<u64> = (0..cfg.users).map(|_| rng.random()).collect();
    let sigma = cfg.sigma_loc();
    seeds
        .par_iter()
        .enumerate()
        .map(|(id, &s)| {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            let nominal = cfg.distribution.sample(env, &mut r)?;
            let true_pos = sample_true_position(env, nominal, sigma, &mut r)?;
            Ok(User {
                id,
                nominal,
                true_pos,
                orientation: r.random_range(0.0..TAU),
                start_index: r.random_range(0..cfg.mt_beams),
                seed: r.random(),
            })
        })
        .collect()
}
