//! Campaign execution: simulation runs, replicated runs, parameter sweeps
//! and the analytic-versus-simulated comparison.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{pmf_overall, PmfResult, SectorApprox};
use crate::codebook::{Algorithm, LevelRanges};
use crate::context_db::{db_assisted_discovery, GeoContextDb};
use crate::error::{Error, Result};
use crate::geometry::Environment;
use crate::population::{build_environment, sample_population, NominalSampler, User};
use crate::rendezvous::{run_rendezvous, MtModel};
use crate::scenario::ScenarioConfig;
use crate::stats::{RunStats, Summary, UserRecord};

/// Stream offset separating the analytic model's draws from the simulation's.
const ANALYTIC_STREAM: u64 = 0x5eed_a11a_1c00_0000;

/// Obstacle layout and users for one seed.
pub fn prepare(cfg: &ScenarioConfig, seed: u64) -> Result<(Environment, Vec<User>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let env = build_environment(cfg, &mut rng)?;
    let users = sample_population(cfg, &env, &mut rng)?;
    Ok((env, users))
}

/// Runs discovery for every user in order. With a database the users are
/// processed sequentially, since each success changes later queries.
pub fn simulate_users(
    cfg: &ScenarioConfig,
    env: &Environment,
    users: &[User],
    seed: u64,
    db: Option<&mut GeoContextDb>,
) -> Result<RunStats> {
    let codebook = cfg.codebook()?;
    let ranges = LevelRanges::new(&codebook, &cfg.link, cfg.mt_width_rad());
    let bs = env.bs_pos();
    let sequence_for = |u: &User| {
        let mut rng = ChaCha8Rng::seed_from_u64(u.seed);
        cfg.algorithm.sequence(&codebook, &ranges, u.nominal, bs, &mut rng)
    };
    let mt_for = |u: &User| MtModel::new(cfg.mt_beams, u.orientation, u.start_index);

    let records = match db {
        None => users
            .par_iter()
            .map(|u| {
                let seq = sequence_for(u)?;
                let result = run_rendezvous(env, &cfg.link, &codebook, &seq, bs, u.true_pos, mt_for(u));
                Ok(UserRecord {
                    user_id: u.id,
                    nominal: u.nominal,
                    true_pos: u.true_pos,
                    result,
                    candidates: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        Some(db) => {
            let mut out = Vec::with_capacity(users.len());
            for u in users {
                let seq = sequence_for(u)?;
                let d = db_assisted_discovery(
                    env,
                    &cfg.link,
                    &codebook,
                    db,
                    cfg.db_range_m,
                    u.nominal,
                    &seq,
                    u.true_pos,
                    mt_for(u),
                );
                out.push(UserRecord {
                    user_id: u.id,
                    nominal: u.nominal,
                    true_pos: u.true_pos,
                    result: d.result,
                    candidates: d.candidates,
                });
            }
            out
        }
    };
    Ok(RunStats {
        algorithm: cfg.algorithm.name(),
        seed,
        records,
    })
}

fn uses_db(cfg: &ScenarioConfig) -> bool {
    cfg.db_range_m > 0.0 || cfg.db_load.is_some() || cfg.db_save.is_some()
}

fn initial_db(cfg: &ScenarioConfig) -> Result<GeoContextDb> {
    match &cfg.db_load {
        Some(path) => GeoContextDb::load(path, &cfg.codebook()?),
        None => Ok(GeoContextDb::new()),
    }
}

/// One seed, starting from the configured database state (empty unless
/// `db_load` is set). Returns the final database too.
pub fn run_seed(cfg: &ScenarioConfig, seed: u64) -> Result<(RunStats, Option<GeoContextDb>)> {
    let (env, users) = prepare(cfg, seed)?;
    if uses_db(cfg) {
        let mut db = initial_db(cfg)?;
        let stats = simulate_users(cfg, &env, &users, seed, Some(&mut db))?;
        Ok((stats, Some(db)))
    } else {
        Ok((simulate_users(cfg, &env, &users, seed, None)?, None))
    }
}

/// Full campaign at the configured seed; saves the database if requested.
pub fn run_campaign(cfg: &ScenarioConfig) -> Result<RunStats> {
    let (stats, db) = run_seed(cfg, cfg.seed)?;
    if let (Some(path), Some(db)) = (&cfg.db_save, db) {
        db.save(path, &cfg.codebook()?)?;
    }
    Ok(stats)
}

/// Average summary over `cfg.replicates` seeds starting at `cfg.seed`.
/// Each seed has its own obstacle layout and population.
pub fn run_replicated(cfg: &ScenarioConfig) -> Result<Summary> {
    let summaries = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|k| run_seed(cfg, cfg.seed.wrapping_add(k)).map(|(s, _)| s.summary()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Summary::average(&summaries))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    LocationError,
    EdpSectors,
    DbRange,
    Obstacles,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "location_error" => Ok(SweepAxis::LocationError),
            "edp_sectors" => Ok(SweepAxis::EdpSectors),
            "db_range" => Ok(SweepAxis::DbRange),
            "obstacles" => Ok(SweepAxis::Obstacles),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}` (expected location_error, edp_sectors, db_range or obstacles)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::LocationError => "location_error",
            SweepAxis::EdpSectors => "edp_sectors",
            SweepAxis::DbRange => "db_range",
            SweepAxis::Obstacles => "obstacles",
        })
    }
}

fn as_count(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!("{axis} needs non-negative integers, got {v}")))
    }
}

/// Copy of `cfg` with the axis set to `value`.
pub fn with_axis(cfg: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    match axis {
        SweepAxis::LocationError => c.location_error_m = value,
        SweepAxis::DbRange => c.db_range_m = value,
        SweepAxis::Obstacles => c.obstacles = as_count(axis, value)?,
        SweepAxis::EdpSectors => match c.algorithm {
            Algorithm::Edp { .. } => c.algorithm = Algorithm::Edp { sectors: as_count(axis, value)? },
            _ => return Err(Error::Config("edp_sectors sweep needs algorithm = edp".into())),
        },
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub summary: Summary,
}

/// One replicated campaign per value, all from the same master seed.
pub fn sweep(cfg: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    let configs = values
        .iter()
        .map(|&v| with_axis(cfg, axis, v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .zip(values)
        .map(|(c, &value)| {
            Ok(SweepRow {
                axis,
                value,
                summary: run_replicated(c)?,
            })
        })
        .collect()
}

fn require_obstacle_free(cfg: &ScenarioConfig) -> Result<()> {
    if cfg.obstacles > 0 || !cfg.fixed_obstacles.is_empty() {
        return Err(Error::Config("the analytic model only covers obstacle-free scenarios".into()));
    }
    Ok(())
}

/// Analytic step distribution for the scenario's users and algorithm.
pub fn run_analytic(cfg: &ScenarioConfig) -> Result<PmfResult> {
    cfg.validate()?;
    require_obstacle_free(cfg)?;
    let env = Environment::new(cfg.width_m, cfg.height_m, cfg.bs(), Vec::new())?;
    let codebook = cfg.codebook()?;
    let approx = SectorApprox::new(&codebook, &cfg.link, cfg.mt_width_rad(), env.bs_pos());
    let users = NominalSampler {
        distribution: cfg.distribution,
        env: &env,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ANALYTIC_STREAM);
    pmf_overall(
        &approx,
        cfg.algorithm,
        &users,
        cfg.sigma_loc(),
        cfg.mt_beams,
        cfg.analytic_samples,
        &mut rng,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algorithm: String,
    pub location_error_m: f64,
    pub analytic_bs: f64,
    pub simulated_bs: f64,
    pub gap_bs: f64,
    pub analytic_mt: f64,
    pub simulated_mt: f64,
    pub gap_mt: f64,
    pub analytic_unreachable: f64,
    pub simulated_unreachable: f64,
}

impl CompareRow {
    pub const HEADER: [&'static str; 10] = [
        "algorithm",
        "location_error_m",
        "analytic_bs",
        "simulated_bs",
        "gap_bs",
        "analytic_mt",
        "simulated_mt",
        "gap_mt",
        "analytic_unreachable",
        "simulated_unreachable",
    ];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.algorithm.clone(),
            self.location_error_m.to_string(),
            self.analytic_bs.to_string(),
            self.simulated_bs.to_string(),
            self.gap_bs.to_string(),
            self.analytic_mt.to_string(),
            self.simulated_mt.to_string(),
            self.gap_mt.to_string(),
            self.analytic_unreachable.to_string(),
            self.simulated_unreachable.to_string(),
        ]
    }
}

/// `|analytic - simulated| / simulated`
pub fn relative_gap(analytic: f64, simulated: f64) -> f64 {
    (analytic - simulated).abs() / simulated
}

/// Analytic prediction against replicated simulation on the same scenario.
pub fn compare_model(cfg: &ScenarioConfig) -> Result<CompareRow> {
    require_obstacle_free(cfg)?;
    if uses_db(cfg) {
        return Err(Error::Config("the analytic model does not cover the context database".into()));
    }
    let model = run_analytic(cfg)?;
    let sim = run_replicated(cfg)?;
    Ok(CompareRow {
        algorithm: cfg.algorithm.name(),
        location_error_m: cfg.location_error_m,
        analytic_bs: model.mean_bs,
        simulated_bs: sim.mean_bs,
        gap_bs: relative_gap(model.mean_bs, sim.mean_bs),
        analytic_mt: model.mean_mt,
        simulated_mt: sim.mean_mt,
        gap_mt: relative_gap(model.mean_mt, sim.mean_mt),
        analytic_unreachable: model.p_unreachable,
        simulated_unreachable: sim.unreachable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::UserDistribution;

    fn small(users: usize) -> ScenarioConfig {
        ScenarioConfig {
            users,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn exact_positions_take_one_step_with_edp() {
        let cfg = small(300);
        let stats = run_campaign(&cfg).unwrap();
        let ranges = LevelRanges::new(&cfg.codebook().unwrap(), &cfg.link, cfg.mt_width_rad());
        for r in &stats.records {
            let d = r.nominal.distance(cfg.bs());
            let w0 = ranges.initial_level(d);
            if d <= ranges.range(w0) * 10f64.powf(-6.0 / (10.0 * cfg.link.k_far)) {
                assert_eq!(r.result.bs_switches, 1, "{r:?}");
            }
            assert!(r.result.success);
        }
    }

    #[test]
    fn campaign_is_deterministic() {
        let cfg = ScenarioConfig {
            obstacles: 10,
            location_error_m: 40.0,
            algorithm: Algorithm::Random,
            ..small(200)
        };
        assert_eq!(run_campaign(&cfg).unwrap(), run_campaign(&cfg).unwrap());
    }

    #[test]
    fn zero_range_db_matches_plain() {
        let cfg = ScenarioConfig {
            obstacles: 20,
            location_error_m: 60.0,
            algorithm: Algorithm::Dsls,
            ..small(200)
        };
        let (env, users) = prepare(&cfg, 3).unwrap();
        let plain = simulate_users(&cfg, &env, &users, 3, None).unwrap();
        let mut db = GeoContextDb::new();
        let with_db = simulate_users(&cfg, &env, &users, 3, Some(&mut db)).unwrap();
        assert_eq!(plain, with_db);
        assert!(!db.is_empty());
    }

    #[test]
    fn primed_db_does_not_hurt() {
        let cfg = ScenarioConfig {
            obstacles: 30,
            location_error_m: 80.0,
            db_range_m: 30.0,
            algorithm: Algorithm::Dsls,
            ..small(300)
        };
        let (env, users) = prepare(&cfg, 5).unwrap();
        let mut db = GeoContextDb::new();
        let first = simulate_users(&cfg, &env, &users, 5, Some(&mut db)).unwrap();
        let second = simulate_users(&cfg, &env, &users, 5, Some(&mut db)).unwrap();
        assert!(second.mean_mt() <= first.mean_mt());
    }

    #[test]
    fn sweep_axes() {
        assert!("bogus".parse::<SweepAxis>().is_err());
        let cfg = small(50);
        let rows = sweep(&cfg, SweepAxis::LocationError, &[0.0, 30.0]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].value, 30.0);
        assert!(with_axis(&cfg, SweepAxis::Obstacles, 2.5).is_err());
        let sls = ScenarioConfig {
            algorithm: Algorithm::Sls,
            ..cfg
        };
        assert!(with_axis(&sls, SweepAxis::EdpSectors, 4.0).is_err());
    }

    #[test]
    fn compare_rejects_obstacles_and_is_repeatable() {
        let cfg = ScenarioConfig {
            obstacles: 3,
            ..small(50)
        };
        assert!(compare_model(&cfg).unwrap_err().is_config());
        let cfg = ScenarioConfig {
            location_error_m: 30.0,
            analytic_samples: 100,
            distribution: UserDistribution::Normal { sigma_d: 80.0 },
            ..small(100)
        };
        assert_eq!(compare_model(&cfg).unwrap(), compare_model(&cfg).unwrap());
    }
}
