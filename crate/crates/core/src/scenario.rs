//! Scenario files.
//!
//! A scenario is a flat `key = value` text split into `[scenario]`,
//! `[radio]`, `[db]` and `[environment]` sections. Lines starting with `#`
//! are comments. Unknown sections and keys are errors.
//!
//! ```text
//! [scenario]
//! users = 1000
//! distribution = normal
//! sigma_d_m = 100
//! location_error_m = 50
//! algorithm = edp
//! edp_sectors = 4
//! obstacles = 30
//!
//! [db]
//! db_range_m = 30
//!
//! [environment]
//! obstacle = 300, 175, 20
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::codebook::{Algorithm, Codebook, DEFAULT_WIDTHS_DEG};
use crate::error::{Error, Result};
use crate::geometry::{Obstacle, Point2D};
use crate::population::UserDistribution;
use crate::radio::{default_eta, LinkBudget};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub width_m: f64,
    pub height_m: f64,
    /// Defaults to the middle of the area.
    pub bs_pos: Option<Point2D>,
    /// Obstacles placed explicitly; random ones are added per seed.
    pub fixed_obstacles: Vec<Obstacle>,
    /// Whether the area walls reflect. `None` means only when the area
    /// holds obstacles, so obstacle-free scenarios are pure line of sight.
    pub reflective_boundary: Option<bool>,
    pub users: usize,
    pub distribution: UserDistribution,
    /// `ε = 3σ` of the reported-position error.
    pub location_error_m: f64,
    pub algorithm: Algorithm,
    pub obstacles: usize,
    pub obstacle_side_m: f64,
    pub db_range_m: f64,
    pub db_load: Option<PathBuf>,
    pub db_save: Option<PathBuf>,
    pub seed: u64,
    /// Number of seeds (`seed`, `seed + 1`, ...) averaged by replicated runs.
    pub replicates: usize,
    pub mt_beams: usize,
    pub widths_deg: Vec<f64>,
    /// Nominal positions drawn for the analytic model's outer integral.
    pub analytic_samples: usize,
    pub link: LinkBudget,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            width_m: 450.0,
            height_m: 350.0,
            bs_pos: None,
            fixed_obstacles: Vec::new(),
            reflective_boundary: None,
            users: 1000,
            distribution: UserDistribution::Uniform,
            location_error_m: 0.0,
            algorithm: Algorithm::Edp { sectors: 1 },
            obstacles: 0,
            obstacle_side_m: 20.0,
            db_range_m: 0.0,
            db_load: None,
            db_save: None,
            seed: 1,
            replicates: 1,
            mt_beams: 12,
            widths_deg: DEFAULT_WIDTHS_DEG.to_vec(),
            analytic_samples: 2000,
            link: LinkBudget::default(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Scenario,
    Radio,
    Db,
    Environment,
}

impl ScenarioConfig {
    /// Standard deviation of the location error per axis.
    pub fn sigma_loc(&self) -> f64 {
        self.location_error_m / 3.0
    }

    pub fn bs(&self) -> Point2D {
        self.bs_pos
            .unwrap_or(Point2D::new(self.width_m / 2.0, self.height_m / 2.0))
    }

    pub fn codebook(&self) -> Result<Codebook> {
        Codebook::new(&self.widths_deg)
    }

    pub fn mt_width_rad(&self) -> f64 {
        std::f64::consts::TAU / self.mt_beams as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.width_m > 0.0 && self.height_m > 0.0) {
            return bad("area dimensions must be positive".into());
        }
        if !(self.location_error_m >= 0.0 && self.location_error_m.is_finite()) {
            return bad("location_error_m must be non-negative".into());
        }
        if self.mt_beams == 0 {
            return bad("mt_beams must be at least 1".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.analytic_samples == 0 {
            return bad("analytic_samples must be at least 1".into());
        }
        if !(self.obstacle_side_m > 0.0) {
            return bad("obstacle_side_m must be positive".into());
        }
        if !(self.db_range_m >= 0.0 && self.db_range_m.is_finite()) {
            return bad("db_range_m must be non-negative".into());
        }
        if let Algorithm::Edp { sectors: 0 } = self.algorithm {
            return bad("edp_sectors must be at least 1".into());
        }
        self.distribution.validate()?;
        self.link.validate()?;
        self.codebook()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section: Option<Section> = None;
        let mut seen: HashSet<(usize, String)> = HashSet::new();
        let mut algo: Option<String> = None;
        let mut sectors: Option<usize> = None;
        let mut distribution: Option<String> = None;
        let mut sigma_d: Option<f64> = None;
        let mut hole: Option<f64> = None;
        let mut eta_set = false;
        let (mut bs_x, mut bs_y) = (None, None);

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::ConfigLine { line: line_no, msg };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = Some(match name.trim() {
                    "scenario" => Section::Scenario,
                    "radio" => Section::Radio,
                    "db" => Section::Db,
                    "environment" => Section::Environment,
                    other => return Err(err(format!("unknown section [{other}]"))),
                });
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected key = value, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section else {
                return Err(err(format!("key `{key}` outside any section")));
            };
            if key != "obstacle" && !seen.insert((sec as usize, key.to_string())) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            let num = || value.parse::<f64>().map_err(|_| err(format!("{key}: not a number: `{value}`")));
            let int = || value.parse::<u64>().map_err(|_| err(format!("{key}: not a non-negative integer: `{value}`")));
            let count = || int().map(|v| v as usize);

            match (sec, key) {
                (Section::Scenario, "users") => cfg.users = count()?,
                (Section::Scenario, "distribution") => distribution = Some(value.to_ascii_lowercase()),
                (Section::Scenario, "sigma_d_m") => sigma_d = Some(num()?),
                (Section::Scenario, "hole_m") => hole = Some(num()?),
                (Section::Scenario, "location_error_m") => cfg.location_error_m = num()?,
                (Section::Scenario, "algorithm") => algo = Some(value.to_ascii_lowercase()),
                (Section::Scenario, "edp_sectors") => sectors = Some(count()?),
                (Section::Scenario, "obstacles") => cfg.obstacles = count()?,
                (Section::Scenario, "obstacle_side_m") => cfg.obstacle_side_m = num()?,
                (Section::Scenario, "seed") => cfg.seed = int()?,
                (Section::Scenario, "replicates") => cfg.replicates = count()?,
                (Section::Scenario, "mt_beams") => cfg.mt_beams = count()?,
                (Section::Scenario, "analytic_samples") => cfg.analytic_samples = count()?,
                (Section::Scenario, "widths_deg") => {
                    cfg.widths_deg = value
                        .split(',')
                        .map(|w| w.trim().parse::<f64>().map_err(|_| err(format!("widths_deg: bad width `{w}`"))))
                        .collect::<Result<_>>()?;
                }
                (Section::Radio, "tx_power_dbm") => cfg.link.tx_power_dbm = num()?,
                (Section::Radio, "threshold_dbm") => cfg.link.threshold_dbm = num()?,
                (Section::Radio, "pl_ref_db") => cfg.link.pl_ref_db = num()?,
                (Section::Radio, "l0_m") => cfg.link.l0_m = num()?,
                (Section::Radio, "k_far") => cfg.link.k_far = num()?,
                (Section::Radio, "k_near") => cfg.link.k_near = num()?,
                (Section::Radio, "wavelength_m") => cfg.link.wavelength_m = num()?,
                (Section::Radio, "roughness_m") => cfg.link.roughness_m = num()?,
                (Section::Radio, "permittivity_re") => cfg.link.permittivity.re = num()?,
                (Section::Radio, "permittivity_im") => cfg.link.permittivity.im = num()?,
                (Section::Radio, "eta") => {
                    cfg.link.eta = num()?;
                    eta_set = true;
                }
                (Section::Db, "db_range_m") => cfg.db_range_m = num()?,
                (Section::Db, "db_load") => cfg.db_load = Some(PathBuf::from(value)),
                (Section::Db, "db_save") => cfg.db_save = Some(PathBuf::from(value)),
                (Section::Environment, "width_m") => cfg.width_m = num()?,
                (Section::Environment, "height_m") => cfg.height_m = num()?,
                (Section::Environment, "bs_x") => bs_x = Some(num()?),
                (Section::Environment, "bs_y") => bs_y = Some(num()?),
                (Section::Environment, "reflective_boundary") => {
                    cfg.reflective_boundary = match value {
                        "true" => Some(true),
                        "false" => Some(false),
                        "auto" => None,
                        _ => return Err(err(format!("reflective_boundary: expected true, false or auto, got `{value}`"))),
                    }
                }
                (Section::Environment, "obstacle") => {
                    let parts: Vec<f64> = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(format!("obstacle: expected cx, cy, side, got `{value}`")))?;
                    let [cx, cy, side] = parts[..] else {
                        return Err(err(format!("obstacle: expected cx, cy, side, got `{value}`")));
                    };
                    cfg.fixed_obstacles.push(Obstacle::new(cx, cy, side));
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }

        if !eta_set {
            cfg.link.eta = default_eta(cfg.link.k_far);
        }
        cfg.bs_pos = match (bs_x, bs_y) {
            (Some(x), Some(y)) => Some(Point2D::new(x, y)),
            (None, None) => None,
            _ => return Err(Error::Config("bs_x and bs_y must be given together".into())),
        };
        cfg.algorithm = match (algo.as_deref(), sectors) {
            (None | Some("edp"), s) => Algorithm::Edp { sectors: s.unwrap_or(1) },
            (Some("random"), None) => Algorithm::Random,
            (Some("sls"), None) => Algorithm::Sls,
            (Some("dsls"), None) => Algorithm::Dsls,
            (Some("random" | "sls" | "dsls"), Some(_)) => {
                return Err(Error::Config("edp_sectors only applies to algorithm = edp".into()))
            }
            (Some(other), _) => return Err(Error::Config(format!("unknown algorithm `{other}`"))),
        };
        cfg.distribution = match distribution.as_deref() {
            None | Some("uniform") => {
                if sigma_d.is_some() || hole.is_some() {
                    return Err(Error::Config("sigma_d_m / hole_m need a normal distribution".into()));
                }
                UserDistribution::Uniform
            }
            Some("normal") => {
                if hole.is_some() {
                    return Err(Error::Config("hole_m needs distribution = ring_normal".into()));
                }
                let sigma_d = sigma_d.ok_or_else(|| Error::Config("normal distribution needs sigma_d_m".into()))?;
                UserDistribution::Normal { sigma_d }
            }
            Some("ring_normal") => UserDistribution::RingNormal {
                sigma_d: sigma_d.ok_or_else(|| Error::Config("ring_normal distribution needs sigma_d_m".into()))?,
                hole: hole.ok_or_else(|| Error::Config("ring_normal distribution needs hole_m".into()))?,
            },
            Some(other) => return Err(Error::Config(format!("unknown distribution `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scenario text that parses back to this configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::from("[scenario]\n");
        let _ = writeln!(s, "users = {}", self.users);
        match self.distribution {
            UserDistribution::Uniform => s.push_str("distribution = uniform\n"),
            UserDistribution::Normal { sigma_d } => {
                let _ = writeln!(s, "distribution = normal\nsigma_d_m = {sigma_d}");
            }
            UserDistribution::RingNormal { sigma_d, hole } => {
                let _ = writeln!(s, "distribution = ring_normal\nsigma_d_m = {sigma_d}\nhole_m = {hole}");
            }
        }
        let _ = writeln!(s, "location_error_m = {}", self.location_error_m);
        match self.algorithm {
            Algorithm::Edp { sectors } => {
                let _ = writeln!(s, "algorithm = edp\nedp_sectors = {sectors}");
            }
            a => {
                let _ = writeln!(s, "algorithm = {}", a.name());
            }
        }
        let _ = writeln!(s, "obstacles = {}", self.obstacles);
        let _ = writeln!(s, "obstacle_side_m = {}", self.obstacle_side_m);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "replicates = {}", self.replicates);
        let _ = writeln!(s, "mt_beams = {}", self.mt_beams);
        let widths: Vec<String> = self.widths_deg.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "widths_deg = {}", widths.join(", "));
        let _ = writeln!(s, "analytic_samples = {}", self.analytic_samples);

        let l = &self.link;
        s.push_str("\n[radio]\n");
        let _ = writeln!(s, "tx_power_dbm = {}", l.tx_power_dbm);
        let _ = writeln!(s, "threshold_dbm = {}", l.threshold_dbm);
        let _ = writeln!(s, "pl_ref_db = {}", l.pl_ref_db);
        let _ = writeln!(s, "l0_m = {}", l.l0_m);
        let _ = writeln!(s, "k_far = {}", l.k_far);
        let _ = writeln!(s, "k_near = {}", l.k_near);
        let _ = writeln!(s, "wavelength_m = {}", l.wavelength_m);
        let _ = writeln!(s, "roughness_m = {}", l.roughness_m);
        let _ = writeln!(s, "permittivity_re = {}", l.permittivity.re);
        let _ = writeln!(s, "permittivity_im = {}", l.permittivity.im);
        let _ = writeln!(s, "eta = {}", l.eta);

        s.push_str("\n[db]\n");
        let _ = writeln!(s, "db_range_m = {}", self.db_range_m);
        if let Some(p) = &self.db_load {
            let _ = writeln!(s, "db_load = {}", p.display());
        }
        if let Some(p) = &self.db_save {
            let _ = writeln!(s, "db_save = {}", p.display());
        }

        s.push_str("\n[environment]\n");
        let _ = writeln!(s, "width_m = {}", self.width_m);
        let _ = writeln!(s, "height_m = {}", self.height_m);
        if let Some(bs) = self.bs_pos {
            let _ = writeln!(s, "bs_x = {}\nbs_y = {}", bs.x, bs.y);
        }
        let walls = self.reflective_boundary.map_or("auto".to_string(), |b| b.to_string());
        let _ = writeln!(s, "reflective_boundary = {walls}");
        for o in &self.fixed_obstacles {
            let _ = writeln!(s, "obstacle = {}, {}, {}", o.center.x, o.center.y, o.side);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = ScenarioConfig::parse("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.bs(), Point2D::new(225.0, 175.0));
        assert_eq!(cfg.sigma_loc(), 0.0);
    }

    #[test]
    fn parses_all_sections() {
        let text = "
# comment
[scenario]
users = 200
distribution = ring_normal
sigma_d_m = 40
hole_m = 50
location_error_m = 60
algorithm = EDP
edp_sectors = 8
obstacles = 30
seed = 7

[radio]
k_far = 2.5
permittivity_im = 0.1

[db]
db_range_m = 25
db_save = out/db.txt

[environment]
width_m = 300
height_m = 200
bs_x = 100
bs_y = 90
obstacle = 200, 100, 20
obstacle = 50, 50, 10
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.users, 200);
        assert_eq!(cfg.distribution, UserDistribution::RingNormal { sigma_d: 40.0, hole: 50.0 });
        assert_eq!(cfg.sigma_loc(), 20.0);
        assert_eq!(cfg.algorithm, Algorithm::Edp { sectors: 8 });
        assert_eq!(cfg.link.k_far, 2.5);
        assert_eq!(cfg.link.eta, default_eta(2.5));
        assert_eq!(cfg.link.permittivity.im, 0.1);
        assert_eq!(cfg.db_range_m, 25.0);
        assert_eq!(cfg.db_save.as_deref(), Some(Path::new("out/db.txt")));
        assert_eq!(cfg.bs(), Point2D::new(100.0, 90.0));
        assert_eq!(cfg.fixed_obstacles.len(), 2);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ScenarioConfig::default();
        cfg.algorithm = Algorithm::Dsls;
        cfg.distribution = UserDistribution::Normal { sigma_d: 100.0 };
        cfg.location_error_m = 50.0;
        cfg.fixed_obstacles.push(Obstacle::new(10.5, 20.0, 5.0));
        cfg.bs_pos = Some(Point2D::new(200.0, 100.0));
        cfg.reflective_boundary = Some(false);
        cfg.link.eta = 0.8;
        cfg.db_load = Some(PathBuf::from("prior.db"));
        assert_eq!(ScenarioConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        for bad in [
            "[scenario]\nuser = 3\n",
            "[radar]\n",
            "users = 3\n",
            "[scenario]\nusers = -1\n",
            "[scenario]\nusers = 3\nusers = 4\n",
            "[scenario]\nalgorithm = sls\nedp_sectors = 4\n",
            "[scenario]\nalgorithm = greedy\n",
            "[scenario]\ndistribution = normal\n",
            "[scenario]\nlocation_error_m = -5\n",
            "[radio]\neta = 1.5\n",
            "[environment]\nobstacle = 1, 2\n",
            "[environment]\nbs_x = 3\n",
            "[environment]\nreflective_boundary = maybe\n",
            "[scenario]\nwidths_deg = 360, 7\n",
            "[scenario]\nusers\n",
        ] {
            let err = ScenarioConfig::parse(bad).unwrap_err();
            assert!(err.is_config(), "{bad}");
        }
    }

    #[test]
    fn error_carries_line_number() {
        let err = ScenarioConfig::parse("[scenario]\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 3, .. }));
    }
}
