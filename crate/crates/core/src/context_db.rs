//! Geo-located context database of past successful discoveries.
//!
//! Entries are `(nominal position, beam configuration)` pairs, appended on
//! every success. A query returns the configurations of all entries within
//! range `m` of the new nominal position, nearest first, each configuration
//! kept only at its closest entry.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::codebook::{BeamConfig, Codebook, SearchSequence};
use crate::error::{Error, Result};
use crate::geometry::{Environment, Point2D};
use crate::radio::LinkBudget;
use crate::rendezvous::{LinkEvaluator, MtModel, RendezvousResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbEntry {
    pub nominal_pos: Point2D,
    pub config: BeamConfig,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeoContextDb {
    entries: Vec<DbEntry>,
}

impl GeoContextDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[DbEntry] {
        &self.entries
    }

    pub fn insert(&mut self, nominal_pos: Point2D, config: BeamConfig) {
        self.entries.push(DbEntry { nominal_pos, config });
    }

    /// Candidate configurations within `range_m` of `p`, nearest first
    /// (ties keep insertion order), deduplicated at the nearest entry.
    /// A zero range disables the database.
    pub fn query(&self, p: Point2D, range_m: f64) -> Vec<BeamConfig> {
        if range_m <= 0.0 {
            return Vec::new();
        }
        let mut hits: Vec<(f64, usize)> = self
            .entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let d = e.nominal_pos.distance(p);
                (d <= range_m).then_some((d, i))
            })
            .collect();
        // stable sort keeps insertion order on equal distances
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut seen = HashSet::with_capacity(hits.len());
        hits.into_iter()
            .map(|(_, i)| self.entries[i].config)
            .filter(|c| seen.insert(*c))
            .collect()
    }

    /// Writes one `x,y,width_deg,dir_index` record per line.
    pub fn save(&self, path: &Path, codebook: &Codebook) -> Result<()> {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.nominal_pos.x,
                e.nominal_pos.y,
                codebook.width_deg(e.config.level),
                e.config.dir
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, codebook: &Codebook) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, codebook)
    }

    pub fn parse(text: &str, codebook: &Codebook) -> Result<Self> {
        let mut db = Self::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::ConfigLine {
                line: n + 1,
                msg: format!("db record: {msg}"),
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(bad("expected x,y,width_deg,dir_index"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("not a number: {s}")));
            let (x, y, w) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
            let dir: usize = fields[3].parse().map_err(|_| bad("bad direction index"))?;
            let level = codebook
                .level_of_width(w)
                .ok_or_else(|| bad(&format!("width {w} not in codebook")))?;
            let config = BeamConfig::new(level, dir);
            if !codebook.is_valid(config) {
                return Err(bad("direction index out of range"));
            }
            db.insert(Point2D::new(x, y), config);
        }
        Ok(db)
    }
}

/// Outcome of one database-assisted discovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbDiscovery {
    pub result: RendezvousResult,
    /// Number of database candidates tried ahead of the fallback sequence.
    pub candidates: usize,
}

/// Effective search order: database candidates, then the fallback sequence
/// minus anything already proposed.
pub fn effective_sequence(candidates: &[BeamConfig], fallback: &SearchSequence) -> SearchSequence {
    let tried: HashSet<BeamConfig> = candidates.iter().copied().collect();
    let mut configs = candidates.to_vec();
    configs.extend(fallback.configs().iter().filter(|c| !tried.contains(c)));
    SearchSequence::from_unique(configs)
}

/// Tries the database candidates for `nominal` first and falls back to
/// `fallback`; on success the discovered configuration is recorded.
#[allow(clippy::too_many_arguments)]
pub fn db_assisted_discovery(
    env: &Environment,
    link: &LinkBudget,
    codebook: &Codebook,
    db: &mut GeoContextDb,
    range_m: f64,
    nominal: Point2D,
    fallback: &SearchSequence,
    mt_pos: Point2D,
    mt: MtModel,
) -> DbDiscovery {
    let candidates = db.query(nominal, range_m);
    let seq = effective_sequence(&candidates, fallback);
    let eval = LinkEvaluator::new(env, link, codebook, env.bs_pos(), mt_pos, mt);
    let mut result = eval.run(seq.configs());
    if let Some(c) = result.config {
        result.via_db = result.bs_switches <= candidates.len();
        db.insert(nominal, c);
    }
    DbDiscovery {
        result,
        candidates: candidates.len(),
    }
}
