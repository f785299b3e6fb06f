//! BS beam codebook and the search-sequence generators.
//!
//! A codebook is a list of width levels, widest first. Level `l` of width
//! `w` degrees has `360 / w` non-overlapping directions; direction `d`
//! spans `[d·w, (d+1)·w)` degrees and points at `(d + 0.5)·w`.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::radio::LinkBudget;

/// Widths (degrees) of the default 280-entry codebook.
pub const DEFAULT_WIDTHS_DEG: [f64; 9] = [360.0, 120.0, 90.0, 45.0, 30.0, 15.0, 10.0, 5.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeamConfig {
    pub level: usize,
    pub dir: usize,
}

impl BeamConfig {
    pub const fn new(level: usize, dir: usize) -> Self {
        Self { level, dir }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthLevel {
    pub width_deg: f64,
    pub directions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    levels: Vec<WidthLevel>,
    offsets: Vec<usize>,
    total: usize,
}

impl Default for Codebook {
    fn default() -> Self {
        Self::new(&DEFAULT_WIDTHS_DEG).expect("default widths divide 360")
    }
}

impl Codebook {
    /// Builds a codebook from beam widths in degrees, in any order.
    pub fn new(widths_deg: &[f64]) -> Result<Self> {
        if widths_deg.is_empty() {
            return Err(Error::Codebook("no beam widths given".into()));
        }
        let mut levels = Vec::with_capacity(widths_deg.len());
        for &w in widths_deg {
            if !(w > 0.0 && w <= 360.0) {
                return Err(Error::Codebook(format!("width {w} outside (0, 360]")));
            }
            let n = 360.0 / w;
            let rounded = n.round();
            if (n - rounded).abs() > 1e-9 {
                return Err(Error::Codebook(format!("width {w} does not divide 360")));
            }
            levels.push(WidthLevel {
                width_deg: w,
                directions: rounded as usize,
            });
        }
        levels.sort_by(|a, b| b.width_deg.total_cmp(&a.width_deg));
        if levels.windows(2).any(|p| p[0].directions == p[1].directions) {
            return Err(Error::Codebook("duplicate beam width".into()));
        }
        let mut offsets = Vec::with_capacity(levels.len());
        let mut total = 0;
        for l in &levels {
            offsets.push(total);
            total += l.directions;
        }
        Ok(Self { levels, offsets, total })
    }

    pub fn levels(&self) -> &[WidthLevel] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn narrowest(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn total_configs(&self) -> usize {
        self.total
    }

    pub fn directions(&self, level: usize) -> usize {
        self.levels[level].directions
    }

    pub fn width_deg(&self, level: usize) -> f64 {
        self.levels[level].width_deg
    }

    pub fn width_rad(&self, level: usize) -> f64 {
        self.levels[level].width_deg.to_radians()
    }

    pub fn level_of_width(&self, width_deg: f64) -> Option<usize> {
        self.levels
            .iter()
            .position(|l| (l.width_deg - width_deg).abs() < 1e-9)
    }

    pub fn is_valid(&self, c: BeamConfig) -> bool {
        c.level < self.levels.len() && c.dir < self.levels[c.level].directions
    }

    /// Dense index in `[0, total_configs)`.
    pub fn index_of(&self, c: BeamConfig) -> usize {
        self.offsets[c.level] + c.dir
    }

    pub fn config_at(&self, index: usize) -> BeamConfig {
        let level = self.offsets.partition_point(|&o| o <= index) - 1;
        BeamConfig::new(level, index - self.offsets[level])
    }

    /// All configurations, level by level.
    pub fn configs(&self) -> impl Iterator<Item = BeamConfig> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(l, lv)| (0..lv.directions).map(move |d| BeamConfig::new(l, d)))
    }

    /// Sector start in degrees; exact for integer widths.
    pub fn start_deg(&self, c: BeamConfig) -> f64 {
        c.dir as f64 * self.levels[c.level].width_deg
    }

    pub fn boresight_deg(&self, c: BeamConfig) -> f64 {
        (c.dir as f64 + 0.5) * self.levels[c.level].width_deg
    }

    pub fn boresight_rad(&self, c: BeamConfig) -> f64 {
        self.boresight_deg(c).to_radians()
    }

    /// Direction of `level` whose sector contains `pos` seen from `bs_pos`.
    pub fn covering_dir(&self, level: usize, pos: Point2D, bs_pos: Point2D) -> usize {
        if pos == bs_pos {
            return 0;
        }
        self.dir_for_angle_deg(level, bs_pos.bearing_to(pos).to_degrees())
    }

    fn dir_for_angle_deg(&self, level: usize, angle_deg: f64) -> usize {
        let lv = &self.levels[level];
        let a = angle_deg.rem_euclid(360.0);
        ((a / lv.width_deg).floor() as usize).min(lv.directions - 1)
    }
}

impl fmt::Display for BeamConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.dir)
    }
}

/// Ordered list of BS configurations, each at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSequence {
    configs: Vec<BeamConfig>,
}

impl SearchSequence {
    pub fn new(configs: Vec<BeamConfig>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(configs.len());
        if let Some(dup) = configs.iter().find(|c| !seen.insert(**c)) {
            return Err(Error::Parameter(format!("duplicate configuration {dup} in sequence")));
        }
        Ok(Self { configs })
    }

    pub(crate) fn from_unique(configs: Vec<BeamConfig>) -> Self {
        debug_assert!(Self::new(configs.clone()).is_ok());
        Self { configs }
    }

    pub fn configs(&self) -> &[BeamConfig] {
        &self.configs
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn into_inner(self) -> Vec<BeamConfig> {
        self.configs
    }

    /// CSV lines `step,width_deg,dir_index` with header.
    pub fn to_csv(&self, codebook: &Codebook) -> String {
        let mut out = String::from("step,width_deg,dir_index\n");
        for (i, c) in self.configs.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i, codebook.width_deg(c.level), c.dir));
        }
        out
    }
}

/// Per-level perfectly-aligned reach, used to pick the initial width.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRanges {
    ranges: Vec<f64>,
}

impl LevelRanges {
    pub fn new(codebook: &Codebook, link: &LinkBudget, mt_width_rad: f64) -> Self {
        let ranges = (0..codebook.level_count())
            .map(|l| link.max_aligned_range(codebook.width_rad(l), mt_width_rad))
            .collect();
        Self { ranges }
    }

    pub fn range(&self, level: usize) -> f64 {
        self.ranges[level]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.ranges
    }

    /// Widest level that reaches `distance`, or the narrowest if none does.
    pub fn initial_level(&self, distance: f64) -> usize {
        self.ranges
            .iter()
            .position(|&r| r >= distance)
            .unwrap_or(self.ranges.len() - 1)
    }
}

/// Levels from `w0` down to the narrowest, then the wider ones widest-first.
fn level_order(codebook: &Codebook, w0: usize) -> impl Iterator<Item = usize> {
    (w0..codebook.level_count()).chain(0..w0)
}

/// Uniform random permutation of every configuration.
pub fn seq_random<R: Rng + ?Sized>(codebook: &Codebook, rng: &mut R) -> SearchSequence {
    let mut all: Vec<BeamConfig> = codebook.configs().collect();
    all.shuffle(rng);
    SearchSequence::from_unique(all)
}

/// Circular sweep of the narrowest level starting at the beam covering `nominal`.
pub fn seq_sls(codebook: &Codebook, nominal: Point2D, bs_pos: Point2D) -> SearchSequence {
    let level = codebook.narrowest();
    let n = codebook.directions(level);
    let d0 = codebook.covering_dir(level, nominal, bs_pos);
    SearchSequence::from_unique((0..n).map(|k| BeamConfig::new(level, (d0 + k) % n)).collect())
}

/// Dynamic sweep: full circular sweeps from the widest reaching level down to
/// the narrowest, then the remaining wider levels.
pub fn seq_dsls(codebook: &Codebook, ranges: &LevelRanges, nominal: Point2D, bs_pos: Point2D) -> SearchSequence {
    let w0 = ranges.initial_level(nominal.distance(bs_pos));
    let mut out = Vec::with_capacity(codebook.total_configs());
    for level in level_order(codebook, w0) {
        let n = codebook.directions(level);
        let d0 = codebook.covering_dir(level, nominal, bs_pos);
        out.extend((0..n).map(|k| BeamConfig::new(level, (d0 + k) % n)));
    }
    SearchSequence::from_unique(out)
}

/// Alternating offsets `0, +1, -1, +2, -2, ...`; clockwise-first tie-break
/// is fixed here (positive index step first).
fn alternating(n: usize) -> impl Iterator<Item = isize> {
    let n = n as isize;
    std::iter::once(0).chain((1..=n).flat_map(|k| [k, -k]))
}

/// Sector index in `[0, n)` of an angle in degrees.
pub fn edp_sector_of(angle_deg: f64, n_sectors: usize) -> usize {
    let width = 360.0 / n_sectors as f64;
    ((angle_deg.rem_euclid(360.0) / width).floor() as usize).min(n_sectors - 1)
}

/// Enhanced discovery: the circle is split into `n_sectors`; the sector
/// holding the nominal position is explored first, beam by beam alternating
/// around the anchor direction and narrowing the width, then the other
/// sectors in alternating order, each anchored on the rotated first-sector
/// anchor. A beam belongs to the sector holding its boresight.
pub fn seq_edp(
    codebook: &Codebook,
    ranges: &LevelRanges,
    nominal: Point2D,
    bs_pos: Point2D,
    n_sectors: usize,
) -> Result<SearchSequence> {
    if n_sectors < 1 {
        return Err(Error::Parameter("EDP needs at least one sector".into()));
    }
    let w0 = ranges.initial_level(nominal.distance(bs_pos));
    let sector_w = 360.0 / n_sectors as f64;
    let nominal_deg = if nominal == bs_pos {
        0.0
    } else {
        bs_pos.bearing_to(nominal).to_degrees()
    };
    let first = edp_sector_of(nominal_deg, n_sectors);

    // member counts per (level, sector), so each sweep stops once complete
    let mut members = vec![vec![0usize; n_sectors]; codebook.level_count()];
    for c in codebook.configs() {
        members[c.level][edp_sector_of(codebook.boresight_deg(c), n_sectors)] += 1;
    }
    let anchors: Vec<usize> = (0..codebook.level_count())
        .map(|l| codebook.covering_dir(l, nominal, bs_pos))
        .collect();

    let mut visited_sectors = vec![false; n_sectors];
    let mut out = Vec::with_capacity(codebook.total_configs());
    for k in alternating(n_sectors) {
        let sector = (first as isize + k).rem_euclid(n_sectors as isize) as usize;
        if visited_sectors[sector] {
            continue;
        }
        visited_sectors[sector] = true;
        for level in level_order(codebook, w0) {
            let want = members[level][sector];
            if want == 0 {
                continue;
            }
            let n = codebook.directions(level);
            let rotated = codebook.boresight_deg(BeamConfig::new(level, anchors[level])) + k as f64 * sector_w;
            let anchor = codebook.dir_for_angle_deg(level, rotated);
            let mut taken = 0;
            let mut seen = vec![false; n];
            for off in alternating(n) {
                let dir = (anchor as isize + off).rem_euclid(n as isize) as usize;
                if seen[dir] {
                    continue;
                }
                seen[dir] = true;
                let c = BeamConfig::new(level, dir);
                if edp_sector_of(codebook.boresight_deg(c), n_sectors) == sector {
                    out.push(c);
                    taken += 1;
                    if taken == want {
                        break;
                    }
                }
            }
        }
        if visited_sectors.iter().all(|&v| v) {
            break;
        }
    }
    Ok(SearchSequence::from_unique(out))
}

/// BS search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Random,
    Sls,
    Dsls,
    Edp { sectors: usize },
}

impl Algorithm {
    pub fn sequence<R: Rng + ?Sized>(
        &self,
        codebook: &Codebook,
        ranges: &LevelRanges,
        nominal: Point2D,
        bs_pos: Point2D,
        rng: &mut R,
    ) -> Result<SearchSequence> {
        Ok(match *self {
            Algorithm::Random => seq_random(codebook, rng),
            Algorithm::Sls => seq_sls(codebook, nominal, bs_pos),
            Algorithm::Dsls => seq_dsls(codebook, ranges, nominal, bs_pos),
            Algorithm::Edp { sectors } => seq_edp(codebook, ranges, nominal, bs_pos, sectors)?,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Algorithm::Random => "random".into(),
            Algorithm::Sls => "sls".into(),
            Algorithm::Dsls => "dsls".into(),
            Algorithm::Edp { sectors } => format!("edp{sectors}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at_angle(deg: f64, dist: f64) -> Point2D {
        Point2D::new(0.0, 0.0).polar_offset(dist, deg.to_radians())
    }

    fn default_ranges(cb: &Codebook) -> LevelRanges {
        LevelRanges::new(cb, &LinkBudget::default(), 30f64.to_radians())
    }

    #[test]
    fn default_codebook_has_280_configs() {
        let cb = Codebook::default();
        assert_eq!(cb.total_configs(), 280);
        let counts: Vec<usize> = cb.levels().iter().map(|l| l.directions).collect();
        assert_eq!(counts, vec![1, 3, 4, 8, 12, 24, 36, 72, 120]);
    }

    #[test]
    fn small_codebooks() {
        assert_eq!(Codebook::new(&[360.0]).unwrap().total_configs(), 1);
        assert_eq!(Codebook::new(&[45.0, 90.0]).unwrap().total_configs(), 12);
        assert!(Codebook::new(&[7.0]).is_err());
        assert!(Codebook::new(&[]).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let cb = Codebook::default();
        for (i, c) in cb.configs().enumerate() {
            assert_eq!(cb.index_of(c), i);
            assert_eq!(cb.config_at(i), c);
        }
    }

    #[test]
    fn covering_dir_cases() {
        let cb = Codebook::default();
        let bs = Point2D::new(0.0, 0.0);
        let narrow = cb.narrowest();
        assert_eq!(cb.covering_dir(narrow, at_angle(100.0, 50.0), bs), 33);
        assert_eq!(cb.covering_dir(narrow, at_angle(0.0, 50.0), bs), 0);
        assert_eq!(cb.covering_dir(3, at_angle(0.0, 50.0), bs), 0);
        assert_eq!(cb.covering_dir(narrow, bs, bs), 0);
    }

    #[test]
    fn random_sequences() {
        let cb = Codebook::default();
        let s = seq_random(&cb, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(s.len(), 280);
        let t = seq_random(&cb, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(s, t);
        let single = Codebook::new(&[360.0]).unwrap();
        let s = seq_random(&single, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(s.configs(), &[BeamConfig::new(0, 0)]);
    }

    #[test]
    fn sls_sweeps_from_covering_beam() {
        let cb = Codebook::default();
        let s = seq_sls(&cb, at_angle(100.0, 80.0), Point2D::default());
        assert_eq!(s.len(), 120);
        let dirs: Vec<usize> = s.configs().iter().map(|c| c.dir).collect();
        let expect: Vec<usize> = (33..120).chain(0..33).collect();
        assert_eq!(dirs, expect);
        let single = Codebook::new(&[360.0]).unwrap();
        assert_eq!(seq_sls(&single, at_angle(10.0, 5.0), Point2D::default()).len(), 1);
    }

    #[test]
    fn range_table_matches_link_budget() {
        let cb = Codebook::default();
        let r = default_ranges(&cb);
        // 360: ~77.3, 120: ~196, 90: ~250, 45: ~450
        assert!((r.range(0) - 77.3).abs() < 0.5);
        assert!((r.range(2) - 250.0).abs() < 2.0);
        assert!((r.range(3) - 450.0).abs() < 5.0);
        assert_eq!(r.initial_level(60.0), 0);
        assert_eq!(r.initial_level(300.0), 3);
        assert_eq!(r.initial_level(1e6), cb.narrowest());
    }

    #[test]
    fn dsls_level_order() {
        let cb = Codebook::default();
        let r = default_ranges(&cb);
        let s = seq_dsls(&cb, &r, at_angle(20.0, 60.0), Point2D::default());
        assert_eq!(s.len(), 280);
        assert_eq!(s.configs()[0], BeamConfig::new(0, 0));
        assert!(s.configs()[1..4].iter().all(|c| c.level == 1));

        let s = seq_dsls(&cb, &r, at_angle(20.0, 300.0), Point2D::default());
        let levels: Vec<usize> = s.configs().iter().map(|c| c.level).collect();
        let mut order: Vec<usize> = levels.clone();
        order.dedup();
        assert_eq!(order, vec![3, 4, 5, 6, 7, 8, 0, 1, 2]);
    }

    #[test]
    fn edp_small_example() {
        let cb = Codebook::new(&[90.0, 45.0]).unwrap();
        // far enough from nothing: both levels reach, w0 = widest
        let r = LevelRanges::new(&cb, &LinkBudget::default(), 30f64.to_radians());
        let s = seq_edp(&cb, &r, at_angle(30.0, 10.0), Point2D::default(), 2).unwrap();
        let got: Vec<(usize, usize)> = s.configs().iter().map(|c| (c.level, c.dir)).collect();
        // hand enumeration: sector [0,180) first, then [180,360) anchored on
        // the rotated anchors
        let expect = vec![(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (1, 3), (0, 2), (0, 3), (1, 4), (1, 5), (1, 6), (1, 7)];
        assert_eq!(got, expect);
    }

    #[test]
    fn edp_single_sector_alternates() {
        let cb = Codebook::new(&[90.0, 45.0]).unwrap();
        let r = LevelRanges::new(&cb, &LinkBudget::default(), 30f64.to_radians());
        let s = seq_edp(&cb, &r, at_angle(100.0, 10.0), Point2D::default(), 1).unwrap();
        let got: Vec<(usize, usize)> = s.configs().iter().map(|c| (c.level, c.dir)).collect();
        assert_eq!(
            got,
            vec![(0, 1), (0, 2), (0, 0), (0, 3), (1, 2), (1, 3), (1, 1), (1, 4), (1, 0), (1, 5), (1, 7), (1, 6)]
        );
        assert!(seq_edp(&cb, &r, at_angle(100.0, 10.0), Point2D::default(), 0).is_err());
    }

    #[test]
    fn edp_and_dsls_share_first_beam() {
        let cb = Codebook::default();
        let r = default_ranges(&cb);
        for (a, d) in [(10.0, 50.0), (100.0, 150.0), (250.0, 230.0), (359.0, 280.0)] {
            let p = at_angle(a, d);
            let e = seq_edp(&cb, &r, p, Point2D::default(), 1).unwrap();
            let s = seq_dsls(&cb, &r, p, Point2D::default());
            assert_eq!(e.configs()[0], s.configs()[0]);
        }
    }

    #[test]
    fn sequence_rejects_duplicates() {
        let c = BeamConfig::new(0, 0);
        assert!(SearchSequence::new(vec![c, c]).is_err());
    }

    #[test]
    fn csv_export() {
        let cb = Codebook::new(&[90.0]).unwrap();
        let s = seq_sls(&cb, at_angle(100.0, 5.0), Point2D::default());
        assert_eq!(s.to_csv(&cb), "step,width_deg,dir_index\n0,90,1\n1,90,2\n2,90,3\n3,90,0\n");
    }
}
