//! BS/MT rendezvous loop.
//!
//! For every BS configuration in the search sequence the MT performs a full
//! circular sweep of its `M` beams, starting from its own start index. The
//! first (BS step, MT beam) pair whose beacon clears the detection threshold
//! ends the discovery.

use std::f64::consts::TAU;

use crate::codebook::{BeamConfig, Codebook, SearchSequence};
use crate::geometry::{wrap_pi, Environment, PathGeometry, PathKind, Point2D};
use crate::radio::{antenna_gain_db, LinkBudget};

/// Mobile terminal antenna: `beams` fixed, equally spaced beams rotated by
/// `orientation`, swept from `start_index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MtModel {
    pub beams: usize,
    pub orientation: f64,
    pub start_index: usize,
}

impl MtModel {
    pub fn new(beams: usize, orientation: f64, start_index: usize) -> Self {
        assert!(beams >= 1, "MT needs at least one beam");
        Self {
            beams,
            orientation,
            start_index: start_index % beams,
        }
    }

    pub fn beam_width(&self) -> f64 {
        TAU / self.beams as f64
    }

    pub fn boresight(&self, beam: usize) -> f64 {
        self.orientation + (beam as f64 + 0.5) * self.beam_width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RendezvousResult {
    pub success: bool,
    pub bs_switches: usize,
    pub mt_switches: usize,
    pub config: Option<BeamConfig>,
    pub mt_beam: Option<usize>,
    pub path_kind: Option<PathKind>,
    pub via_db: bool,
}

/// Precomputed per-user link terms: the propagation paths, their margins and
/// the MT gain of each beam along each path.
pub struct LinkEvaluator<'a> {
    codebook: &'a Codebook,
    paths: Vec<PathGeometry>,
    /// `tx_power - path_loss - threshold` per path.
    margins: Vec<f64>,
    /// `mt_gain[beam * paths + p]`
    mt_gain: Vec<f64>,
    mt: MtModel,
}

impl<'a> LinkEvaluator<'a> {
    pub fn new(
        env: &Environment,
        link: &LinkBudget,
        codebook: &'a Codebook,
        bs_pos: Point2D,
        mt_pos: Point2D,
        mt: MtModel,
    ) -> Self {
        let paths = env.single_bounce_paths(bs_pos, mt_pos);
        let margins = paths
            .iter()
            .map(|p| link.tx_power_dbm - link.path_loss_db(p) - link.threshold_dbm)
            .collect();
        let w = mt.beam_width();
        let mut mt_gain = Vec::with_capacity(mt.beams * paths.len());
        for beam in 0..mt.beams {
            let b = mt.boresight(beam);
            mt_gain.extend(paths.iter().map(|p| antenna_gain_db(w, wrap_pi(p.arrival_angle - b))));
        }
        Self {
            codebook,
            paths,
            margins,
            mt_gain,
            mt,
        }
    }

    pub fn paths(&self) -> &[PathGeometry] {
        &self.paths
    }

    /// Tries one BS configuration; returns the 0-based position within the
    /// MT round and the kind of the strongest detecting path.
    pub fn try_config(&self, config: BeamConfig) -> Option<(usize, usize, PathKind)> {
        if self.paths.is_empty() {
            return None;
        }
        let w = self.codebook.width_rad(config.level);
        let bore = self.codebook.boresight_rad(config);
        let bs_terms: Vec<f64> = self
            .paths
            .iter()
            .zip(&self.margins)
            .map(|(p, m)| m + antenna_gain_db(w, wrap_pi(p.departure_angle - bore)))
            .collect();
        let np = self.paths.len();
        for j in 0..self.mt.beams {
            let beam = (self.mt.start_index + j) % self.mt.beams;
            let gains = &self.mt_gain[beam * np..(beam + 1) * np];
            let mut best: Option<(f64, usize)> = None;
            for (p, (&bs, &g)) in bs_terms.iter().zip(gains).enumerate() {
                let v = bs + g;
                if v >= 0.0 && best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, p));
                }
            }
            if let Some((_, p)) = best {
                return Some((j, beam, self.paths[p].kind));
            }
        }
        None
    }

    /// Runs the sweep over `configs`.
    pub fn run(&self, configs: &[BeamConfig]) -> RendezvousResult {
        let m = self.mt.beams;
        for (i, &c) in configs.iter().enumerate() {
            if let Some((j, beam, kind)) = self.try_config(c) {
                return RendezvousResult {
                    success: true,
                    bs_switches: i + 1,
                    mt_switches: i * m + j + 1,
                    config: Some(c),
                    mt_beam: Some(beam),
                    path_kind: Some(kind),
                    via_db: false,
                };
            }
        }
        RendezvousResult {
            success: false,
            bs_switches: configs.len(),
            mt_switches: configs.len() * m,
            config: None,
            mt_beam: None,
            path_kind: None,
            via_db: false,
        }
    }
}

/// Runs the rendezvous between the BS at `bs_pos` following `seq` and the MT
/// at its true position `mt_pos`.
pub fn run_rendezvous(
    env: &Environment,
    link: &LinkBudget,
    codebook: &Codebook,
    seq: &SearchSequence,
    bs_pos: Point2D,
    mt_pos: Point2D,
    mt: MtModel,
) -> RendezvousResult {
    LinkEvaluator::new(env, link, codebook, bs_pos, mt_pos, mt).run(seq.configs())
}
