//! Cell discovery simulation for directional millimeter-wave links.
//!
//! A base station sweeps a multi-width beam codebook while a mobile terminal
//! sweeps its own beams; the crate provides the geometry and radio model, the
//! BS search strategies, a geo-located database of past discoveries, an
//! analytic model of the discovery delay, and the campaign harness.

pub mod analytic;
pub mod campaign;
pub mod codebook;
pub mod context_db;
pub mod error;
pub mod geometry;
pub mod output;
pub mod population;
pub mod radio;
pub mod rendezvous;
pub mod scenario;
pub mod stats;

pub use codebook::{Algorithm, BeamConfig, Codebook, LevelRanges, SearchSequence};
pub use context_db::{db_assisted_discovery, DbDiscovery, GeoContextDb};
pub use error::{Error, Result};
pub use geometry::{Environment, Obstacle, PathGeometry, PathKind, Point2D};
pub use radio::{antenna_gain_db, AntennaBeam, LinkBudget};
pub use rendezvous::{run_rendezvous, LinkEvaluator, MtModel, RendezvousResult};
pub use population::UserDistribution;
pub use scenario::ScenarioConfig;
pub use stats::{RunStats, Summary};
