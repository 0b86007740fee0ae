//! Beam management trade-offs in Poisson cellular networks.
//!
//! The effective area spectral efficiency of a downlink where every BS splits
//! its azimuth into `2^n` beams is computed analytically from the coverage
//! probability of the typical MT and the time lost to beam reselections and
//! handovers. [`mc`] re-derives the same quantities by simulating explicit
//! PPP realizations.

pub mod ase;
pub mod cli;
pub mod error;
pub mod mc;
pub mod mobility;
pub mod model;
pub mod quadrature;
pub mod sinr;

pub use ase::{AseResult, Evaluator, Optimum, RateUnit, SweepGrid, SweepRow};
pub use error::{Error, Result};
pub use mobility::MobilityProfile;
pub use model::{
    beam_setting, config_from_deployment, Band, BeamSetting, Deployment, DerivedConstants, GainLaw,
    NetworkConfig, NoiseConvention,
};
pub use quadrature::Estimate;
pub use sinr::QuadratureSpec;
