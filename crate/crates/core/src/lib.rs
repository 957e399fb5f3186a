//! Structured-sparse cascaded channel estimation for RIS-assisted mmWave MIMO uplink.
//!
//! The crate covers the whole pipeline: angular channels with a shared row support
//! and (partially) shared column supports ([`channel`]), pilot observations through
//! random RIS phase schedules ([`measurement`]), UAMP-SBL based estimators and
//! baselines ([`estimators`]) and a seeded Monte-Carlo harness ([`harness`]).

pub mod channel;
pub mod dump;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod measurement;
pub mod numerics;
pub mod rng;

pub use channel::{assemble_channels, sample_paths, ChannelRealization, Dictionaries, Scenario, SystemConfig};
pub use error::{Error, Result};
pub use harness::{Algorithm, Axis, EstimatorSettings, SweepReport, TrialData, TrialResult};
pub use estimators::{CommonColumnMode, CommonSupport, EstimateResult, PrecisionMatrix, SblHyperparams};
pub use measurement::{MeasurementSet, RisSchedule};
pub use numerics::{ComplexMatrix, ComplexVector};
