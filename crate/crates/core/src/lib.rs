//! Multi-target regression toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`tabular`] holds the [`Dataset`] type, CSV ingestion, Kennard–Stone
//!   splitting and auto-scaling.
//! * [`learners`] provides the base regressors (random forest and
//!   epsilon-SVR with linear or RBF kernel) behind one train/predict surface.
//! * [`mtr`] implements the multi-target methods: ST, SST, ERC, MOTC, DRS,
//!   MTAS and MTSG, plus single-target stacked generalisation.
//! * [`metrics`] computes RMSE, RPT, aRRMSE, RPD and Pearson correlations.
//! * [`experiment`] runs a configured method grid end to end and renders
//!   the comparison tables.

pub mod error;
pub mod experiment;
pub mod learners;
pub mod metrics;
pub mod mtr;
pub mod tabular;

pub use error::{Error, Result};
pub use learners::{LearnerKind, LearnerSpec, RegressionModel};
pub use mtr::{Method, MtrMethodSpec, MultiTargetModel, PredictionMatrix};
pub use tabular::Dataset;
