//! Multi-target regression methods over the base learners.
//!
//! | method | structure |
//! |--------|-----------|
//! | ST   | one independent model per target |
//! | SST  | ST, then one meta-model per target on `[x ‖ ŷ]` |
//! | DRS  | SST stacking repeated for a fixed number of layers |
//! | ERC  | randomly ordered regressor chains, averaged |
//! | MOTC | per-target dependency trees driven by target correlation |
//! | MTAS | several learners per target, relevance-filtered predictions appended to `x` |
//! | MTSG | several learners per target, relevance-filtered predictions *replace* `x` |
//!
//! All randomness derives from [`MtrMethodSpec::seed`] through
//! [`seeds::derive`], keyed by each model's role, so identical inputs give
//! identical models regardless of thread count.

mod bundle;
mod filter;
mod level0;
mod model;
pub mod seeds;
mod spec;
mod train;

pub use bundle::{ModelBundle, BUNDLE_FORMAT};
pub use filter::RelevanceFilter;
pub use level0::fit_with_predictions;
pub use model::{Chain, ColumnSource, MultiTargetModel, PredictionMatrix, Structure, TargetTree, TreeNode};
pub use spec::{FilterRule, Method, MtrMethodSpec, Stacking};
pub use train::{
    drs_train, erc_train, motc_train, mtas_train, mtsg_train, sg_train, sst_train, st_train, train,
    StackedGeneralization,
};
