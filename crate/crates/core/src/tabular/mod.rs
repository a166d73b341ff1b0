//! Data model, CSV ingestion, train/test splitting and auto-scaling.

mod dataset;
mod kennard_stone;
mod scaling;

pub use dataset::{load_columns, load_csv, Dataset};
pub use kennard_stone::{kennard_stone_split, train_size, SplitIndices, SplitRole};
pub use scaling::{apply_autoscale, fit_autoscale, invert_autoscale, ScalingParams};
