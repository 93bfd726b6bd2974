//! File formats: annotation JSON, PNG masks, case/estimate/measurement
//! tables and feature tables.

pub mod annotations;
pub mod features;
pub mod mask;
pub mod tables;

pub use annotations::{load_annotations, save_annotations, AnnotatedImage, ImageMeta};
pub use features::{FeatureRow, FeatureTable, Level};
pub use mask::{load_mask, save_binary_mask, save_label_mask, LoadedMask, MaskMode};
pub use tables::{
    load_case_table, load_estimates, load_measurements, CaseRecord, Grade, RaterEstimate,
};
