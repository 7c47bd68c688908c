//! Loaded circular drum membranes: eigenmodes, inverse loading design,
//! modal stroke synthesis and spectral analysis of the rendered tones.

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod format;
pub mod harmonicity;
pub mod loading;
pub mod materials;
pub mod membrane;
pub mod synth;

pub use analysis::{analyze, AnalysisConfig, AnalysisReport};
pub use config::Bundle;
pub use error::{Error, Result};
pub use harmonicity::{CharacteristicBands, HarmonicAssessment};
pub use loading::{LayerStep, LayerTrace, OptimizationReport, SearchOptions, TwoRegionCandidate};
pub use materials::{MaterialSample, MaterialsReport};
pub use membrane::{Mode, ModeTable, RadialDensityProfile, Ring};
pub use synth::{Head, RenderSpec, StrokeName, StrokeTemplate};
