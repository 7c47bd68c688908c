use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid density profile: {0}")]
    InvalidProfile(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root bracketed near {near_hz:.6} Hz (m = {order}) did not converge in {iterations} bisections")]
    Convergence {
        order: u32,
        near_hz: f64,
        iterations: usize,
    },

    #[error("frequency ceiling {ceiling_hz:.6} Hz too low: found {found} of {wanted} roots for m = {order}")]
    InsufficientCeiling {
        order: u32,
        found: usize,
        wanted: usize,
        ceiling_hz: f64,
    },

    #[error("mode table was computed from a different profile")]
    ProfileMismatch,

    #[error("need at least {needed} frequencies, got {got}")]
    TooFewFrequencies { needed: usize, got: usize },

    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("mode at {frequency_hz:.3} Hz is at or above Nyquist ({nyquist_hz:.3} Hz)")]
    NyquistViolation { frequency_hz: f64, nyquist_hz: f64 },

    #[error("mode index {index} out of range for a table of {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("bad FFT size {0}: must be a power of two in [256, 2^20]")]
    BadSize(usize),

    #[error("need at least 2 peaks for harmonic grouping, got {0}")]
    TooFewPeaks(usize),

    #[error("signal never decays 10 dB below its peak in the {band_center_hz:.1} Hz band")]
    InsufficientDecay { band_center_hz: f64 },

    #[error("input is silent (peak amplitude {0:e})")]
    SilentInput(f64),

    #[error("stroke could not be classified")]
    Unclassifiable,

    #[error("impedance must be positive, got {0}")]
    NonPositiveImpedance(f64),

    #[error("layer {layer}: {source}")]
    Layer {
        layer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad data).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Convergence { .. }
            | Error::InsufficientCeiling { .. }
            | Error::InsufficientDecay { .. }
            | Error::Unclassifiable => true,
            Error::Layer { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
