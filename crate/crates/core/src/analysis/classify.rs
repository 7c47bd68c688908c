use serde::{Deserialize, Serialize};

use super::adsr::AdsrSegmentation;
use super::decay::DecayFit;
use super::harmonics::HarmonicGrouping;
use super::peaks::Peak;
use crate::error::{Error, Result};
use crate::synth::StrokeName;

/// Thresholds of the rule cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    /// A closed stroke has no peak at least this prominent.
    pub closed_prominence_db: f64,
    /// ... and a magnitude-spectrum flatness above this.
    pub closed_flatness: f64,
    /// Tonal labels need a dominant peak at least this prominent.
    pub tonal_prominence_db: f64,
    /// Decay constant (1/s) separating sustained chappu from damped dhi.
    pub slow_decay: f64,
    /// Attack centroid, in units of the comb fundamental, above which a
    /// third-harmonic stroke is araichappu rather than nam.
    pub centroid_ratio: f64,
    /// Relative drift of the dominant pitch that marks a gumkki.
    pub drift_threshold: f64,
    /// Dominant-to-fundamental ratio above which a label is refused.
    pub max_ratio_error: f64,
    /// Optional tonic (implied fundamental of the right head) in Hz.
    pub tonic_hz: Option<f64>,
    /// With a tonic, a dominant below this fraction of it is a thom.
    pub thom_tonic_fraction: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            closed_prominence_db: 12.0,
            closed_flatness: 0.5,
            tonal_prominence_db: 25.0,
            slow_decay: 5.0,
            centroid_ratio: 3.5,
            drift_threshold: 0.03,
            max_ratio_error: 0.1,
            tonic_hz: None,
            thom_tonic_fraction: 0.8,
        }
    }
}

/// Everything the cascade looks at.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeFeatures {
    pub peaks: Vec<Peak>,
    pub grouping: Option<HarmonicGrouping>,
    /// Geometric over arithmetic mean of the magnitude spectrum.
    pub flatness: f64,
    /// Fit in the band of the dominant peak.
    pub decay: Option<DecayFit>,
    pub adsr: Option<AdsrSegmentation>,
    /// Spectral centroid of the first 50 ms after onset.
    pub attack_centroid_hz: f64,
    /// Relative change of the dominant pitch between an early and a late window.
    pub pitch_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: StrokeName,
    pub confidence: f64,
}

/// Maps a margin to a confidence in `[0.5, 1]`.
fn margin(x: f64) -> f64 {
    0.5 + 0.5 * x.clamp(0.0, 1.0)
}

/// Transparent rule cascade over the extracted features.
pub fn classify_stroke(features: &StrokeFeatures, config: &ClassifierConfig) -> Result<Classification> {
    let label = |label, confidence: f64| {
        Ok(Classification {
            label,
            confidence: confidence.clamp(0.0, 1.0),
        })
    };
    let max_prom = features.peaks.iter().map(|p| p.prominence_db).fold(0.0, f64::max);

    if max_prom < config.closed_prominence_db && features.flatness > config.closed_flatness {
        let m = ((features.flatness - config.closed_flatness) / 0.3)
            .min((config.closed_prominence_db - max_prom) / config.closed_prominence_db);
        return label(StrokeName::Ta, margin(m));
    }
    let Some(dominant) = features.peaks.first() else {
        return Err(Error::Unclassifiable);
    };
    if dominant.prominence_db < config.tonal_prominence_db {
        return Err(Error::Unclassifiable);
    }
    if features.pitch_drift > config.drift_threshold {
        return label(
            StrokeName::Gumkki,
            margin((features.pitch_drift - config.drift_threshold) / config.drift_threshold),
        );
    }
    if let Some(tonic) = config.tonic_hz {
        let limit = config.thom_tonic_fraction * tonic;
        if dominant.frequency_hz <= limit {
            return label(StrokeName::Thom, margin((limit / dominant.frequency_hz).ln() / 0.1));
        }
    }
    let grouping = features.grouping.as_ref().ok_or(Error::Unclassifiable)?;
    let r = dominant.frequency_hz / grouping.fundamental_hz;

    // log distances to the ratio families, nearest first
    let mut families = [(1.0, 0), (1.07, 1), (2.0, 2), (3.0, 3)].map(|(t, id)| ((r / t).ln().abs(), id));
    families.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (d1, family) = families[0];
    let d2 = families[1].0;
    if d1 > config.max_ratio_error {
        return Err(Error::Unclassifiable);
    }
    let ratio_conf = 1.0 - d1 / (d1 + d2);

    match family {
        0 => label(StrokeName::Thom, ratio_conf),
        1 => label(StrokeName::Dheem, ratio_conf),
        2 => {
            let lambda = features.decay.map_or(0.0, |d| d.lambda);
            let m = (lambda.max(1e-3) / config.slow_decay).ln().abs() / std::f64::consts::LN_2;
            let name = if lambda < config.slow_decay {
                StrokeName::Chappu
            } else {
                StrokeName::Dhi
            };
            label(name, ratio_conf.min(margin(m)))
        }
        _ => {
            let c = features.attack_centroid_hz / grouping.fundamental_hz;
            let m = (c / config.centroid_ratio).ln().abs() / 0.2;
            let name = if c > config.centroid_ratio {
                StrokeName::Araichappu
            } else {
                StrokeName::Nam
            };
            label(name, ratio_conf.min(margin(m)))
        }
    }
}
