//! Spectra, peaks, harmonic grouping, decay fits, envelope segmentation
//! and stroke classification of single-stroke recordings.

mod adsr;
mod classify;
mod decay;
pub mod fft;
mod harmonics;
mod peaks;
mod spectrum;

use serde::{Deserialize, Serialize};

pub use adsr::{segment_adsr, AdsrSegmentation};
pub use classify::{classify_stroke, Classification, ClassifierConfig, StrokeFeatures};
pub use decay::{band_track, fit_decay, DecayFit};
pub use harmonics::{
    group_harmonics, HarmonicGrouping, HarmonicMatch, ShiftedPeak, COMB_TOLERANCE, MAX_HARMONIC, SHIFT_TARGET,
};
pub use peaks::{detect_peaks, Peak};
pub use spectrum::{compute_spectrum, Spectrum, Window, MAX_FFT_SIZE, MIN_FFT_SIZE};

use crate::error::{Error, Result};
use crate::format::round_json;
use crate::harmonicity::{
    characteristic_verdicts_with, harmonicity_score, CharacteristicBands, CharacteristicRatioVerdict,
    HarmonicAssessment,
};

/// Length of the attack window used for the spectral centroid.
const ATTACK_WINDOW_S: f64 = 0.05;
/// Early and late windows (start offsets after onset, length) for pitch drift.
const DRIFT_WINDOWS_S: (f64, f64, f64) = (0.0, 0.4, 0.2);

/// Tunable settings of the analysis pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub fft_size: usize,
    pub window: Window,
    pub min_prominence_db: f64,
    pub max_peaks: usize,
    /// Peaks further than this below the strongest one are discarded
    /// (quantization products of 16-bit audio sit near -100 dB).
    pub dynamic_range_db: f64,
    pub f_search_hz: (f64, f64),
    pub decay_frame_s: f64,
    pub decay_hop_s: f64,
    /// Decay band width as a fraction of its centre frequency.
    pub decay_band_fraction: f64,
    pub rms_window_s: f64,
    pub bands: CharacteristicBands,
    pub classifier: ClassifierConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            fft_size: 1 << 16,
            window: Window::Hann,
            min_prominence_db: 12.0,
            max_peaks: 16,
            dynamic_range_db: 60.0,
            f_search_hz: (30.0, 1000.0),
            decay_frame_s: 0.1,
            decay_hop_s: 0.02,
            decay_band_fraction: 0.1,
            rms_window_s: 0.01,
            bands: CharacteristicBands::default(),
            classifier: ClassifierConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub peaks: Vec<Peak>,
    pub fundamental_hz: Option<f64>,
    pub shift_ratio: Option<f64>,
    pub harmonicity: Option<HarmonicAssessment>,
    pub verdicts: Vec<CharacteristicRatioVerdict>,
    pub decay: Option<DecayFit>,
    pub adsr: Option<AdsrSegmentation>,
    /// Stroke name, or `"unknown"`.
    pub label: String,
    pub confidence: f64,
}

impl AnalysisReport {
    /// Pretty JSON with floats rounded to 9 significant digits.
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        round_json(&mut value);
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    pub fn all_verdicts_pass(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }
}

fn flatness(spectrum: &Spectrum) -> f64 {
    let nyquist = spectrum.sample_rate as f64 / 2.0;
    let mags: Vec<f64> = spectrum
        .bin_frequencies
        .iter()
        .zip(&spectrum.magnitudes)
        .filter(|(f, _)| **f >= 20.0 && **f <= 0.9 * nyquist)
        .map(|(_, m)| *m)
        .collect();
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    if !(mean > 0.0) {
        return 0.0;
    }
    let tiny = mean * 1e-15;
    let log_mean = mags.iter().map(|m| m.max(tiny).ln()).sum::<f64>() / mags.len() as f64;
    log_mean.exp() / mean
}

fn segment(waveform: &[f64], start: usize, len: usize) -> &[f64] {
    let start = start.min(waveform.len());
    &waveform[start..(start + len).min(waveform.len())]
}

fn centroid(spectrum: &Spectrum) -> f64 {
    let (num, den) = spectrum
        .bin_frequencies
        .iter()
        .zip(&spectrum.magnitudes)
        .filter(|(f, _)| **f >= 20.0)
        .fold((0.0, 0.0), |(n, d), (f, m)| (n + f * m, d + m));
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Frequency of the strongest peak of `samples` within `[lo, hi]`.
fn strongest_in(samples: &[f64], sample_rate: u32, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let n = (4 * samples.len())
        .next_power_of_two()
        .clamp(MIN_FFT_SIZE, MAX_FFT_SIZE);
    let s = compute_spectrum(samples, sample_rate, n, Window::Hann).ok()?;
    let peaks = detect_peaks(&s, 3.0, 64).ok()?;
    peaks
        .into_iter()
        .find(|p| p.frequency_hz >= lo && p.frequency_hz <= hi)
        .map(|p| (p.frequency_hz, p.magnitude))
}

/// Computes the classifier inputs for one stroke.
pub fn extract_features(waveform: &[f64], sample_rate: u32, config: &AnalysisConfig) -> Result<StrokeFeatures> {
    let amplitude = waveform.iter().fold(0.0_f64, |a, s| a.max(s.abs()));
    if amplitude < adsr::SILENCE {
        return Err(Error::SilentInput(amplitude));
    }
    let rate = sample_rate as f64;
    let spectrum = compute_spectrum(waveform, sample_rate, config.fft_size, config.window)?;
    let mut peaks = detect_peaks(&spectrum, config.min_prominence_db, config.max_peaks)?;
    if let Some(top) = peaks.first().map(|p| p.magnitude) {
        let floor = top * 10f64.powf(-config.dynamic_range_db / 20.0);
        peaks.retain(|p| p.magnitude >= floor);
    }
    let grouping = group_harmonics(&peaks, config.f_search_hz, spectrum.bin_width() / 4.0).ok();

    let onset = waveform.iter().position(|s| s.abs() >= 0.01 * amplitude).unwrap_or(0);
    let attack = segment(waveform, onset, (ATTACK_WINDOW_S * rate) as usize);
    let attack_spectrum = compute_spectrum(
        attack,
        sample_rate,
        attack.len().next_power_of_two().clamp(MIN_FFT_SIZE, MAX_FFT_SIZE),
        Window::Hann,
    )?;

    let mut decay = None;
    let mut pitch_drift = 0.0;
    if let Some(dominant) = peaks.first() {
        let f = dominant.frequency_hz;
        let width = (config.decay_band_fraction * f).max(2.0 * rate / config.fft_size as f64);
        decay = fit_decay(
            waveform,
            sample_rate,
            f,
            width,
            config.decay_frame_s,
            config.decay_hop_s,
        )
        .ok();

        let (early_at, late_at, len) = DRIFT_WINDOWS_S;
        let len = (len * rate) as usize;
        let early = segment(waveform, onset + (early_at * rate) as usize, len);
        let late = segment(waveform, onset + (late_at * rate) as usize, len);
        if late.len() == len {
            if let Some((fe, me)) = strongest_in(early, sample_rate, 0.8 * f, 1.25 * f) {
                if let Some((fl, ml)) = strongest_in(late, sample_rate, 0.8 * fe, 1.25 * fe) {
                    if ml >= 1e-3 * me {
                        pitch_drift = (fl - fe).abs() / fe;
                    }
                }
            }
        }
    }

    Ok(StrokeFeatures {
        flatness: flatness(&spectrum),
        grouping,
        decay,
        adsr: segment_adsr(waveform, sample_rate, config.rms_window_s).ok(),
        attack_centroid_hz: centroid(&attack_spectrum),
        pitch_drift,
        peaks,
    })
}

/// Full pipeline: peaks, comb grouping, characteristic verdicts, decay,
/// envelope and classification.
pub fn analyze(waveform: &[f64], sample_rate: u32, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let features = extract_features(waveform, sample_rate, config)?;
    let classification = classify_stroke(&features, &config.classifier).ok();

    let mut verdicts = Vec::new();
    let mut harmonicity = None;
    if let Some(g) = &features.grouping {
        let chappu = g.harmonic_peak(&features.peaks, 2);
        let nam = g.harmonic_peak(&features.peaks, 3);
        if let (Some(s), Some(c), Some(n)) = (g.shifted, chappu, nam) {
            verdicts = characteristic_verdicts_with(s.frequency_hz, c.frequency_hz, n.frequency_hz, &config.bands)?;
        }
        let mut freqs: Vec<f64> = g
            .matched
            .iter()
            .map(|m| features.peaks[m.peak_index].frequency_hz)
            .collect();
        freqs.extend(g.shifted.map(|s| s.frequency_hz));
        harmonicity = harmonicity_score(&freqs, MAX_HARMONIC).ok();
    }

    Ok(AnalysisReport {
        fundamental_hz: features.grouping.as_ref().map(|g| g.fundamental_hz),
        shift_ratio: features.grouping.as_ref().and_then(|g| g.shifted).map(|s| s.ratio),
        harmonicity,
        verdicts,
        decay: features.decay,
        adsr: features.adsr,
        label: classification.map_or_else(|| "unknown".to_string(), |c| c.label.to_string()),
        confidence: classification.map_or(0.0, |c| c.confidence),
        peaks: features.peaks,
    })
}
