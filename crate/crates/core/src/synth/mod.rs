//! Stroke tones as sums of exponentially damped sinusoids.

mod wav;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use wav::{read_wav, write_wav};

use crate::error::{Error, Result};
use crate::membrane::ModeTable;

/// Largest render length in samples.
pub const MAX_RENDER_SAMPLES: f64 = (1u64 << 26) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrokeName {
    Dheem,
    Chappu,
    Nam,
    Araichappu,
    Dhi,
    Ta,
    Thom,
    Gumkki,
}

impl StrokeName {
    pub const ALL: [StrokeName; 8] = [
        StrokeName::Dheem,
        StrokeName::Chappu,
        StrokeName::Nam,
        StrokeName::Araichappu,
        StrokeName::Dhi,
        StrokeName::Ta,
        StrokeName::Thom,
        StrokeName::Gumkki,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrokeName::Dheem => "dheem",
            StrokeName::Chappu => "chappu",
            StrokeName::Nam => "nam",
            StrokeName::Araichappu => "araichappu",
            StrokeName::Dhi => "dhi",
            StrokeName::Ta => "ta",
            StrokeName::Thom => "thom",
            StrokeName::Gumkki => "gumkki",
        }
    }
}

impl std::fmt::Display for StrokeName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StrokeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown stroke {s}")))
    }
}

/// Which drum head a template is played on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// Treble head with the loading patch.
    #[default]
    Right,
    /// Bass head.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    /// Index into the mode table the template is rendered with.
    pub mode: usize,
    #[serde(rename = "amp")]
    pub amplitude: f64,
    #[serde(rename = "lambda_s")]
    pub decay_constant: f64,
    #[serde(default)]
    pub phase: f64,
    /// Linear frequency ramp in Hz per second.
    #[serde(default, rename = "glide_hz_per_s", skip_serializing_if = "Option::is_none")]
    pub glide: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBurst {
    #[serde(rename = "amp")]
    pub amplitude: f64,
    #[serde(rename = "dur_s")]
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeTemplate {
    pub name: StrokeName,
    #[serde(default)]
    pub head: Head,
    #[serde(default)]
    pub excitations: Vec<Excitation>,
    #[serde(default, rename = "noise", skip_serializing_if = "Option::is_none")]
    pub noise_burst: Option<NoiseBurst>,
}

impl StrokeTemplate {
    pub fn from_json(text: &str) -> Result<Self> {
        let template: Self = serde_json::from_str(text)?;
        template.validate()?;
        Ok(template)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("template serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.excitations.is_empty() && self.noise_burst.is_none() {
            return Err(Error::InvalidInput(format!(
                "template {} has neither excitations nor a noise burst",
                self.name
            )));
        }
        for e in &self.excitations {
            let ok = e.amplitude.is_finite()
                && e.amplitude >= 0.0
                && e.decay_constant.is_finite()
                && e.decay_constant >= 0.0
                && e.phase.is_finite()
                && e.glide.is_none_or(f64::is_finite);
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "template {}: bad excitation {e:?}",
                    self.name
                )));
            }
        }
        if let Some(n) = self.noise_burst {
            if !(n.amplitude.is_finite() && n.amplitude >= 0.0 && n.duration_s > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "template {}: bad noise burst {n:?}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub sample_rate: u32,
    pub duration_s: f64,
    pub peak_amplitude: f64,
    /// Seed of the noise-burst generator.
    pub seed: u64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            sample_rate: 44100,
            duration_s: 3.0,
            peak_amplitude: 0.9,
            seed: 42,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate < 8000 {
            return Err(Error::InvalidInput(format!(
                "sample rate {} below 8000 Hz",
                self.sample_rate
            )));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if self.duration_s * self.sample_rate as f64 > MAX_RENDER_SAMPLES {
            return Err(Error::InvalidInput("render longer than 2^26 samples".into()));
        }
        if !(self.peak_amplitude > 0.0 && self.peak_amplitude <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "peak amplitude must lie in (0, 1], got {}",
                self.peak_amplitude
            )));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate as f64).round() as usize
    }
}

/// Renders `template` on `modes`, scaled so that the largest sample
/// magnitude equals `spec.peak_amplitude`.
pub fn render_stroke(modes: &ModeTable, template: &StrokeTemplate, spec: &RenderSpec) -> Result<Vec<f64>> {
    let mut samples = render_unnormalized(modes, template, spec)?;
    let peak = samples.iter().fold(0.0_f64, |acc, s| acc.max(s.abs()));
    if peak > 0.0 {
        let gain = spec.peak_amplitude / peak;
        for s in samples.iter_mut() {
            *s *= gain;
        }
    }
    Ok(samples)
}

/// `Σ a_i e^{−λ_i t} sin(2π f_i t + φ_i)` plus the optional noise burst,
/// before peak normalization.
pub fn render_unnormalized(modes: &ModeTable, template: &StrokeTemplate, spec: &RenderSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    template.validate()?;
    let rate = spec.sample_rate as f64;
    let nyquist = rate / 2.0;
    let n = spec.sample_count();
    let table = modes.modes();

    let mut partials = Vec::with_capacity(template.excitations.len());
    for e in &template.excitations {
        let mode = table.get(e.mode).ok_or(Error::IndexOutOfRange {
            index: e.mode,
            len: table.len(),
        })?;
        let glide = e.glide.unwrap_or(0.0);
        let f_start = mode.frequency_hz;
        let f_end = f_start + glide * spec.duration_s;
        for f in [f_start, f_end] {
            if !(f < nyquist) {
                return Err(Error::NyquistViolation {
                    frequency_hz: f,
                    nyquist_hz: nyquist,
                });
            }
        }
        if f_end <= 0.0 {
            return Err(Error::NonPositiveFrequency(f_end));
        }
        partials.push((f_start, glide, *e));
    }

    let mut out = vec![0.0; n];
    for (f, glide, e) in partials {
        if e.amplitude == 0.0 {
            continue;
        }
        for (i, s) in out.iter_mut().enumerate() {
            let t = i as f64 / rate;
            let phase = 2.0 * PI * (f * t + 0.5 * glide * t * t) + e.phase;
            *s += e.amplitude * (-e.decay_constant * t).exp() * phase.sin();
        }
    }
    if let Some(noise) = template.noise_burst {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let len = ((noise.duration_s * rate).round() as usize).min(n);
        for (i, s) in out.iter_mut().take(len).enumerate() {
            let taper = 1.0 - i as f64 / len as f64;
            *s += noise.amplitude * taper * rng.gen_range(-1.0..1.0);
        }
    }
    Ok(out)
}

/// Annular filling between the drum-head layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnularKind {
    /// Radial strips: damp the axisymmetric (nodal-circle) modes.
    Kucchi,
    /// Distributed particles: damp the modes with nodal diameters.
    Thool,
}

/// Scales the amplitudes of the mode family that `kind` damps by
/// `suppression`; the other family and the noise burst are untouched.
pub fn annular_filter(
    template: &StrokeTemplate,
    modes: &ModeTable,
    kind: AnnularKind,
    suppression: f64,
) -> Result<StrokeTemplate> {
    if !(0.0..=1.0).contains(&suppression) {
        return Err(Error::InvalidInput(format!(
            "suppression must lie in [0, 1], got {suppression}"
        )));
    }
    let table = modes.modes();
    let mut out = template.clone();
    for e in out.excitations.iter_mut() {
        let mode = table.get(e.mode).ok_or(Error::IndexOutOfRange {
            index: e.mode,
            len: table.len(),
        })?;
        let damped = match kind {
            AnnularKind::Kucchi => mode.m == 0,
            AnnularKind::Thool => mode.m > 0,
        };
        if damped {
            e.amplitude *= suppression;
        }
    }
    Ok(out)
}
