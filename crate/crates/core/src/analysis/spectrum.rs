use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::fft::fft_real;
use crate::error::{Error, Result};
use crate::format::sig9;

pub const MIN_FFT_SIZE: usize = 256;
pub const MAX_FFT_SIZE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Rect,
}

impl Window {
    /// Window coefficients of length `len` (periodic form for Hann).
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
                .collect(),
        }
    }
}

/// One-sided magnitude spectrum: bins `0..=fft_size/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub window: Window,
    pub fft_size: usize,
    pub sample_rate: u32,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.sample_rate as f64 / self.fft_size as f64
    }

    /// `(1/N) Σ |X_k|²` over the full two-sided transform.
    pub fn parseval_energy(&self) -> f64 {
        let last = self.magnitudes.len() - 1;
        let sum: f64 = self
            .magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| if k == 0 || k == last { m * m } else { 2.0 * m * m })
            .sum();
        sum / self.fft_size as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency_hz,magnitude\n");
        for (f, m) in self.bin_frequencies.iter().zip(&self.magnitudes) {
            out.push_str(&format!("{},{}\n", sig9(*f), sig9(*m)));
        }
        out
    }
}

/// The window spans the first `min(len, fft_size)` samples; the remainder
/// of the frame is zero padding.
pub fn compute_spectrum(waveform: &[f64], sample_rate: u32, fft_size: usize, window: Window) -> Result<Spectrum> {
    if !fft_size.is_power_of_two() || !(MIN_FFT_SIZE..=MAX_FFT_SIZE).contains(&fft_size) {
        return Err(Error::BadSize(fft_size));
    }
    let used = waveform.len().min(fft_size);
    let w = window.coefficients(used);
    let framed: Vec<f64> = waveform[..used].iter().zip(&w).map(|(s, c)| s * c).collect();
    let transform = fft_real(&framed, fft_size);
    let bins = fft_size / 2 + 1;
    let df = sample_rate as f64 / fft_size as f64;
    Ok(Spectrum {
        bin_frequencies: (0..bins).map(|i| i as f64 * df).collect(),
        magnitudes: transform[..bins].iter().map(|c| c.norm()).collect(),
        window,
        fft_size,
        sample_rate,
    })
}
