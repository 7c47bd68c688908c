use serde::{Deserialize, Serialize};

use super::fft::fft_real;
use super::spectrum::Window;
use crate::error::{Error, Result};

/// Range of the regression below the peak frame.
pub const FIT_RANGE_DB: f64 = 40.0;
/// Minimum fall below the peak for a fit to be attempted.
pub const MIN_DECAY_DB: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(rename = "lambda_s")]
    pub lambda: f64,
    pub intercept: f64,
    #[serde(rename = "r2")]
    pub r_squared: f64,
    #[serde(rename = "band_center_hz")]
    pub band_center: f64,
}

/// Per-frame maximum magnitude within `band_center ± band_width / 2` of a
/// Hann-windowed short-time transform.
pub fn band_track(
    waveform: &[f64],
    sample_rate: u32,
    band_center: f64,
    band_width: f64,
    frame_s: f64,
    hop_s: f64,
) -> Result<Vec<(f64, f64)>> {
    let rate = sample_rate as f64;
    let lo = band_center - band_width / 2.0;
    let hi = band_center + band_width / 2.0;
    if !(band_width > 0.0 && lo >= 0.0 && hi < rate / 2.0) {
        return Err(Error::InvalidInput(format!(
            "band {lo}..{hi} Hz does not fit under Nyquist ({} Hz)",
            rate / 2.0
        )));
    }
    let frame = (frame_s * rate).round() as usize;
    let hop = (hop_s * rate).round() as usize;
    if frame < 16 || hop == 0 {
        return Err(Error::InvalidInput(format!(
            "frame {frame_s} s / hop {hop_s} s too short"
        )));
    }
    let frames = if waveform.len() >= frame {
        (waveform.len() - frame) / hop + 1
    } else {
        0
    };
    if frames < 8 {
        return Err(Error::InvalidInput(format!("only {frames} frames, need at least 8")));
    }
    let n = (2 * frame).next_power_of_two();
    let df = rate / n as f64;
    let k_lo = (lo / df).ceil() as usize;
    let k_hi = ((hi / df).floor() as usize).max(k_lo);
    let w = Window::Hann.coefficients(frame);
    let mut track = Vec::with_capacity(frames);
    let mut buf = vec![0.0; frame];
    for f in 0..frames {
        let start = f * hop;
        for (b, (s, c)) in buf.iter_mut().zip(waveform[start..start + frame].iter().zip(&w)) {
            *b = s * c;
        }
        let spec = fft_real(&buf, n);
        let mag = spec[k_lo..=k_hi].iter().map(|c| c.norm()).fold(0.0, f64::max);
        track.push((start as f64 / rate, mag));
    }
    Ok(track)
}

/// Least-squares line through `(t, ln magnitude)` of the band track,
/// from the peak frame to the first frame 40 dB below it.
pub fn fit_decay(
    waveform: &[f64],
    sample_rate: u32,
    band_center: f64,
    band_width: f64,
    frame_s: f64,
    hop_s: f64,
) -> Result<DecayFit> {
    let track = band_track(waveform, sample_rate, band_center, band_width, frame_s, hop_s)?;
    let (peak_at, peak) = track
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &(_, m))| if m > best.1 { (i, m) } else { best });
    let insufficient = Error::InsufficientDecay {
        band_center_hz: band_center,
    };
    if peak <= 0.0 {
        return Err(insufficient);
    }
    let min_after = track[peak_at..].iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if min_after > peak * 10f64.powf(-MIN_DECAY_DB / 20.0) {
        return Err(insufficient);
    }
    let floor = peak * 10f64.powf(-FIT_RANGE_DB / 20.0);
    let end = track[peak_at..]
        .iter()
        .position(|p| p.1 <= floor)
        .map_or(track.len(), |i| peak_at + i);
    let pts: Vec<(f64, f64)> = track[peak_at..end].iter().map(|&(t, m)| (t, m.ln())).collect();
    if pts.len() < 3 {
        return Err(insufficient);
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx, syy) = pts.iter().fold((0.0, 0.0, 0.0), |(a, b, c), &(t, y)| {
        (
            a + (t - mt) * (y - my),
            b + (t - mt) * (t - mt),
            c + (y - my) * (y - my),
        )
    });
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        lambda: -slope,
        intercept: my - slope * mt,
        r_squared,
        band_center,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn damped(f: f64, lambda: f64, secs: f64, amp: f64) -> Vec<f64> {
        (0..(secs * 44100.0) as usize)
            .map(|i| {
                let t = i as f64 / 44100.0;
                amp * (-lambda * t).exp() * (2.0 * PI * f * t).sin()
            })
            .collect()
    }

    #[test]
    fn recovers_decay_constant() {
        let fit = fit_decay(&damped(200.0, 2.02, 3.0, 0.9), 44100, 200.0, 20.0, 0.1, 0.02).unwrap();
        assert!((fit.lambda - 2.02).abs() / 2.02 < 0.02, "{fit:?}");
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn doubled_decay_doubles_fit() {
        let a = fit_decay(&damped(200.0, 2.02, 3.0, 0.9), 44100, 200.0, 20.0, 0.1, 0.02).unwrap();
        let b = fit_decay(&damped(200.0, 4.04, 3.0, 0.9), 44100, 200.0, 20.0, 0.1, 0.02).unwrap();
        assert!((b.lambda / a.lambda - 2.0).abs() < 0.02);
    }

    #[test]
    fn amplitude_scaling_leaves_lambda() {
        let x = damped(310.0, 3.3, 2.0, 0.9);
        let y: Vec<f64> = x.iter().map(|v| v * 0.01).collect();
        let a = fit_decay(&x, 44100, 310.0, 30.0, 0.05, 0.01).unwrap();
        let b = fit_decay(&y, 44100, 310.0, 30.0, 0.05, 0.01).unwrap();
        assert!((a.lambda - b.lambda).abs() < 1e-9);
    }

    #[test]
    fn steady_sine_is_insufficient() {
        let err = fit_decay(&damped(200.0, 0.0, 2.0, 0.5), 44100, 200.0, 20.0, 0.1, 0.02).unwrap_err();
        assert!(matches!(err, Error::InsufficientDecay { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn preconditions() {
        let x = damped(200.0, 2.0, 0.2, 0.5);
        assert!(fit_decay(&x, 44100, 200.0, 20.0, 0.1, 0.02).is_err());
        let x = damped(200.0, 2.0, 2.0, 0.5);
        assert!(fit_decay(&x, 44100, 22000.0, 400.0, 0.1, 0.02).is_err());
    }
}
