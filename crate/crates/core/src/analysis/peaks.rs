use serde::{Deserialize, Serialize};

use super::spectrum::Spectrum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    #[serde(rename = "hz")]
    pub frequency_hz: f64,
    #[serde(rename = "mag")]
    pub magnitude: f64,
    #[serde(rename = "prom_db")]
    pub prominence_db: f64,
}

/// Local maxima standing `min_prominence_db` above the median magnitude,
/// refined by a parabola through the log magnitudes of the three bins
/// around each maximum. Sorted by descending magnitude.
pub fn detect_peaks(spectrum: &Spectrum, min_prominence_db: f64, max_peaks: usize) -> Result<Vec<Peak>> {
    if !(min_prominence_db >= 3.0) {
        return Err(Error::InvalidInput(format!(
            "minimum prominence must be at least 3 dB, got {min_prominence_db}"
        )));
    }
    let mags = &spectrum.magnitudes;
    let mut sorted = mags.clone();
    sorted.sort_by(f64::total_cmp);
    let max = sorted.last().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    // an exactly-zero median (heavily padded clean tones) is replaced by a
    // floor far below any representable peak
    let floor = sorted[sorted.len() / 2].max(max * 1e-15);
    let threshold = floor * 10f64.powf(min_prominence_db / 20.0);
    let df = spectrum.bin_width();

    let mut peaks = Vec::new();
    for i in 1..mags.len().saturating_sub(1) {
        let m = mags[i];
        if !(m > mags[i - 1] && m >= mags[i + 1] && m >= threshold) {
            continue;
        }
        let ln = |v: f64| v.max(max * 1e-300).ln();
        let (a, b, c) = (ln(mags[i - 1]), ln(m), ln(mags[i + 1]));
        let curvature = a - 2.0 * b + c;
        let offset = if curvature < 0.0 {
            (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let magnitude = (b - 0.25 * (a - c) * offset).exp();
        peaks.push(Peak {
            frequency_hz: (i as f64 + offset) * df,
            magnitude,
            prominence_db: 20.0 * (magnitude / floor).log10(),
        });
    }
    peaks.sort_by(|x, y| {
        y.magnitude
            .total_cmp(&x.magnitude)
            .then(x.frequency_hz.total_cmp(&y.frequency_hz))
    });
    peaks.truncate(max_peaks);
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::analysis::spectrum::{compute_spectrum, Window};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tone(freqs: &[f64], n: usize, noise: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let t = i as f64 / 44100.0;
                freqs.iter().map(|f| (2.0 * PI * f * t).sin()).sum::<f64>() + noise * rng.gen_range(-1.0..1.0)
            })
            .collect()
    }

    #[test]
    fn silence_has_no_peaks() {
        let s = compute_spectrum(&vec![0.0; 4096], 44100, 4096, Window::Hann).unwrap();
        assert!(detect_peaks(&s, 12.0, 10).unwrap().is_empty());
    }

    #[test]
    fn rejects_low_threshold() {
        let s = compute_spectrum(&[0.0; 8], 44100, 256, Window::Hann).unwrap();
        assert!(detect_peaks(&s, 2.0, 10).is_err());
    }

    #[test]
    fn sine_at_440_6_within_a_thousandth() {
        // uniform noise of this width is 40 dB below the unit sine
        let noise = (3.0f64 * 0.5 * 1e-4).sqrt();
        let x = tone(&[440.6], 44100, noise, 11);
        let s = compute_spectrum(&x, 44100, 65536, Window::Hann).unwrap();
        let p = detect_peaks(&s, 12.0, 5).unwrap();
        assert!((p[0].frequency_hz - 440.6).abs() / 440.6 < 1e-3, "{:?}", p[0]);
        assert!(p[0].prominence_db >= 12.0);
    }

    #[test]
    fn resolves_two_sines_five_bins_apart() {
        let df = 44100.0 / 16384.0;
        let x = tone(&[1000.0, 1000.0 + 5.0 * df], 16384, 0.0, 0);
        let s = compute_spectrum(&x, 44100, 16384, Window::Hann).unwrap();
        let p = detect_peaks(&s, 12.0, 2).unwrap();
        assert_eq!(p.len(), 2);
        let mut f: Vec<f64> = p.iter().map(|p| p.frequency_hz).collect();
        f.sort_by(f64::total_cmp);
        assert!((f[0] - 1000.0).abs() < df / 2.0);
        assert!((f[1] - 1000.0 - 5.0 * df).abs() < df / 2.0);
    }

    #[test]
    fn sorted_and_truncated() {
        let x: Vec<f64> = (0..8192)
            .map(|i| {
                let t = i as f64 / 44100.0;
                (2.0 * PI * 300.0 * t).sin() + 0.5 * (2.0 * PI * 900.0 * t).sin() + 0.25 * (2.0 * PI * 1500.0 * t).sin()
            })
            .collect();
        let s = compute_spectrum(&x, 44100, 8192, Window::Hann).unwrap();
        let p = detect_peaks(&s, 12.0, 2).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0].frequency_hz - 300.0).abs() < 1.0);
        assert!((p[1].frequency_hz - 900.0).abs() < 1.0);
    }

    #[test]
    fn error_shrinks_with_fft_size() {
        let x = tone(&[523.37], 1 << 17, 0.0, 0);
        let mut last = f64::INFINITY;
        for bits in 12..=17 {
            let s = compute_spectrum(&x, 44100, 1 << bits, Window::Hann).unwrap();
            let err = (detect_peaks(&s, 12.0, 1).unwrap()[0].frequency_hz - 523.37).abs();
            assert!(err < last, "fft 2^{bits}: {err} vs {last}");
            last = err;
        }
    }
}
