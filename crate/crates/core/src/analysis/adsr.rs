use serde::{Deserialize, Serialize};

use super::spectrum::Window;
use crate::error::{Error, Result};

/// Envelope fraction of the peak that marks onset and the release floor.
pub const FLOOR_FRACTION: f64 = 0.01;
/// Plateau slope limit, in peak units per second.
pub const FLAT_SLOPE: f64 = 0.05;
/// Allowed ripple when matching envelope levels (peak and sustain entry/exit).
pub const LEVEL_TOLERANCE: f64 = 0.02;
/// Largest max/min ratio accepted within a plateau.
pub const PLATEAU_SPREAD: f64 = 1.1;
pub const SILENCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdsrSegmentation {
    pub attack_s: f64,
    pub decay_s: f64,
    pub sustain_level: f64,
    pub sustain_s: f64,
    pub release_s: f64,
}

/// Hann-weighted moving RMS sampled every `hop` samples; returns
/// `(time, rms)` with the time at the window centre.
fn envelope(waveform: &[f64], sample_rate: u32, window: usize, hop: usize) -> Vec<(f64, f64)> {
    let w = Window::Hann.coefficients(window);
    let norm: f64 = w.iter().sum();
    let half = window / 2;
    let mut out = Vec::new();
    let mut centre = 0;
    while centre < waveform.len() {
        let mut acc = 0.0;
        for (j, c) in w.iter().enumerate() {
            let idx = centre as isize + j as isize - half as isize;
            if idx >= 0 && (idx as usize) < waveform.len() {
                let s = waveform[idx as usize];
                acc += c * s * s;
            }
        }
        out.push((centre as f64 / sample_rate as f64, (acc / norm).sqrt()));
        centre += hop;
    }
    out
}

/// Segments the moving-RMS envelope into attack, decay, sustain and
/// release. The sustain plateau is the longest run after the peak where
/// the envelope slope stays under 5% of the peak per second; without one
/// the sustain is empty and decay runs straight to the 1% floor.
pub fn segment_adsr(waveform: &[f64], sample_rate: u32, rms_window_s: f64) -> Result<AdsrSegmentation> {
    if !(0.005..=0.1).contains(&rms_window_s) {
        return Err(Error::InvalidInput(format!(
            "rms window must lie in [0.005, 0.1] s, got {rms_window_s}"
        )));
    }
    let amplitude = waveform.iter().fold(0.0_f64, |a, s| a.max(s.abs()));
    if amplitude < SILENCE {
        return Err(Error::SilentInput(amplitude));
    }
    let window = ((rms_window_s * sample_rate as f64).round() as usize).max(4);
    let hop = (window / 8).max(1);
    let env = envelope(waveform, sample_rate, window, hop);
    let peak = env.iter().map(|e| e.1).fold(0.0, f64::max);
    let floor = FLOOR_FRACTION * peak;

    let onset = env.iter().position(|e| e.1 >= floor).unwrap_or(0);
    let peak_at = env
        .iter()
        .position(|e| e.1 >= (1.0 - LEVEL_TOLERANCE) * peak)
        .unwrap_or(onset);
    let attack_s = env[peak_at].0 - env[onset].0;
    let floor_after = |from: usize| {
        env[from..]
            .iter()
            .position(|e| e.1 < floor)
            .map_or(env.len() - 1, |i| from + i)
    };

    // slope by central difference over four windows
    let span = (4 * window / hop).max(2) / 2;
    let dt = env.get(1).map_or(1.0, |e| e.0) - env[0].0;
    let flat: Vec<bool> = (0..env.len())
        .map(|i| {
            if i < span || i + span >= env.len() || i < peak_at || env[i].1 < floor {
                return false;
            }
            let slope = (env[i + span].1 - env[i - span].1) / (2.0 * span as f64 * dt);
            slope.abs() < FLAT_SLOPE * peak
        })
        .collect();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < flat.len() {
        if flat[i] {
            let start = i;
            while i < flat.len() && flat[i] {
                i += 1;
            }
            if best.is_none_or(|(s, e)| i - start > e - s) {
                best = Some((start, i));
            }
        } else {
            i += 1;
        }
    }

    let plateau = best.and_then(|(s, e)| {
        let run = &env[s..e];
        let hi = run.iter().map(|p| p.1).fold(0.0, f64::max);
        let lo = run.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        (e - s >= 2 * span && hi <= PLATEAU_SPREAD * lo).then(|| {
            let mut levels: Vec<f64> = run.iter().map(|p| p.1).collect();
            levels.sort_by(f64::total_cmp);
            (s, e, levels[levels.len() / 2])
        })
    });

    Ok(match plateau {
        Some((s, e, level)) => {
            let near = |v: f64| (v - level).abs() <= LEVEL_TOLERANCE * level;
            let entry = (peak_at..=s).find(|&i| near(env[i].1)).unwrap_or(s);
            let mut exit = e - 1;
            while exit + 1 < env.len() && near(env[exit + 1].1) {
                exit += 1;
            }
            let end = floor_after(exit);
            AdsrSegmentation {
                attack_s,
                decay_s: env[entry].0 - env[peak_at].0,
                sustain_level: (level / peak).clamp(0.0, 1.0),
                sustain_s: env[exit].0 - env[entry].0,
                release_s: env[end].0 - env[exit].0,
            }
        }
        None => {
            let end = floor_after(peak_at);
            AdsrSegmentation {
                attack_s,
                decay_s: env[end].0 - env[peak_at].0,
                sustain_level: FLOOR_FRACTION,
                sustain_s: 0.0,
                release_s: 0.0,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn trapezoid() -> Vec<f64> {
        (0..(1.0 * 44100.0) as usize)
            .map(|i| {
                let t = i as f64 / 44100.0;
                let env = if t < 0.1 {
                    t / 0.1
                } else if t < 0.6 {
                    1.0
                } else if t < 0.8 {
                    (0.8 - t) / 0.2
                } else {
                    0.0
                };
                env * (2.0 * PI * 440.0 * t).sin()
            })
            .collect()
    }

    #[test]
    fn trapezoid_envelope() {
        let a = segment_adsr(&trapezoid(), 44100, 0.01).unwrap();
        assert!((a.attack_s - 0.1).abs() <= 0.01, "{a:?}");
        assert!((a.release_s - 0.2).abs() <= 0.01, "{a:?}");
        assert!((a.sustain_level - 1.0).abs() <= 0.05, "{a:?}");
        assert!((a.sustain_s - 0.5).abs() <= 0.02, "{a:?}");
        assert!(a.decay_s < 0.01);
    }

    #[test]
    fn damped_sinusoid_has_no_plateau() {
        let x: Vec<f64> = (0..3 * 44100)
            .map(|i| {
                let t = i as f64 / 44100.0;
                (-2.0 * t).exp() * (2.0 * PI * 300.0 * t).sin()
            })
            .collect();
        let a = segment_adsr(&x, 44100, 0.01).unwrap();
        assert_eq!(a.sustain_s, 0.0);
        assert_eq!(a.release_s, 0.0);
        // e^{-2t} reaches 1% at ln(100)/2
        assert!((a.decay_s - 100f64.ln() / 2.0).abs() < 0.02, "{a:?}");
    }

    #[test]
    fn silence_is_rejected() {
        assert!(matches!(
            segment_adsr(&vec![0.0; 1000], 44100, 0.01),
            Err(Error::SilentInput(_))
        ));
        assert!(segment_adsr(&trapezoid(), 44100, 0.2).is_err());
    }

    #[test]
    fn durations_are_non_negative() {
        let a = segment_adsr(&trapezoid(), 44100, 0.1).unwrap();
        for d in [a.attack_s, a.decay_s, a.sustain_s, a.release_s] {
            assert!(d >= 0.0);
        }
        assert!((0.0..=1.0).contains(&a.sustain_level));
    }
}
