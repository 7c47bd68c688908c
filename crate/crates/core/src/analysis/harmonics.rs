use serde::{Deserialize, Serialize};

use super::peaks::Peak;
use crate::error::{Error, Result};

/// Relative tolerance for a peak to sit on a comb tooth.
pub const COMB_TOLERANCE: f64 = 0.02;
/// Highest harmonic number a comb tooth may carry.
pub const MAX_HARMONIC: u32 = 8;
/// Expected position of the shifted lowest mode relative to the comb fundamental.
pub const SHIFT_TARGET: f64 = 1.07;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMatch {
    pub peak_index: usize,
    pub harmonic: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedPeak {
    pub peak_index: usize,
    pub frequency_hz: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicGrouping {
    pub fundamental_hz: f64,
    pub matched: Vec<HarmonicMatch>,
    pub shifted: Option<ShiftedPeak>,
}

impl HarmonicGrouping {
    /// The strongest peak on harmonic `k`.
    pub fn harmonic_peak<'a>(&self, peaks: &'a [Peak], k: u32) -> Option<&'a Peak> {
        self.matched
            .iter()
            .filter(|m| m.harmonic == k)
            .map(|m| &peaks[m.peak_index])
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }
}

fn comb(peaks: &[Peak], candidate: f64) -> (f64, Vec<HarmonicMatch>) {
    let mut score = 0.0;
    let mut matched = Vec::new();
    for (peak_index, p) in peaks.iter().enumerate() {
        let k = (p.frequency_hz / candidate).round();
        if k < 1.0 || k > MAX_HARMONIC as f64 {
            continue;
        }
        if (p.frequency_hz - k * candidate).abs() <= COMB_TOLERANCE * k * candidate {
            score += p.magnitude;
            matched.push(HarmonicMatch {
                peak_index,
                harmonic: k as u32,
            });
        }
    }
    (score, matched)
}

/// Comb search over candidate fundamentals in `f_search` spaced by
/// `resolution_hz`. A candidate needs at least two matched peaks; among
/// equal scores the highest candidate wins, so subharmonics lose. The
/// winner is refined by least squares over its matched peaks.
pub fn group_harmonics(peaks: &[Peak], f_search: (f64, f64), resolution_hz: f64) -> Result<HarmonicGrouping> {
    if peaks.len() < 2 {
        return Err(Error::TooFewPeaks(peaks.len()));
    }
    let (lo, hi) = f_search;
    if !(lo > 0.0 && hi > lo && resolution_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bad comb search range {lo}..{hi} step {resolution_hz}"
        )));
    }
    let steps = ((hi - lo) / resolution_hz).floor() as usize;
    let mut best: Option<(f64, Vec<HarmonicMatch>)> = None;
    for i in 0..=steps {
        let candidate = lo + i as f64 * resolution_hz;
        let (score, matched) = comb(peaks, candidate);
        if matched.len() < 2 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((s, _)) => score >= *s * (1.0 - 1e-12),
        };
        if better {
            best = Some((score, matched));
        }
    }
    let (_, matched) = best.ok_or(Error::TooFewPeaks(peaks.len()))?;

    let (num, den) = matched.iter().fold((0.0, 0.0), |(n, d), m| {
        let k = m.harmonic as f64;
        (n + k * peaks[m.peak_index].frequency_hz, d + k * k)
    });
    let fundamental_hz = num / den;

    let target = SHIFT_TARGET * fundamental_hz;
    let shifted = peaks
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            !matched.iter().any(|m| m.peak_index == *i) && (p.frequency_hz - target).abs() <= COMB_TOLERANCE * target
        })
        .max_by(|a, b| a.1.magnitude.total_cmp(&b.1.magnitude))
        .map(|(peak_index, p)| ShiftedPeak {
            peak_index,
            frequency_hz: p.frequency_hz,
            ratio: p.frequency_hz / fundamental_hz,
        });
    Ok(HarmonicGrouping {
        fundamental_hz,
        matched,
        shifted,
    })
}
