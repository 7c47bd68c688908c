//! Harmonicity of a set of modal or spectral frequencies.
//!
//! The reference pitch is half the second-lowest frequency: a loaded drum
//! head is tuned on its second harmonic, and its lowest mode sits a few
//! percent above the fundamental implied by the rest of the series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratios at or below this multiple of the implied fundamental are not
/// assigned to an overtone.
pub const ASSIGNMENT_FLOOR: f64 = 1.5;

/// One frequency compared against its nearest integer multiple of the
/// implied fundamental. `deviation = ratio − nearest_integer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioAssignment {
    /// Position in the (sorted) input list.
    pub index: usize,
    pub frequency_hz: f64,
    pub ratio: f64,
    pub nearest_integer: u32,
    pub deviation: f64,
}

impl RatioAssignment {
    /// `|deviation| / nearest_integer`.
    pub fn relative_deviation(&self) -> f64 {
        self.deviation.abs() / self.nearest_integer as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicAssessment {
    pub implied_fundamental_hz: f64,
    /// One entry per integer multiple, ascending.
    pub assigned: Vec<RatioAssignment>,
    /// Entries that lost an integer to a closer frequency.
    pub unassigned: Vec<RatioAssignment>,
    pub score: f64,
    /// Lowest frequency over the implied fundamental.
    pub fundamental_shift: f64,
}

impl HarmonicAssessment {
    /// Sum of squared deviations over the assigned entries only.
    pub fn assigned_score(&self) -> f64 {
        self.assigned.iter().map(|a| a.deviation * a.deviation).sum()
    }

    /// Largest relative deviation among assigned overtones `2..=up_to`, or
    /// `None` if one of those integers has no assigned frequency.
    pub fn worst_overtone_deviation(&self, up_to: u32) -> Option<f64> {
        (2..=up_to)
            .map(|k| {
                self.assigned
                    .iter()
                    .find(|a| a.nearest_integer == k)
                    .map(RatioAssignment::relative_deviation)
            })
            .try_fold(0.0_f64, |acc, d| d.map(|d| acc.max(d)))
    }
}

/// Half the second-lowest frequency.
pub fn implied_fundamental(frequencies: &[f64]) -> Result<f64> {
    if frequencies.len() < 2 {
        return Err(Error::TooFewFrequencies {
            needed: 2,
            got: frequencies.len(),
        });
    }
    let sorted = sorted_positive(frequencies)?;
    Ok(sorted[1] / 2.0)
}

/// Assigns every frequency above `1.5 f0` to its nearest integer multiple
/// (at most `max_overtone`) of the implied fundamental `f0`.
///
/// When two frequencies claim the same integer the one with the smaller
/// deviation keeps it and the other is reported as unassigned. The score
/// is the sum of squared deviations of all assessed entries; collision
/// losers are weighted like assigned entries, so a set scores zero only
/// if every assessed ratio is an exact integer.
pub fn harmonicity_score(frequencies: &[f64], max_overtone: u32) -> Result<HarmonicAssessment> {
    if frequencies.len() < 3 {
        return Err(Error::TooFewFrequencies {
            needed: 3,
            got: frequencies.len(),
        });
    }
    if !(3..=10).contains(&max_overtone) {
        return Err(Error::InvalidInput(format!(
            "max_overtone must lie in [3, 10], got {max_overtone}"
        )));
    }
    let sorted = sorted_positive(frequencies)?;
    let f0 = sorted[1] / 2.0;

    let mut slots: Vec<Option<RatioAssignment>> = vec![None; max_overtone as usize + 1];
    let mut unassigned = Vec::new();
    for (index, &f) in sorted.iter().enumerate() {
        let ratio = f / f0;
        if ratio <= ASSIGNMENT_FLOOR {
            continue;
        }
        let nearest = ratio.round();
        if nearest > max_overtone as f64 {
            continue;
        }
        let entry = RatioAssignment {
            index,
            frequency_hz: f,
            ratio,
            nearest_integer: nearest as u32,
            deviation: ratio - nearest,
        };
        let slot = &mut slots[nearest as usize];
        match slot {
            Some(held) if held.deviation.abs() <= entry.deviation.abs() => unassigned.push(entry),
            Some(held) => {
                unassigned.push(*held);
                *slot = Some(entry);
            }
            None => *slot = Some(entry),
        }
    }
    let assigned: Vec<RatioAssignment> = slots.into_iter().flatten().collect();
    unassigned.sort_by_key(|e| e.index);
    let score = assigned
        .iter()
        .chain(&unassigned)
        .map(|e| e.deviation * e.deviation)
        .sum();
    Ok(HarmonicAssessment {
        implied_fundamental_hz: f0,
        assigned,
        unassigned,
        score,
        fundamental_shift: sorted[0] / f0,
    })
}

fn sorted_positive(frequencies: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = frequencies.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(Error::NonPositiveFrequency(bad));
    }
    let mut sorted = frequencies.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioName {
    DheemToFundamental,
    DheemToChappu,
    NamToChappu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRatioVerdict {
    pub ratio_name: RatioName,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Target ± tolerance for one characteristic ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBand {
    pub target: f64,
    pub tolerance: f64,
}

/// Characteristic stroke-ratio bands of the loaded drum head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicBands {
    pub dheem_to_fundamental: RatioBand,
    pub dheem_to_chappu: RatioBand,
    pub nam_to_chappu: RatioBand,
}

impl Default for CharacteristicBands {
    fn default() -> Self {
        Self {
            dheem_to_fundamental: RatioBand {
                target: 1.07,
                tolerance: 0.05,
            },
            dheem_to_chappu: RatioBand {
                target: 0.534,
                tolerance: 0.005,
            },
            nam_to_chappu: RatioBand {
                target: 1.5,
                tolerance: 0.012,
            },
        }
    }
}

/// Verdicts with the default bands.
pub fn characteristic_verdicts(dheem: f64, chappu: f64, nam: f64) -> Result<Vec<CharacteristicRatioVerdict>> {
    characteristic_verdicts_with(dheem, chappu, nam, &CharacteristicBands::default())
}

/// Verdicts for `dheem / (chappu / 2)`, `dheem / chappu` and `nam / chappu`.
pub fn characteristic_verdicts_with(
    dheem: f64,
    chappu: f64,
    nam: f64,
    bands: &CharacteristicBands,
) -> Result<Vec<CharacteristicRatioVerdict>> {
    for f in [dheem, chappu, nam] {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::NonPositiveFrequency(f));
        }
    }
    let verdict = |ratio_name, measured: f64, band: RatioBand| CharacteristicRatioVerdict {
        ratio_name,
        measured,
        target: band.target,
        tolerance: band.tolerance,
        pass: (measured - band.target).abs() <= band.tolerance,
    };
    Ok(vec![
        verdict(
            RatioName::DheemToFundamental,
            dheem / (chappu / 2.0),
            bands.dheem_to_fundamental,
        ),
        verdict(RatioName::DheemToChappu, dheem / chappu, bands.dheem_to_chappu),
        verdict(RatioName::NamToChappu, nam / chappu, bands.nam_to_chappu),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn implied_fundamental_examples() {
        assert_eq!(implied_fundamental(&[214.0, 400.0, 600.0]).unwrap(), 200.0);
        assert_eq!(implied_fundamental(&[1.07, 2.0, 3.0]).unwrap(), 1.0);
        assert!(matches!(
            implied_fundamental(&[400.0]),
            Err(Error::TooFewFrequencies { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn shifted_series_scores_zero_overtone_error() {
        let f: Vec<f64> = [1.07, 2.0, 3.0, 4.0, 5.0].iter().map(|x| x * 100.0).collect();
        let a = harmonicity_score(&f, 10).unwrap();
        assert!(a.score < 1e-24);
        assert!((a.fundamental_shift - 1.07).abs() < 1e-12);
        assert!((a.implied_fundamental_hz - 100.0).abs() < 1e-12);
        let ks: Vec<u32> = a.assigned.iter().map(|e| e.nearest_integer).collect();
        assert_eq!(ks, vec![2, 3, 4, 5]);
        assert!(a.unassigned.is_empty());
        assert!(a.worst_overtone_deviation(5).unwrap() < 1e-12);
        assert_eq!(a.worst_overtone_deviation(6), None);
    }

    #[test]
    fn exact_series() {
        let a = harmonicity_score(&[1.0, 2.0, 3.0, 4.0], 10).unwrap();
        assert_eq!(a.score, 0.0);
        assert_eq!(a.fundamental_shift, 1.0);
    }

    #[test]
    fn uniform_drum_is_anharmonic() {
        let a = harmonicity_score(&[1.0, 1.59, 2.14, 2.30], 10).unwrap();
        // f0 = 0.795: 2.14 -> 2.692 and 2.30 -> 2.893 both claim 3
        let f0 = 1.59 / 2.0;
        let d1: f64 = 2.14 / f0 - 3.0;
        let d2: f64 = 2.30 / f0 - 3.0;
        assert!((a.score - (d1 * d1 + d2 * d2)).abs() < 1e-12);
        assert!(a.score > 0.05);
        assert_eq!(a.unassigned.len(), 1);
        assert_eq!(a.unassigned[0].frequency_hz, 2.14);
        assert_eq!(a.assigned.last().unwrap().frequency_hz, 2.30);
    }

    #[test]
    fn score_requires_three_frequencies_and_valid_range() {
        assert!(harmonicity_score(&[1.0, 2.0], 5).is_err());
        assert!(harmonicity_score(&[1.0, 2.0, 3.0], 2).is_err());
        assert!(harmonicity_score(&[1.0, 2.0, 3.0], 11).is_err());
        assert!(harmonicity_score(&[1.0, -2.0, 3.0], 5).is_err());
    }

    #[test]
    fn overtones_beyond_range_are_ignored() {
        let a = harmonicity_score(&[1.0, 2.0, 3.0, 7.3], 5).unwrap();
        assert_eq!(a.score, 0.0);
        assert_eq!(a.assigned.len(), 2);
    }

    #[test]
    fn verdict_examples() {
        let v = characteristic_verdicts(107.0, 200.0, 300.0).unwrap();
        assert!(v.iter().all(|v| v.pass), "{v:?}");

        let v = characteristic_verdicts(100.0, 200.0, 300.0).unwrap();
        let d2c = v.iter().find(|v| v.ratio_name == RatioName::DheemToChappu).unwrap();
        assert!(!d2c.pass);
        assert_eq!(d2c.measured, 0.5);

        let v = characteristic_verdicts(107.0, 200.0, 290.0).unwrap();
        let n2c = v.iter().find(|v| v.ratio_name == RatioName::NamToChappu).unwrap();
        assert!(!n2c.pass);
        assert!((n2c.measured - 1.45).abs() < 1e-12);

        assert!(matches!(
            characteristic_verdicts(0.0, 200.0, 300.0),
            Err(Error::NonPositiveFrequency(_))
        ));
    }

    #[test]
    fn custom_bands() {
        let bands = CharacteristicBands {
            dheem_to_fundamental: RatioBand {
                target: 1.07,
                tolerance: 0.01,
            },
            ..Default::default()
        };
        let v = characteristic_verdicts_with(109.0, 200.0, 300.0, &bands).unwrap();
        assert!(!v[0].pass);
        assert!(characteristic_verdicts(109.0, 200.0, 300.0).unwrap()[0].pass);
    }

    proptest! {
        #[test]
        fn verdicts_are_scale_invariant(
            d in 50.0f64..500.0, c in 50.0f64..900.0, n in 50.0f64..1500.0, k in 0.01f64..100.0
        ) {
            let a = characteristic_verdicts(d, c, n).unwrap();
            let b = characteristic_verdicts(k * d, k * c, k * n).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.measured - y.measured).abs() <= 1e-12 * x.measured);
                // ratios within rounding of a band edge may flip; exclude them
                if ((x.measured - x.target).abs() - x.tolerance).abs() > 1e-9 {
                    prop_assert_eq!(x.pass, y.pass);
                }
            }
        }

        #[test]
        fn score_is_scale_invariant(
            dev in proptest::collection::vec(-0.3f64..0.3, 3..7), k in 0.01f64..100.0
        ) {
            let f: Vec<f64> = std::iter::once(1.07)
                .chain(std::iter::once(2.0))
                .chain(dev.iter().enumerate().map(|(i, d)| (i + 3) as f64 + d))
                .map(|x| x * 100.0)
                .collect();
            let a = harmonicity_score(&f, 10).unwrap();
            let scaled: Vec<f64> = f.iter().map(|x| x * k).collect();
            let b = harmonicity_score(&scaled, 10).unwrap();
            prop_assert!((a.score - b.score).abs() < 1e-9);
            prop_assert!((a.fundamental_shift - b.fundamental_shift).abs() < 1e-12);
        }

        #[test]
        fn score_is_continuous_away_from_switches(
            dev in proptest::collection::vec(-0.1f64..0.1, 3),
            shift in 1.0f64..1.2,
            jitter in proptest::collection::vec(-1e-3f64..1e-3, 5),
        ) {
            let base: Vec<f64> = [shift, 2.0]
                .into_iter()
                .chain(dev.iter().enumerate().map(|(i, d)| (i + 3) as f64 + d))
                .map(|x| x * 100.0)
                .collect();
            let perturbed: Vec<f64> = base.iter().zip(&jitter).map(|(f, j)| f * (1.0 + j)).collect();
            let a = harmonicity_score(&base, 10).unwrap();
            let b = harmonicity_score(&perturbed, 10).unwrap();
            prop_assert!((a.score - b.score).abs() < 0.01, "{} vs {}", a.score, b.score);
        }
    }
}
