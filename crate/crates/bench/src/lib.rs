//! Shared fixtures for the criterion benchmarks.

use membrane_lab::{RadialDensityProfile, Ring};

/// Two-region patch close to the harmonic design point.
pub fn patch_profile() -> RadialDensityProfile {
    RadialDensityProfile::two_region(0.1, 1500.0, 0.2, 0.45, 4.6).expect("valid profile")
}

/// Linearly tapered patch resolved into `rings` rings inside half the radius.
pub fn graded_profile(rings: usize) -> RadialDensityProfile {
    let mut out: Vec<Ring> = (0..rings)
        .map(|i| {
            let frac = 0.5 * (i + 1) as f64 / rings as f64;
            Ring::new(frac, 0.2 * (1.0 + 6.0 * (1.0 - i as f64 / rings as f64)))
        })
        .collect();
    out.push(Ring::new(1.0, 0.2));
    RadialDensityProfile::new(0.1, 1500.0, out).expect("valid profile")
}
