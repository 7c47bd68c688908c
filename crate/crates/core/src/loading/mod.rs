//! Inverse design of density loading and sequential layer simulation.

mod layers;
mod search;

use serde::{Deserialize, Serialize};

pub use layers::{simulate_layers, LayerSnapshot, LayerStep, LayerTrace, Stabilization};

use crate::error::{Error, Result};
use crate::format::round_json;
use crate::harmonicity::{harmonicity_score, HarmonicAssessment};
use crate::membrane::{lowest_modes, RadialDensityProfile, Ring};
use search::{grid_side, minimize_box};

/// Lowest modes entering the objective. Overtones of the loaded head are
/// carried by the `(m, 1)` family, which interleaves with higher radial
/// modes, so more modes than overtones are needed to reach them.
pub const ASSESSED_MODES: usize = 13;
pub const DEFAULT_GRID: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRegionCandidate {
    pub patch_radius_fraction: f64,
    pub density_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRegionBounds {
    pub fraction: (f64, f64),
    pub ratio: (f64, f64),
}

impl Default for TwoRegionBounds {
    fn default() -> Self {
        Self {
            fraction: (0.1, 0.9),
            ratio: (1.0, 25.0),
        }
    }
}

impl TwoRegionBounds {
    fn validate(&self) -> Result<()> {
        let (f0, f1) = self.fraction;
        let (r0, r1) = self.ratio;
        if !(0.05 < f0 && f0 <= f1 && f1 < 0.95) {
            return Err(Error::InvalidInput(format!(
                "fraction bounds must lie within (0.05, 0.95), got {f0}..{f1}"
            )));
        }
        if !(1.0 <= r0 && r0 <= r1 && r1 <= 50.0) {
            return Err(Error::InvalidInput(format!(
                "ratio bounds must lie within [1, 50], got {r0}..{r1}"
            )));
        }
        Ok(())
    }

    fn at(&self, u: &[f64]) -> TwoRegionCandidate {
        TwoRegionCandidate {
            patch_radius_fraction: lerp(self.fraction, u[0]),
            density_ratio: lerp(self.ratio, u[1]),
        }
    }
}

/// Mass and taper bounds of the graded staircase. `mass_factor` scales the
/// added mass of the seeding two-region candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedBounds {
    pub mass_factor: (f64, f64),
    pub taper: (f64, f64),
}

impl Default for GradedBounds {
    fn default() -> Self {
        Self {
            mass_factor: (0.5, 2.0),
            taper: (0.0, 3.0),
        }
    }
}

impl GradedBounds {
    fn validate(&self) -> Result<()> {
        let (m0, m1) = self.mass_factor;
        let (t0, t1) = self.taper;
        if !(0.0 < m0 && m0 <= 1.0 && 1.0 <= m1) || !(t0 == 0.0 && t1 >= 0.0) {
            return Err(Error::InvalidInput(
                "graded bounds must contain the seed: mass factor range around 1 and taper starting at 0".into(),
            ));
        }
        Ok(())
    }
}

/// Search settings shared by both optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub overtones: u32,
    pub budget: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            overtones: 5,
            budget: 2000,
            grid: DEFAULT_GRID,
            seed: 42,
        }
    }
}

impl SearchOptions {
    fn validate(&self) -> Result<()> {
        if !(3..=7).contains(&self.overtones) {
            return Err(Error::InvalidInput(format!(
                "overtones must lie in [3, 7], got {}",
                self.overtones
            )));
        }
        if self.budget < 200 {
            return Err(Error::InvalidInput(format!(
                "budget must be at least 200, got {}",
                self.budget
            )));
        }
        if self.grid < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 points per axis".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub method: String,
    /// Two-region parameters (for graded runs, the seeding candidate).
    pub candidate: TwoRegionCandidate,
    /// Graded-only: added-mass factor and taper exponent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graded: Option<GradedParameters>,
    pub profile: RadialDensityProfile,
    /// Objective value: squared deviations of the best mode per harmonic.
    pub score: f64,
    pub shift: f64,
    pub grid_best_score: f64,
    pub assessment: HarmonicAssessment,
    pub evaluations: usize,
    pub budget: usize,
    pub seed: u64,
    pub budget_exhausted: bool,
}

impl OptimizationReport {
    /// Pretty JSON with floats rounded to 9 significant digits.
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        round_json(&mut value);
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedParameters {
    pub rings: usize,
    pub mass_factor: f64,
    pub taper: f64,
}

fn lerp((lo, hi): (f64, f64), u: f64) -> f64 {
    lo + (hi - lo) * u
}

fn unlerp((lo, hi): (f64, f64), x: f64) -> f64 {
    if hi > lo {
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Harmonicity of the lowest modes of `profile` with overtones up to
/// `overtones + 1` times the implied fundamental.
///
/// The search objective is the assigned part of the score: each harmonic
/// is judged by its closest mode, and modes that lose a harmonic to a
/// closer one (weakly excited radial overtones) are not penalized.
pub fn assess_profile(profile: &RadialDensityProfile, overtones: u32) -> Result<HarmonicAssessment> {
    let table = lowest_modes(profile, ASSESSED_MODES)?;
    harmonicity_score(&table.frequencies(), overtones + 1)
}

fn objective(profile: Result<RadialDensityProfile>, overtones: u32) -> f64 {
    profile
        .and_then(|p| assess_profile(&p, overtones))
        .map_or(f64::INFINITY, |a| a.assigned_score())
}

/// Field density of `base`, which must be uniform.
fn field_density(base: &RadialDensityProfile) -> Result<f64> {
    if base.min_density() != base.max_density() {
        return Err(Error::InvalidProfile("optimizer base membrane must be uniform".into()));
    }
    Ok(base.min_density())
}

pub fn two_region_profile(base: &RadialDensityProfile, c: &TwoRegionCandidate) -> Result<RadialDensityProfile> {
    RadialDensityProfile::two_region(
        base.membrane_radius(),
        base.tension(),
        field_density(base)?,
        c.patch_radius_fraction,
        c.density_ratio,
    )
}

/// Grid scan plus simplex refinement over patch radius and density ratio.
/// The returned score never exceeds the best grid score.
pub fn optimize_two_region(
    base: &RadialDensityProfile,
    bounds: &TwoRegionBounds,
    options: &SearchOptions,
) -> Result<OptimizationReport> {
    bounds.validate()?;
    options.validate()?;
    field_density(base)?;
    let f = |u: &[f64]| objective(two_region_profile(base, &bounds.at(u)), options.overtones);
    let side = grid_side(options.grid, options.budget);
    let outcome = minimize_box(&f, side, options.budget, options.seed, None);
    let candidate = bounds.at(&outcome.best);
    let profile = two_region_profile(base, &candidate)?;
    let assessment = assess_profile(&profile, options.overtones)?;
    Ok(OptimizationReport {
        method: "two_region".into(),
        candidate,
        graded: None,
        profile,
        score: assessment.assigned_score(),
        shift: assessment.fundamental_shift,
        grid_best_score: outcome.grid_best_score,
        assessment,
        evaluations: outcome.evaluations,
        budget: options.budget,
        seed: options.seed,
        budget_exhausted: outcome.budget_exhausted,
    })
}

/// Monotone staircase inside the seed's patch radius: `rings` equal-width
/// rings whose added density follows `(1 − r / a)^taper` at the ring
/// midpoints, scaled so the added mass is `mass_factor` times that of the
/// seed.
/// Taper 0 reproduces the seed.
pub fn graded_profile(
    base: &RadialDensityProfile,
    seed: &TwoRegionCandidate,
    rings: usize,
    mass_factor: f64,
    taper: f64,
) -> Result<RadialDensityProfile> {
    if !(4..=32).contains(&rings) {
        return Err(Error::InvalidInput(format!("rings must lie in [4, 32], got {rings}")));
    }
    if !(mass_factor >= 0.0 && taper >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "mass factor and taper must be non-negative, got {mass_factor}, {taper}"
        )));
    }
    let sigma = field_density(base)?;
    let a = seed.patch_radius_fraction;
    let added_density = sigma * (seed.density_ratio - 1.0);
    // areas in units of π R²
    let total_mass = mass_factor * added_density * a * a;
    let edges: Vec<f64> = (0..=rings).map(|i| a * i as f64 / rings as f64).collect();
    // taper sampled at ring midpoints
    let weights: Vec<f64> = (0..rings)
        .map(|i| (1.0 - 0.5 * (edges[i] + edges[i + 1]) / a).powf(taper))
        .collect();
    let weighted_area: f64 = (0..rings)
        .map(|i| weights[i] * (edges[i + 1].powi(2) - edges[i].powi(2)))
        .sum();
    let scale = total_mass / weighted_area;
    let mut out: Vec<Ring> = (0..rings)
        .map(|i| Ring::new(edges[i + 1], sigma + scale * weights[i]))
        .collect();
    out.last_mut().unwrap().outer_radius_fraction = a;
    out.push(Ring::new(1.0, sigma));
    RadialDensityProfile::new(base.membrane_radius(), base.tension(), out)
}

/// Searches the graded staircase over added mass and taper, warm-started
/// from `seed` (mass factor 1, taper 0), so the result never scores worse
/// than the seed.
pub fn optimize_graded(
    base: &RadialDensityProfile,
    seed: &TwoRegionCandidate,
    rings: usize,
    bounds: &GradedBounds,
    options: &SearchOptions,
) -> Result<OptimizationReport> {
    bounds.validate()?;
    options.validate()?;
    graded_profile(base, seed, rings, 1.0, 0.0)?;
    let at = |u: &[f64]| (lerp(bounds.mass_factor, u[0]), lerp(bounds.taper, u[1]));
    let f = |u: &[f64]| {
        let (m, t) = at(u);
        objective(graded_profile(base, seed, rings, m, t), options.overtones)
    };
    let start = [unlerp(bounds.mass_factor, 1.0), 0.0];
    let side = grid_side(options.grid, options.budget);
    let outcome = minimize_box(&f, side, options.budget, options.seed, Some(start));
    let (mass_factor, taper) = at(&outcome.best);
    let profile = graded_profile(base, seed, rings, mass_factor, taper)?;
    let assessment = assess_profile(&profile, options.overtones)?;
    Ok(OptimizationReport {
        method: "graded".into(),
        candidate: *seed,
        graded: Some(GradedParameters {
            rings,
            mass_factor,
            taper,
        }),
        profile,
        score: assessment.assigned_score(),
        shift: assessment.fundamental_shift,
        grid_best_score: outcome.grid_best_score,
        assessment,
        evaluations: outcome.evaluations,
        budget: options.budget,
        seed: options.seed,
        budget_exhausted: outcome.budget_exhausted,
    })
}
