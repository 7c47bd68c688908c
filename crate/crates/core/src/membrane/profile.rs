use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One annulus of constant surface density, bounded outside by
/// `outer_radius_fraction * membrane_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    #[serde(rename = "r_frac")]
    pub outer_radius_fraction: f64,
    #[serde(rename = "sigma_kg_m2")]
    pub surface_density: f64,
}

impl Ring {
    pub fn new(outer_radius_fraction: f64, surface_density: f64) -> Self {
        Self {
            outer_radius_fraction,
            surface_density,
        }
    }
}

/// Piecewise-constant surface density of a circular membrane under uniform
/// tension. The first ring is the central disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDoc", into = "ProfileDoc")]
pub struct RadialDensityProfile {
    membrane_radius: f64,
    tension: f64,
    rings: Vec<Ring>,
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    radius_m: f64,
    tension_n_per_m: f64,
    rings: Vec<Ring>,
}

impl TryFrom<ProfileDoc> for RadialDensityProfile {
    type Error = Error;

    fn try_from(doc: ProfileDoc) -> Result<Self> {
        Self::new(doc.radius_m, doc.tension_n_per_m, doc.rings)
    }
}

impl From<RadialDensityProfile> for ProfileDoc {
    fn from(p: RadialDensityProfile) -> Self {
        Self {
            radius_m: p.membrane_radius,
            tension_n_per_m: p.tension,
            rings: p.rings,
        }
    }
}

impl RadialDensityProfile {
    pub fn new(membrane_radius: f64, tension: f64, rings: Vec<Ring>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        if !(membrane_radius > 0.0 && membrane_radius.is_finite()) {
            return bad(format!("radius must be positive, got {membrane_radius}"));
        }
        if !(tension > 0.0 && tension.is_finite()) {
            return bad(format!("tension must be positive, got {tension}"));
        }
        if rings.is_empty() {
            return bad("at least one ring is required".into());
        }
        let mut prev = 0.0;
        for (i, ring) in rings.iter().enumerate() {
            if !(ring.outer_radius_fraction > prev && ring.outer_radius_fraction <= 1.0) {
                return bad(format!(
                    "ring {i}: radius fraction {} must lie in ({prev}, 1]",
                    ring.outer_radius_fraction
                ));
            }
            if !(ring.surface_density > 0.0 && ring.surface_density.is_finite()) {
                return bad(format!(
                    "ring {i}: surface density must be positive and finite, got {}",
                    ring.surface_density
                ));
            }
            prev = ring.outer_radius_fraction;
        }
        if prev != 1.0 {
            return bad(format!("last ring must end at fraction 1.0, got {prev}"));
        }
        Ok(Self {
            membrane_radius,
            tension,
            rings,
        })
    }

    pub fn uniform(membrane_radius: f64, tension: f64, density: f64) -> Result<Self> {
        Self::new(membrane_radius, tension, vec![Ring::new(1.0, density)])
    }

    /// Central patch of radius `patch_fraction * R` with density
    /// `density_ratio * field_density`, surrounded by the bare membrane.
    pub fn two_region(
        membrane_radius: f64,
        tension: f64,
        field_density: f64,
        patch_fraction: f64,
        density_ratio: f64,
    ) -> Result<Self> {
        Self::new(
            membrane_radius,
            tension,
            vec![
                Ring::new(patch_fraction, field_density * density_ratio),
                Ring::new(1.0, field_density),
            ],
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn membrane_radius(&self) -> f64 {
        self.membrane_radius
    }

    pub fn tension(&self) -> f64 {
        self.tension
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn min_density(&self) -> f64 {
        self.rings
            .iter()
            .map(|r| r.surface_density)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_density(&self) -> f64 {
        self.rings.iter().map(|r| r.surface_density).fold(0.0, f64::max)
    }

    /// Outer radius of each ring in metres.
    pub fn boundaries(&self) -> impl Iterator<Item = f64> + '_ {
        self.rings
            .iter()
            .map(move |r| r.outer_radius_fraction * self.membrane_radius)
    }

    /// Same geometry with every density multiplied by `factor`.
    pub fn scale_density(&self, factor: f64) -> Result<Self> {
        let rings = self
            .rings
            .iter()
            .map(|r| Ring::new(r.outer_radius_fraction, r.surface_density * factor))
            .collect();
        Self::new(self.membrane_radius, self.tension, rings)
    }

    /// Splits rings so that `fraction` becomes a ring boundary.
    pub fn with_boundary(&self, fraction: f64) -> Self {
        if self.rings.iter().any(|r| r.outer_radius_fraction == fraction) {
            return self.clone();
        }
        let mut rings = Vec::with_capacity(self.rings.len() + 1);
        let mut inserted = false;
        for ring in &self.rings {
            if !inserted && fraction < ring.outer_radius_fraction {
                rings.push(Ring::new(fraction, ring.surface_density));
                inserted = true;
            }
            rings.push(*ring);
        }
        Self {
            membrane_radius: self.membrane_radius,
            tension: self.tension,
            rings,
        }
    }

    /// Adds `increment` to the density of every ring lying inside
    /// `fraction`. `fraction` must already be a ring boundary.
    pub(crate) fn add_inside(&mut self, fraction: f64, increment: f64) {
        for ring in self.rings.iter_mut() {
            if ring.outer_radius_fraction <= fraction {
                ring.surface_density += increment;
            }
        }
    }

    /// Stable identifier of the profile contents.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.membrane_radius.to_bits().hash(&mut h);
        self.tension.to_bits().hash(&mut h);
        for ring in &self.rings {
            ring.outer_radius_fraction.to_bits().hash(&mut h);
            ring.surface_density.to_bits().hash(&mut h);
        }
        h.finish()
    }
}
