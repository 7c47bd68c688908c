//! Acoustic figures of merit for resonator woods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{round_json, sig9};

/// Relative mismatch between a supplied and a derived sound velocity
/// above which a warning is raised.
pub const VELOCITY_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSample {
    pub name: String,
    #[serde(rename = "E_pa")]
    pub youngs_modulus: f64,
    #[serde(rename = "rho_kg_m3")]
    pub density: f64,
    #[serde(rename = "v_m_s", default)]
    pub sound_velocity: Option<f64>,
}

/// A supplied sound velocity that disagrees with `√(E/ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InconsistentVelocity {
    pub supplied: f64,
    pub derived: f64,
}

impl InconsistentVelocity {
    pub fn relative_difference(&self) -> f64 {
        (self.supplied - self.derived).abs() / self.derived
    }
}

impl std::fmt::Display for InconsistentVelocity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "supplied velocity {} m/s differs from sqrt(E/rho) = {} m/s by {:.2}%; using the supplied value",
            sig9(self.supplied),
            sig9(self.derived),
            100.0 * self.relative_difference()
        )
    }
}

impl MaterialSample {
    pub fn new(
        name: impl Into<String>,
        youngs_modulus: f64,
        density: f64,
        sound_velocity: Option<f64>,
    ) -> Result<Self> {
        let s = Self {
            name: name.into(),
            youngs_modulus,
            density,
            sound_velocity,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.youngs_modulus) || !positive(self.density) || !self.sound_velocity.is_none_or(positive) {
            return Err(Error::InvalidInput(format!(
                "material {}: modulus, density and velocity must be positive",
                self.name
            )));
        }
        Ok(())
    }

    /// `√(E/ρ)`.
    pub fn derived_velocity(&self) -> f64 {
        (self.youngs_modulus / self.density).sqrt()
    }

    /// The supplied velocity if any, otherwise the derived one.
    pub fn velocity(&self) -> f64 {
        self.sound_velocity.unwrap_or_else(|| self.derived_velocity())
    }

    pub fn velocity_warning(&self) -> Option<InconsistentVelocity> {
        let supplied = self.sound_velocity?;
        let w = InconsistentVelocity {
            supplied,
            derived: self.derived_velocity(),
        };
        (w.relative_difference() > VELOCITY_TOLERANCE).then_some(w)
    }
}

/// `√(E/ρ³)`, or `v/ρ` when a velocity is supplied.
pub fn sound_radiation_coefficient(sample: &MaterialSample) -> f64 {
    match sample.sound_velocity {
        Some(v) => v / sample.density,
        None => (sample.youngs_modulus / sample.density.powi(3)).sqrt(),
    }
}

/// Characteristic impedance `ρ v`.
pub fn impedance(sample: &MaterialSample) -> f64 {
    sample.density * sample.velocity()
}

/// Normal-incidence intensity transmission `4 z1 z2 / (z1 + z2)²`.
pub fn transmission_coefficient(z1: f64, z2: f64) -> Result<f64> {
    for z in [z1, z2] {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::NonPositiveImpedance(z));
        }
    }
    Ok(4.0 * z1 * z2 / ((z1 + z2) * (z1 + z2)))
}

/// Reads `name,E_pa,rho_kg_m3[,v_m_s]` rows; the velocity column may be
/// absent or empty.
pub fn load_samples_csv(text: &str) -> Result<Vec<MaterialSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for row in reader.deserialize() {
        let sample: MaterialSample = row?;
        sample.validate()?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput("no material samples".into()));
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSample {
    pub rank: usize,
    pub name: String,
    pub src: f64,
    pub impedance: f64,
    pub velocity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialsReport {
    /// Descending by SRC; ties keep input order.
    pub ranking: Vec<RankedSample>,
    /// Row and column order of `transmission`: the input order.
    pub names: Vec<String>,
    pub transmission: Vec<Vec<f64>>,
}

impl MaterialsReport {
    pub fn new(samples: &[MaterialSample]) -> Result<Self> {
        let mut ranking: Vec<RankedSample> = samples
            .iter()
            .map(|s| {
                let warning = s.velocity_warning().map(|w| {
                    log::warn!("{}: {w}", s.name);
                    w.to_string()
                });
                RankedSample {
                    rank: 0,
                    name: s.name.clone(),
                    src: sound_radiation_coefficient(s),
                    impedance: impedance(s),
                    velocity: s.velocity(),
                    warning,
                }
            })
            .collect();
        ranking.sort_by(|a, b| b.src.total_cmp(&a.src));
        for (i, r) in ranking.iter_mut().enumerate() {
            r.rank = i + 1;
        }
        let z: Vec<f64> = samples.iter().map(impedance).collect();
        let transmission = z
            .iter()
            .map(|&a| {
                z.iter()
                    .map(|&b| transmission_coefficient(a, b))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ranking,
            names: samples.iter().map(|s| s.name.clone()).collect(),
            transmission,
        })
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        round_json(&mut value);
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    /// Ranking table followed by a blank line and the transmission matrix.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,name,src_m4_per_kg_s,impedance_kg_per_m2_s,velocity_m_s\n");
        for r in &self.ranking {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.rank,
                r.name,
                sig9(r.src),
                sig9(r.impedance),
                sig9(r.velocity)
            ));
        }
        out.push_str("\ntransmission");
        for n in &self.names {
            out.push_str(&format!(",{n}"));
        }
        out.push('\n');
        for (n, row) in self.names.iter().zip(&self.transmission) {
            out.push_str(n);
            for t in row {
                out.push_str(&format!(",{}", sig9(*t)));
            }
            out.push('\n');
        }
        out
    }
}
