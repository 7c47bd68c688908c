use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::membrane::{composite_modes, guaranteed_ceiling, ModeTable, RadialDensityProfile};

/// Orders and radial indices tracked across layers.
const TRACKED_M: u32 = 3;
const TRACKED_N: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerStep {
    #[serde(rename = "r_frac")]
    pub layer_radius_fraction: f64,
    #[serde(rename = "dsigma_kg_m2")]
    pub areal_density_increment: f64,
}

impl LayerStep {
    pub fn list_from_json(text: &str) -> Result<Vec<LayerStep>> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    pub epsilon: f64,
    pub window: usize,
}

impl Default for Stabilization {
    fn default() -> Self {
        Self {
            epsilon: 0.002,
            window: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSnapshot {
    /// 0 for the base membrane, then one per applied layer.
    pub layer: usize,
    pub modes: ModeTable,
    pub f_dheem_hz: f64,
    pub f_chappu_hz: f64,
    pub dheem_to_chappu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub snapshots: Vec<LayerSnapshot>,
    /// First layer whose trailing `window` ratios (layers 1.. only) span
    /// less than `epsilon`.
    pub stabilized_at: Option<usize>,
    pub final_profile: RadialDensityProfile,
}

impl LayerTrace {
    pub fn ratios(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.dheem_to_chappu).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,f_dheem_hz,f_chappu_hz,ratio\n");
        for s in &self.snapshots {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.layer,
                sig9(s.f_dheem_hz),
                sig9(s.f_chappu_hz),
                sig9(s.dheem_to_chappu)
            ));
        }
        out
    }
}

fn snapshot(profile: &RadialDensityProfile, layer: usize) -> Result<LayerSnapshot> {
    let ceiling = guaranteed_ceiling(profile, TRACKED_M, TRACKED_N);
    let modes = composite_modes(profile, TRACKED_M, TRACKED_N, ceiling).map_err(|e| Error::Layer {
        layer,
        source: Box::new(e),
    })?;
    let f = modes.frequencies();
    Ok(LayerSnapshot {
        layer,
        f_dheem_hz: f[0],
        f_chappu_hz: f[1],
        dheem_to_chappu: f[0] / f[1],
        modes,
    })
}

/// Applies `steps` cumulatively: each layer is a disk of the given radius
/// fraction (made a ring boundary if it is not one) whose increment is
/// added to every ring inside it. Modes are recomputed after each layer.
pub fn simulate_layers(
    base: &RadialDensityProfile,
    steps: &[LayerStep],
    stabilization: &Stabilization,
) -> Result<LayerTrace> {
    if steps.is_empty() {
        return Err(Error::InvalidInput("no layer steps".into()));
    }
    if !(stabilization.epsilon > 0.0 && stabilization.window >= 2) {
        return Err(Error::InvalidInput(format!(
            "stabilization needs epsilon > 0 and window >= 2, got {stabilization:?}"
        )));
    }
    for (i, s) in steps.iter().enumerate() {
        let ok = s.layer_radius_fraction > 0.0
            && s.layer_radius_fraction < 1.0
            && s.areal_density_increment >= 0.0
            && s.areal_density_increment.is_finite();
        if !ok {
            return Err(Error::InvalidInput(format!("layer {}: bad step {s:?}", i + 1)));
        }
    }

    let mut profile = base.clone();
    let mut snapshots = vec![snapshot(&profile, 0)?];
    let mut stabilized_at = None;
    for (i, step) in steps.iter().enumerate() {
        let layer = i + 1;
        profile = profile.with_boundary(step.layer_radius_fraction);
        profile.add_inside(step.layer_radius_fraction, step.areal_density_increment);
        snapshots.push(snapshot(&profile, layer)?);
        let w = stabilization.window;
        if stabilized_at.is_none() && layer >= w {
            let recent = &snapshots[layer + 1 - w..=layer];
            let hi = recent.iter().map(|s| s.dheem_to_chappu).fold(f64::MIN, f64::max);
            let lo = recent.iter().map(|s| s.dheem_to_chappu).fold(f64::MAX, f64::min);
            if hi - lo < stabilization.epsilon {
                stabilized_at = Some(layer);
            }
        }
    }
    Ok(LayerTrace {
        snapshots,
        stabilized_at,
        final_profile: profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membrane::Ring;

    fn base() -> RadialDensityProfile {
        RadialDensityProfile::uniform(0.1, 1500.0, 0.2).unwrap()
    }

    fn step(r: f64, d: f64) -> LayerStep {
        LayerStep {
            layer_radius_fraction: r,
            areal_density_increment: d,
        }
    }

    #[test]
    fn weightless_layers_stabilize_immediately() {
        let t = simulate_layers(&base(), &[step(0.4, 0.0); 4], &Stabilization::default()).unwrap();
        assert_eq!(t.stabilized_at, Some(3));
        assert_eq!(t.snapshots.len(), 5);
        let r = t.ratios();
        assert!(r.iter().all(|x| (x - r[0]).abs() < 1e-12));
    }

    #[test]
    fn every_layer_lowers_every_mode() {
        let steps = [step(0.5, 0.2), step(0.3, 0.1), step(0.5, 0.05), step(0.2, 0.3)];
        let t = simulate_layers(&base(), &steps, &Stabilization::default()).unwrap();
        for w in t.snapshots.windows(2) {
            for mode in w[1].modes.modes() {
                let before = w[0].modes.find(mode.m, mode.n).unwrap().frequency_hz;
                assert!(
                    mode.frequency_hz < before,
                    "layer {} ({}, {})",
                    w[1].layer,
                    mode.m,
                    mode.n
                );
            }
        }
    }

    #[test]
    fn final_profile_matches_a_direct_build() {
        let steps = [step(0.5, 0.2), step(0.25, 0.1)];
        let t = simulate_layers(&base(), &steps, &Stabilization::default()).unwrap();
        let direct = RadialDensityProfile::new(
            0.1,
            1500.0,
            vec![Ring::new(0.25, 0.5), Ring::new(0.5, 0.4), Ring::new(1.0, 0.2)],
        )
        .unwrap();
        let a = lowest_modes_of(&t.final_profile);
        let b = lowest_modes_of(&direct);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * x);
        }
        assert!(t.to_csv().starts_with("layer,f_dheem_hz,f_chappu_hz,ratio\n0,"));
    }

    fn lowest_modes_of(p: &RadialDensityProfile) -> Vec<f64> {
        crate::membrane::lowest_modes(p, 6).unwrap().frequencies()
    }

    #[test]
    fn bad_input_is_rejected() {
        let s = Stabilization::default();
        assert!(simulate_layers(&base(), &[], &s).is_err());
        assert!(simulate_layers(&base(), &[step(1.0, 0.1)], &s).is_err());
        assert!(simulate_layers(&base(), &[step(0.5, -0.1)], &s).is_err());
        let loose = Stabilization {
            epsilon: 0.0,
            window: 3,
        };
        assert!(simulate_layers(&base(), &[step(0.5, 0.1)], &loose).is_err());
    }
}
