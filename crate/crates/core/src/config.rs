//! Bundled defaults: profiles, stroke templates, the layer sequence, the
//! left-head mode table and sample materials. Every file can be replaced
//! by one of the same name in an override directory.

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loading::{LayerStep, ASSESSED_MODES};
use crate::materials::{load_samples_csv, MaterialSample};
use crate::membrane::{lowest_modes, Mode, ModeTable, RadialDensityProfile};
use crate::synth::{Head, StrokeName, StrokeTemplate};

/// Environment variable naming an override directory.
pub const CONFIG_ENV: &str = "MEMBRANE_LAB_CONFIG";

pub const UNIFORM_PROFILE: &str = "profiles/uniform.json";
pub const HARMONIC_PROFILE: &str = "profiles/harmonic_two_region.json";
pub const LAYER_SEQUENCE: &str = "layers/alternating.json";
pub const LEFT_HEAD: &str = "left_head.json";
pub const MATERIALS: &str = "materials.csv";

const EMBEDDED: &[(&str, &str)] = &[
    (UNIFORM_PROFILE, include_str!("../../../config/profiles/uniform.json")),
    (
        HARMONIC_PROFILE,
        include_str!("../../../config/profiles/harmonic_two_region.json"),
    ),
    (LAYER_SEQUENCE, include_str!("../../../config/layers/alternating.json")),
    (LEFT_HEAD, include_str!("../../../config/left_head.json")),
    (MATERIALS, include_str!("../../../config/materials.csv")),
    ("strokes/dheem.json", include_str!("../../../config/strokes/dheem.json")),
    (
        "strokes/chappu.json",
        include_str!("../../../config/strokes/chappu.json"),
    ),
    ("strokes/nam.json", include_str!("../../../config/strokes/nam.json")),
    (
        "strokes/araichappu.json",
        include_str!("../../../config/strokes/araichappu.json"),
    ),
    ("strokes/dhi.json", include_str!("../../../config/strokes/dhi.json")),
    ("strokes/ta.json", include_str!("../../../config/strokes/ta.json")),
    ("strokes/thom.json", include_str!("../../../config/strokes/thom.json")),
    (
        "strokes/gumkki.json",
        include_str!("../../../config/strokes/gumkki.json"),
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeftHeadMode {
    pub m: u32,
    pub n: u32,
    pub ratio: f64,
}

/// The unloaded bass head, given as ratios to its own fundamental, which
/// sits at `fundamental_to_tonic` times the right-head tonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftHead {
    pub fundamental_to_tonic: f64,
    pub modes: Vec<LeftHeadMode>,
}

impl LeftHead {
    pub fn from_json(text: &str) -> Result<Self> {
        let head: LeftHead = serde_json::from_str(text)?;
        if !(head.fundamental_to_tonic > 0.0) || head.modes.is_empty() || head.modes.iter().any(|m| !(m.ratio > 0.0)) {
            return Err(Error::InvalidInput(
                "left head needs a positive scale and positive ratios".into(),
            ));
        }
        Ok(head)
    }

    pub fn mode_table(&self, tonic_hz: f64) -> Result<ModeTable> {
        if !(tonic_hz > 0.0 && tonic_hz.is_finite()) {
            return Err(Error::NonPositiveFrequency(tonic_hz));
        }
        let f0 = self.fundamental_to_tonic * tonic_hz;
        let mut h = std::collections::hash_map::DefaultHasher::new();
        "left".hash(&mut h);
        f0.to_bits().hash(&mut h);
        let modes = self
            .modes
            .iter()
            .map(|m| {
                m.ratio.to_bits().hash(&mut h);
                Mode {
                    m: m.m,
                    n: m.n,
                    frequency_hz: m.ratio * f0,
                }
            })
            .collect();
        ModeTable::new(h.finish(), modes)
    }
}

/// Implied fundamental (half the second mode) of `profile`.
pub fn tonic_of(profile: &RadialDensityProfile) -> Result<f64> {
    let f = lowest_modes(profile, 2)?.frequencies();
    Ok(f[1] / 2.0)
}

/// `profile` with its tension rescaled so the implied fundamental is
/// `tonic_hz`. Frequencies scale with `√T`, so ratios are unchanged.
pub fn tuned_to(profile: &RadialDensityProfile, tonic_hz: f64) -> Result<RadialDensityProfile> {
    if !(tonic_hz > 0.0 && tonic_hz.is_finite()) {
        return Err(Error::NonPositiveFrequency(tonic_hz));
    }
    let scale = tonic_hz / tonic_of(profile)?;
    RadialDensityProfile::new(
        profile.membrane_radius(),
        profile.tension() * scale * scale,
        profile.rings().to_vec(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub uniform_profile: RadialDensityProfile,
    pub harmonic_profile: RadialDensityProfile,
    pub layer_steps: Vec<LayerStep>,
    pub left_head: LeftHead,
    pub materials: Vec<MaterialSample>,
    pub templates: BTreeMap<StrokeName, StrokeTemplate>,
    /// Where overrides were read from, if anywhere.
    pub source: Option<PathBuf>,
}

impl Bundle {
    /// The defaults compiled into the library.
    pub fn embedded() -> Result<Self> {
        Self::build(None)
    }

    /// Files present under `dir` replace the embedded ones.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "config directory not found"),
            ));
        }
        Self::build(Some(dir))
    }

    /// Reads the override directory from [`CONFIG_ENV`] when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(dir) if !dir.is_empty() => Self::from_dir(PathBuf::from(dir)),
            _ => Self::embedded(),
        }
    }

    fn build(dir: Option<&Path>) -> Result<Self> {
        let read = |name: &str| -> Result<String> {
            if let Some(dir) = dir {
                let path = dir.join(name);
                if path.is_file() {
                    return std::fs::read_to_string(&path).map_err(|e| Error::io(path, e));
                }
            }
            let (_, text) = EMBEDDED.iter().find(|(n, _)| *n == name).expect("embedded config file");
            Ok((*text).to_string())
        };
        let mut templates = BTreeMap::new();
        for name in StrokeName::ALL {
            let t = StrokeTemplate::from_json(&read(&format!("strokes/{name}.json"))?)?;
            if t.name != name {
                return Err(Error::InvalidInput(format!(
                    "strokes/{name}.json holds template {}",
                    t.name
                )));
            }
            templates.insert(name, t);
        }
        Ok(Self {
            uniform_profile: RadialDensityProfile::from_json(&read(UNIFORM_PROFILE)?)?,
            harmonic_profile: RadialDensityProfile::from_json(&read(HARMONIC_PROFILE)?)?,
            layer_steps: LayerStep::list_from_json(&read(LAYER_SEQUENCE)?)?,
            left_head: LeftHead::from_json(&read(LEFT_HEAD)?)?,
            materials: load_samples_csv(&read(MATERIALS)?)?,
            templates,
            source: dir.map(Path::to_path_buf),
        })
    }

    pub fn template(&self, name: StrokeName) -> &StrokeTemplate {
        &self.templates[&name]
    }

    /// Modes a template for `head` indexes into. The right head is the
    /// bundled harmonic profile retuned to `tonic_hz` (its own tonic when
    /// `None`); the left head follows the same tonic.
    pub fn mode_table(&self, head: Head, tonic_hz: Option<f64>) -> Result<ModeTable> {
        head_modes(&self.harmonic_profile, &self.left_head, head, tonic_hz)
    }
}

/// Mode table for `head` given the right-head `profile`; see
/// [`Bundle::mode_table`].
pub fn head_modes(
    profile: &RadialDensityProfile,
    left: &LeftHead,
    head: Head,
    tonic_hz: Option<f64>,
) -> Result<ModeTable> {
    match head {
        Head::Right => {
            let p = match tonic_hz {
                Some(t) => tuned_to(profile, t)?,
                None => profile.clone(),
            };
            lowest_modes(&p, ASSESSED_MODES)
        }
        Head::Left => {
            let tonic = match tonic_hz {
                Some(t) => t,
                None => tonic_of(profile)?,
            };
            left.mode_table(tonic)
        }
    }
}
