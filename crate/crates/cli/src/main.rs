use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use membrane_lab::analysis::{analyze, classify_stroke, extract_features, AnalysisConfig, Window};
use membrane_lab::config::{head_modes, tonic_of, Bundle};
use membrane_lab::format::{round_json, sig9};
use membrane_lab::loading::{
    optimize_graded, optimize_two_region, simulate_layers, GradedBounds, LayerStep, SearchOptions, Stabilization,
    TwoRegionBounds,
};
use membrane_lab::materials::{load_samples_csv, MaterialsReport};
use membrane_lab::membrane::lowest_modes;
use membrane_lab::synth::{read_wav, render_stroke, write_wav, RenderSpec, StrokeName, StrokeTemplate};
use membrane_lab::{Error, RadialDensityProfile};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "membrane-lab",
    version,
    about = "Loaded drum membranes: modes, loading design, synthesis and analysis"
)]
struct Cli {
    /// Config directory overriding the bundled defaults (also MEMBRANE_LAB_CONFIG).
    #[arg(long, global = true, value_name = "DIR")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Output {
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest modes of a density profile (bundled uniform profile if omitted).
    Modes {
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 13)]
        count: usize,
        /// Retune the profile so its implied fundamental is this (Hz).
        #[arg(long)]
        tonic: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Search a central loading patch that makes the overtones harmonic.
    Optimize {
        /// Refine the two-region optimum with a graded staircase.
        #[arg(long)]
        graded: bool,
        /// Uniform base membrane (bundled uniform profile if omitted).
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 5)]
        overtones: u32,
        /// Grid points per axis (shrunk to fit half the budget).
        #[arg(long, default_value_t = 24)]
        grid: usize,
        #[arg(long, default_value_t = 32)]
        rings: usize,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [0.1, 0.9])]
        fraction: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1.0, 25.0])]
        ratio: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [0.5, 2.0])]
        mass_factor: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [0.0, 3.0])]
        taper: Vec<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Apply loading layers one by one and trace the dheem/chappu ratio.
    Layers {
        profile: Option<PathBuf>,
        steps: Option<PathBuf>,
        #[arg(long, default_value_t = 0.002)]
        epsilon: f64,
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Render a stroke template on a profile's modes to a WAV file.
    Synth {
        profile: PathBuf,
        /// Template JSON file, or the name of a bundled stroke.
        template: String,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        #[arg(long)]
        tonic: Option<f64>,
        #[arg(long, default_value_t = 44100)]
        sample_rate: u32,
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = 0.9)]
        peak: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Spectral report of a single-stroke recording.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        analysis: AnalysisFlags,
        #[command(flatten)]
        out: Output,
    },
    /// Label a single-stroke recording.
    Classify {
        input: PathBuf,
        #[command(flatten)]
        analysis: AnalysisFlags,
        #[command(flatten)]
        out: Output,
    },
    /// Rank resonator woods by sound radiation coefficient.
    Materials {
        samples: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct AnalysisFlags {
    #[arg(long, default_value_t = 1 << 16)]
    fft_size: usize,
    #[arg(long, value_enum, default_value = "hann")]
    window: WindowArg,
    #[arg(long, default_value_t = 12.0)]
    min_prominence_db: f64,
    #[arg(long, default_value_t = 16)]
    max_peaks: usize,
    /// Discard peaks more than this far below the strongest one.
    #[arg(long, default_value_t = 60.0)]
    dynamic_range_db: f64,
    #[arg(long, default_value_t = 0.01)]
    rms_window: f64,
    /// Tolerance on dheem over the implied fundamental (target 1.07).
    #[arg(long, default_value_t = 0.05)]
    shift_tol: f64,
    /// Tolerance on dheem over chappu (target 0.534).
    #[arg(long, default_value_t = 0.005)]
    dheem_chappu_tol: f64,
    /// Tolerance on nam over chappu (target 1.5).
    #[arg(long, default_value_t = 0.012)]
    nam_chappu_tol: f64,
    /// Right-head tonic in Hz; enables the thom rule.
    #[arg(long)]
    tonic: Option<f64>,
    #[arg(long, default_value_t = 25.0)]
    tonal_prominence_db: f64,
    #[arg(long, default_value_t = 5.0)]
    slow_decay: f64,
    #[arg(long, default_value_t = 0.03)]
    drift_threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    max_ratio_error: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WindowArg {
    Hann,
    Rect,
}

impl AnalysisFlags {
    fn config(&self) -> AnalysisConfig {
        let mut c = AnalysisConfig {
            fft_size: self.fft_size,
            window: match self.window {
                WindowArg::Hann => Window::Hann,
                WindowArg::Rect => Window::Rect,
            },
            min_prominence_db: self.min_prominence_db,
            max_peaks: self.max_peaks,
            dynamic_range_db: self.dynamic_range_db,
            rms_window_s: self.rms_window,
            ..AnalysisConfig::default()
        };
        c.bands.dheem_to_fundamental.tolerance = self.shift_tol;
        c.bands.dheem_to_chappu.tolerance = self.dheem_chappu_tol;
        c.bands.nam_to_chappu.tolerance = self.nam_chappu_tol;
        c.classifier.tonic_hz = self.tonic;
        c.classifier.tonal_prominence_db = self.tonal_prominence_db;
        c.classifier.slow_decay = self.slow_decay;
        c.classifier.drift_threshold = self.drift_threshold;
        c.classifier.max_ratio_error = self.max_ratio_error;
        c
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_DATA },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.lines().next().unwrap_or_default());
            ExitCode::from(f.code)
        }
    }
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_DATA,
            message: format!("{}: no such file", path.display()),
        })
    }
}

fn require_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(Failure {
            code: EXIT_DATA,
            message: format!("{}: output directory does not exist", p.display()),
        }),
        _ => Ok(()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("{}: {e}", path.display()),
    })
}

fn bundle(dir: Option<&Path>) -> Result<Bundle, Failure> {
    Ok(match dir {
        Some(d) => Bundle::from_dir(d)?,
        None => Bundle::from_env()?,
    })
}

fn profile_or(path: Option<&Path>, default: &RadialDensityProfile) -> Result<RadialDensityProfile, Failure> {
    match path {
        Some(p) => Ok(RadialDensityProfile::from_json(&read(p)?)?),
        None => Ok(default.clone()),
    }
}

fn pair(v: &[f64]) -> (f64, f64) {
    (v[0], v[1])
}

fn pretty(mut value: serde_json::Value) -> String {
    round_json(&mut value);
    serde_json::to_string_pretty(&value).expect("json serializes") + "\n"
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn emit(out: &Output, text: String) -> Result<(), Failure> {
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure {
            code: EXIT_DATA,
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_inputs(cli: &Cli) -> Result<(), Failure> {
    let (inputs, outputs): (Vec<&Path>, Vec<&Path>) = match &cli.command {
        Command::Modes { profile, out, .. } => (
            profile.iter().map(|p| p.as_path()).collect(),
            out.output.iter().map(|p| p.as_path()).collect(),
        ),
        Command::Optimize { profile, out, .. } => (
            profile.iter().map(|p| p.as_path()).collect(),
            out.output.iter().map(|p| p.as_path()).collect(),
        ),
        Command::Layers {
            profile, steps, out, ..
        } => (
            profile.iter().chain(steps.iter()).map(|p| p.as_path()).collect(),
            out.output.iter().map(|p| p.as_path()).collect(),
        ),
        Command::Synth {
            profile,
            template,
            output,
            ..
        } => {
            let mut inputs = vec![profile.as_path()];
            if template.parse::<StrokeName>().is_err() || Path::new(template).is_file() {
                inputs.push(Path::new(template));
            }
            (inputs, vec![output.as_path()])
        }
        Command::Analyze { input, out, .. } | Command::Classify { input, out, .. } => {
            (vec![input.as_path()], out.output.iter().map(|p| p.as_path()).collect())
        }
        Command::Materials { samples, out } => (
            samples.iter().map(|p| p.as_path()).collect(),
            out.output.iter().map(|p| p.as_path()).collect(),
        ),
    };
    inputs.into_iter().try_for_each(require_file)?;
    outputs.into_iter().try_for_each(require_parent)
}

fn run(cli: Cli) -> Result<(), Failure> {
    check_inputs(&cli)?;
    let config_dir = cli.config.as_deref();
    match cli.command {
        Command::Modes {
            profile,
            count,
            tonic,
            out,
        } => {
            if count == 0 || count > 13 {
                return Err(usage("--count must lie in [1, 13]"));
            }
            let b = bundle(config_dir)?;
            let mut p = profile_or(profile.as_deref(), &b.uniform_profile)?;
            if let Some(t) = tonic {
                p = membrane_lab::config::tuned_to(&p, t)?;
            }
            let table = lowest_modes(&p, count)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => table.to_csv_with_ratios(),
                Format::Json => {
                    let f0 = table.modes()[0].frequency_hz;
                    pretty(json!({
                        "modes": table.modes().iter().map(|m| json!({
                            "m": m.m, "n": m.n, "frequency_hz": m.frequency_hz, "ratio": m.frequency_hz / f0,
                        })).collect::<Vec<_>>(),
                    }))
                }
            };
            emit(&out, text)
        }
        Command::Optimize {
            graded,
            profile,
            seed,
            budget,
            overtones,
            grid,
            rings,
            fraction,
            ratio,
            mass_factor,
            taper,
            out,
        } => {
            let b = bundle(config_dir)?;
            let base = profile_or(profile.as_deref(), &b.uniform_profile)?;
            let options = SearchOptions {
                overtones,
                budget,
                grid,
                seed,
            };
            let bounds = TwoRegionBounds {
                fraction: pair(&fraction),
                ratio: pair(&ratio),
            };
            let mut report = optimize_two_region(&base, &bounds, &options)?;
            if graded {
                let gb = GradedBounds {
                    mass_factor: pair(&mass_factor),
                    taper: pair(&taper),
                };
                report = optimize_graded(&base, &report.candidate, rings, &gb, &options)?;
            }
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => with_newline(report.to_json()),
                Format::Csv => {
                    let mut s = String::from("key,value\n");
                    let mut row = |k: &str, v: String| s.push_str(&format!("{k},{v}\n"));
                    row("method", report.method.clone());
                    row("patch_radius_fraction", sig9(report.candidate.patch_radius_fraction));
                    row("density_ratio", sig9(report.candidate.density_ratio));
                    if let Some(g) = report.graded {
                        row("rings", g.rings.to_string());
                        row("mass_factor", sig9(g.mass_factor));
                        row("taper", sig9(g.taper));
                    }
                    row("score", sig9(report.score));
                    row("shift", sig9(report.shift));
                    row("grid_best_score", sig9(report.grid_best_score));
                    row("evaluations", report.evaluations.to_string());
                    row("budget_exhausted", report.budget_exhausted.to_string());
                    s
                }
            };
            emit(&out, text)
        }
        Command::Layers {
            profile,
            steps,
            epsilon,
            window,
            out,
        } => {
            let b = bundle(config_dir)?;
            let p = profile_or(profile.as_deref(), &b.uniform_profile)?;
            let steps = match steps {
                Some(s) => LayerStep::list_from_json(&read(&s)?)?,
                None => b.layer_steps.clone(),
            };
            let trace = simulate_layers(&p, &steps, &Stabilization { epsilon, window })?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => trace.to_csv(),
                Format::Json => pretty(json!({
                    "layers": trace.snapshots.iter().map(|s| json!({
                        "layer": s.layer,
                        "f_dheem_hz": s.f_dheem_hz,
                        "f_chappu_hz": s.f_chappu_hz,
                        "ratio": s.dheem_to_chappu,
                    })).collect::<Vec<_>>(),
                    "stabilized_at": trace.stabilized_at,
                    "stabilized_ratio": trace.stabilized_at.map(|l| trace.snapshots[l].dheem_to_chappu),
                })),
            };
            emit(&out, text)
        }
        Command::Synth {
            profile,
            template,
            output,
            tonic,
            sample_rate,
            duration,
            peak,
            seed,
        } => {
            let b = bundle(config_dir)?;
            let p = RadialDensityProfile::from_json(&read(&profile)?)?;
            let template = if Path::new(&template).is_file() {
                StrokeTemplate::from_json(&read(Path::new(&template))?)?
            } else {
                let name: StrokeName = template
                    .parse()
                    .map_err(|_| usage(format!("unknown stroke {template}")))?;
                b.template(name).clone()
            };
            let spec = RenderSpec {
                sample_rate,
                duration_s: duration,
                peak_amplitude: peak,
                seed,
            };
            spec.validate()?;
            let tonic = match tonic {
                Some(t) => t,
                None => tonic_of(&p)?,
            };
            let modes = head_modes(&p, &b.left_head, template.head, Some(tonic))?;
            let samples = render_stroke(&modes, &template, &spec)?;
            write_wav(&samples, sample_rate, &output)?;
            Ok(())
        }
        Command::Analyze { input, analysis, out } => {
            let (samples, rate) = read_wav(&input)?;
            let report = analyze(&samples, rate, &analysis.config())?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => with_newline(report.to_json()),
                Format::Csv => {
                    let mut s = String::from("frequency_hz,magnitude,prominence_db\n");
                    for p in &report.peaks {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            sig9(p.frequency_hz),
                            sig9(p.magnitude),
                            sig9(p.prominence_db)
                        ));
                    }
                    s
                }
            };
            emit(&out, text)
        }
        Command::Classify { input, analysis, out } => {
            let (samples, rate) = read_wav(&input)?;
            let config = analysis.config();
            let features = extract_features(&samples, rate, &config)?;
            let (label, confidence) = match classify_stroke(&features, &config.classifier) {
                Ok(c) => (c.label.to_string(), c.confidence),
                Err(Error::Unclassifiable) => ("unknown".to_string(), 0.0),
                Err(e) => return Err(e.into()),
            };
            let text = match out.format {
                Some(Format::Json) => pretty(json!({ "label": label, "confidence": confidence })),
                Some(Format::Csv) => format!("label,confidence\n{label},{}\n", sig9(confidence)),
                None => format!("{label} {}\n", sig9(confidence)),
            };
            emit(&out, text)
        }
        Command::Materials { samples, out } => {
            let b = bundle(config_dir)?;
            let samples = match samples {
                Some(p) => load_samples_csv(&read(&p)?)?,
                None => b.materials.clone(),
            };
            let report = MaterialsReport::new(&samples)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => with_newline(report.to_json()),
                Format::Csv => report.to_csv(),
            };
            emit(&out, text)
        }
    }
}
