use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tlsgap::harness::{emit_plot_data, run_preset, sweep, ExperimentConfig, Preset, RunManifest, SweepAxis, OUTPUT_DIR_ENV};
use tlsgap::dynamics::{build_generator, fit_qubit_t1, propagate, GapApplication};
use tlsgap::ensemble::{sample_ensemble, TlsEnsemble};
use tlsgap::integrate::uniform_grid;
use tlsgap::{Error, Result};

#[derive(Parser)]
#[command(name = "tlsgap", version, about = "Defect-loss simulations for qubits in a phononic gap")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one preset.
    Run {
        /// Preset name; overrides the preset named in --config.
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
        /// Skip writing plot tables.
        #[arg(long)]
        no_plot: bool,
    },
    /// Run a Cartesian product of parameter values.
    Sweep {
        #[arg(long)]
        preset: Option<String>,
        /// `dotted.key=v1,v2,...`; repeat for more dimensions.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List the built-in presets.
    ListPresets,
    /// Sample the configured defect ensemble and write it as CSV.
    Sample {
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate a qubit coupled to an ensemble read from CSV.
    Propagate {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seconds.
        #[arg(long, default_value_t = 100e-6)]
        horizon: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        /// Multiply every defect lifetime by this factor.
        #[arg(long)]
        t1_factor: Option<f64>,
    },
    /// Print the fully merged configuration as TOML.
    ShowConfig {
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file overriding preset defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// First seed; the configured seed count is kept.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

/// Every failure here is reported as a configuration error.
fn load(preset: Option<&str>, common: &Common) -> Result<ExperimentConfig> {
    load_inner(preset, common).map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })
}

fn load_inner(preset: Option<&str>, common: &Common) -> Result<ExperimentConfig> {
    let preset = preset.map(Preset::parse).transpose()?;
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_toml_file(path, preset)?,
        None => ExperimentConfig::for_preset(
            preset.ok_or_else(|| Error::Config("name a preset or pass --config".into()))?,
        ),
    };
    if let Some(dir) = &common.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(s) = common.seed {
        let n = config.seeds.len() as u64;
        config.seeds = (s..s + n).collect();
        config.ensemble.seed = s;
    }
    if let Some(j) = common.jobs {
        config.jobs = j;
    }
    if let Some(t) = common.tolerance {
        config.tolerance = t;
    }
    config.validate()?;
    Ok(config)
}

fn report(manifest: &RunManifest) {
    let out = serde_json::json!({
        "preset": manifest.preset,
        "output_dir": manifest.output_dir,
        "files": manifest.files.len(),
        "failures": manifest.failures.len(),
        "wall_clock_s": manifest.wall_clock_s,
    });
    println!("{out}");
    for f in &manifest.failures {
        eprintln!("seed {} ({}) failed: {}", f.seed, f.context, f.error);
    }
}

/// `Ok(false)` when the run finished but some seeds failed.
fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::ListPresets => {
            for p in Preset::ALL {
                println!("{:<16} {}", p.name(), p.description());
            }
        }
        Command::Sample { preset, common, out } => {
            let config = load(preset.as_deref(), &common)?;
            let ensemble = sample_ensemble(&config.ensemble)?;
            let file = File::create(&out).map_err(|e| Error::MissingInput(format!("{}: {e}", out.display())))?;
            ensemble.write_csv(BufWriter::new(file))?;
            println!("{}", serde_json::json!({ "out": out, "n_tls": ensemble.members.len(), "seed": ensemble.seed_used }));
        }
        Command::Propagate { ensemble, out, horizon, points, tolerance, t1_factor } => {
            if !(horizon > 0.0) || points < 2 {
                return Err(Error::Config("horizon must be positive and points at least 2".into()));
            }
            let file = File::open(&ensemble).map_err(|e| Error::MissingInput(format!("{}: {e}", ensemble.display())))?;
            let ens = TlsEnsemble::read_csv(BufReader::new(file))?;
            let gap = match t1_factor {
                Some(f) => GapApplication::Isotropic { t1_factor: f },
                None => GapApplication::None,
            };
            let generator = build_generator(&ens, &gap)?;
            let trace = propagate(&generator, &uniform_grid(horizon, points), tolerance)?;
            let file = File::create(&out).map_err(|e| Error::MissingInput(format!("{}: {e}", out.display())))?;
            trace.write_csv(BufWriter::new(file))?;
            let fit = fit_qubit_t1(&trace);
            println!("{}", serde_json::json!({ "out": out, "fit": fit }));
        }
        Command::ShowConfig { preset, common } => {
            print!("{}", load(preset.as_deref(), &common)?.to_toml_string()?);
        }
        Command::Run { preset, common, no_plot } => {
            let config = load(preset.as_deref(), &common)?;
            let mut manifest = run_preset(&config)?;
            if !no_plot {
                plot(&mut manifest)?;
            }
            report(&manifest);
            return Ok(manifest.failures.is_empty());
        }
        Command::Sweep { preset, axes, common } => {
            let config = load(preset.as_deref(), &common)?;
            let axes = axes.iter().map(|a| SweepAxis::parse(a)).collect::<Result<Vec<_>>>()?;
            let mut manifest = sweep(&config, &axes)?;
            plot(&mut manifest)?;
            report(&manifest);
            return Ok(manifest.failures.is_empty());
        }
    }
    Ok(true)
}

/// Plot tables are optional when every seed failed and nothing is left to plot.
fn plot(manifest: &mut RunManifest) -> Result<()> {
    match emit_plot_data(manifest) {
        Err(Error::MissingInput(_)) if !manifest.failures.is_empty() => Ok(()),
        other => other.map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            let summary = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{summary}");
            if matches!(e, Error::Config(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
