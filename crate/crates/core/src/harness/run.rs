use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{apply_axis, ExperimentConfig, Preset, SweepAxis};
use super::manifest::{write_file, FileEntry, RunManifest, SeedFailure, MANIFEST_FILE};
use crate::dynamics::fit::median;
use crate::dynamics::{build_generator, fit_decay, fit_qubit_t1, propagate, quality_factor, QubitTrace, T1Fit};
use crate::ensemble::sample_ensemble;
use crate::error::{Error, Result};
use crate::gap::{angular_average, gapped_decay, t1_enhancement, AngularWeight, SpectralDensity, SuppressionCurve};
use crate::integrate::{uniform_grid, SOLVER_NAME};
use crate::rng::{derive_seed, RNG_ALGORITHM};
use crate::steady_state::{power_sweep, write_sweep_csv};
use crate::table::{write_numeric_table, write_table};

/// Named scalar results of one preset run, in a fixed order. Non-finite or
/// unavailable values are `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub metrics: Vec<(String, Option<f64>)>,
}

impl Summary {
    fn push(&mut self, name: impl Into<String>, value: Option<f64>) {
        self.metrics.push((name.into(), value.filter(|v| v.is_finite())));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).and_then(|(_, v)| *v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.metrics.iter().any(|(n, _)| n == name)
    }
}

struct Outcome {
    files: Vec<FileEntry>,
    failures: Vec<SeedFailure>,
    summary: Summary,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Prepare `dir` for a fresh run: create it, or clear files recorded by a
/// previous manifest. Refuses directories holding unrelated files.
fn prepare_output_dir(dir: &Path) -> Result<()> {
    if !dir.exists() {
        return fs::create_dir_all(dir).map_err(|e| Error::io(dir, e));
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        let old = RunManifest::load(&manifest_path)?;
        for f in &old.files {
            let p = dir.join(&f.path);
            if p.exists() {
                fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
            }
        }
        fs::remove_file(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        remove_empty_dirs(dir)?;
    }
    let nonempty = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_some();
    if nonempty {
        return Err(Error::Config(format!(
            "output directory {} contains files not produced by a previous run",
            dir.display()
        )));
    }
    Ok(())
}

fn remove_empty_dirs(dir: &Path) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            remove_empty_dirs(&path)?;
            if fs::read_dir(&path).map_err(|e| Error::io(&path, e))?.next().is_none() {
                fs::remove_dir(&path).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    Ok(())
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("tlsgap".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("integrator".to_string(), SOLVER_NAME.to_string()),
        ("rng".to_string(), RNG_ALGORITHM.to_string()),
    ])
}

/// Run one preset end to end and write its data files plus `manifest.json`
/// into `config.output_dir`.
pub fn run_preset(config: &ExperimentConfig) -> Result<RunManifest> {
    config.validate()?;
    let start = Instant::now();
    let dir = &config.output_dir;
    prepare_output_dir(dir)?;
    let outcome = pool(config.jobs)?.install(|| execute(config, dir, ""))?;
    let mut config_json = serde_json::to_value(config).map_err(|e| Error::Config(e.to_string()))?;
    config_json["summary"] = serde_json::to_value(&outcome.summary).map_err(|e| Error::Config(e.to_string()))?;
    let manifest = RunManifest {
        preset: config.preset.name().to_string(),
        output_dir: dir.clone(),
        config: config_json,
        files: outcome.files,
        failures: outcome.failures,
        wall_clock_s: start.elapsed().as_secs_f64(),
        versions: versions(),
    };
    manifest.save()?;
    Ok(manifest)
}

/// Summary recorded in a manifest by [`run_preset`].
impl RunManifest {
    pub fn summary(&self) -> Summary {
        serde_json::from_value(self.config["summary"].clone()).unwrap_or_default()
    }
}

/// Cartesian product of `axes` over `config`. Point `i` runs in
/// `point_{i:04}/` with every seed replaced by `derive_seed(seed, i)`, and
/// its summary metrics are collected into the long-format `sweep.csv`.
pub fn sweep(config: &ExperimentConfig, axes: &[SweepAxis]) -> Result<RunManifest> {
    config.validate()?;
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::Config("sweep needs at least one axis with values".into()));
    }
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    let configs = points
        .iter()
        .enumerate()
        .map(|(i, values)| {
            let mut c = config.clone();
            for (axis, &v) in axes.iter().zip(values) {
                c = apply_axis(&c, &axis.key, v)?;
            }
            let idx = i as u64;
            c.seeds = c.seeds.iter().map(|&s| derive_seed(s, idx)).collect();
            c.ensemble.seed = derive_seed(c.ensemble.seed, idx);
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;

    let start = Instant::now();
    let dir = &config.output_dir;
    prepare_output_dir(dir)?;
    let workers = pool(config.jobs)?;
    let mut files = Vec::new();
    let mut failures = Vec::new();
    let mut long_rows = Vec::new();
    let mut point_rows = Vec::new();
    for (i, (c, values)) in configs.iter().zip(&points).enumerate() {
        let prefix = format!("point_{i:04}/");
        let out = workers.install(|| execute(c, dir, &prefix))?;
        files.extend(out.files);
        failures.extend(out.failures.into_iter().map(|mut f| {
            f.context = format!("{prefix}{}", f.context);
            f
        }));
        for (name, value) in &out.summary.metrics {
            let mut row = vec![i.to_string()];
            row.extend(values.iter().map(|v| v.to_string()));
            row.push(name.clone());
            row.push(opt(*value));
            long_rows.push(row);
        }
        let mut row = vec![i.to_string()];
        row.extend(values.iter().map(|v| v.to_string()));
        row.push(c.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "));
        row.push(c.ensemble.seed.to_string());
        point_rows.push(row);
    }
    let axis_keys: Vec<&str> = axes.iter().map(|a| a.key.as_str()).collect();
    let mut cols = vec!["point"];
    cols.extend(&axis_keys);
    let mut long_cols = cols.clone();
    long_cols.extend(["metric", "value"]);
    let mut point_cols = cols;
    point_cols.extend(["seeds", "ensemble_seed"]);
    files.push(write_file(dir, "sweep.csv", &csv_bytes(|b| write_table(b, &[], &long_cols, long_rows))?)?);
    files.push(write_file(dir, "sweep_points.csv", &csv_bytes(|b| write_table(b, &[], &point_cols, point_rows))?)?);

    let snapshot = serde_json::json!({ "base": config, "axes": axes });
    let manifest = RunManifest {
        preset: format!("sweep:{}", config.preset.name()),
        output_dir: dir.clone(),
        config: snapshot,
        files,
        failures,
        wall_clock_s: start.elapsed().as_secs_f64(),
        versions: versions(),
    };
    manifest.save()?;
    Ok(manifest)
}

fn execute(config: &ExperimentConfig, dir: &Path, prefix: &str) -> Result<Outcome> {
    match config.preset {
        Preset::Fig3 => run_decay(config, dir, prefix, &config.fig3_depths, "fig3_depth_", "fig3_summary.csv"),
        Preset::Custom => run_decay(config, dir, prefix, &[config.gap.depth], "decay", "summary.csv"),
        Preset::Fig4a | Preset::Fig4b => run_heatmap(config, dir, prefix),
        Preset::BulkValidation => run_bulk(config, dir, prefix),
        Preset::AngularAverage => run_angular(config, dir, prefix),
        Preset::LossSweep => run_loss(config, dir, prefix),
    }
}

fn run_decay(
    config: &ExperimentConfig,
    dir: &Path,
    prefix: &str,
    depths: &[f64],
    stem: &str,
    summary_name: &str,
) -> Result<Outcome> {
    let rate = 1.0 / config.ensemble.t1_min;
    let traces = depths
        .par_iter()
        .map(|&depth| {
            let gap = crate::gap::GapSpec { depth, ..config.gap };
            let sd = SpectralDensity::new(rate, gap)?;
            gapped_decay(&sd, config.ensemble.qubit_frequency, config.horizon, config.output_points, config.tolerance)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut files = Vec::new();
    let mut summary = Summary::default();
    let mut rows = Vec::new();
    for (&depth, trace) in depths.iter().zip(&traces) {
        let name = if depths.len() == 1 && config.preset == Preset::Custom {
            format!("{stem}.csv")
        } else {
            format!("{stem}{depth}.csv")
        };
        files.push(write_file(dir, &format!("{prefix}{name}"), &csv_bytes(|b| trace.write_csv(b))?)?);
        let fit = fit_decay(&trace.times, &trace.excited_probability);
        let fitted = fit.t1;
        let ratio = fitted.map(|t| t * rate);
        let formula = t1_enhancement(depth).ok();
        let crossing = trace.one_over_e_time();
        let tag = if config.preset == Preset::Custom {
            String::new()
        } else {
            format!("@depth={depth}")
        };
        summary.push(format!("fitted_t1_s{tag}"), fitted);
        summary.push(format!("fitted_enhancement{tag}"), ratio);
        summary.push(format!("one_over_e_s{tag}"), crossing);
        rows.push(vec![depth.to_string(), opt(formula), opt(crossing), opt(fitted), opt(ratio)]);
    }
    let cols = ["depth", "enhancement_formula", "one_over_e_s", "fitted_t1_s", "fitted_enhancement"];
    files.push(write_file(
        dir,
        &format!("{prefix}{summary_name}"),
        &csv_bytes(|b| write_table(b, &[], &cols, rows))?,
    )?);
    Ok(Outcome {
        files,
        failures: Vec::new(),
        summary,
    })
}

/// Propagate one seeded ensemble on `grid`.
fn qubit_run(config: &ExperimentConfig, omega: f64, t1_min: f64, seed: u64, grid: &[f64]) -> Result<QubitTrace> {
    let ens_cfg = crate::ensemble::EnsembleConfig {
        t1_min,
        omega_rabi_max: omega,
        seed,
        ..config.ensemble.clone()
    };
    let ensemble = sample_ensemble(&ens_cfg)?;
    let generator = build_generator(&ensemble, &config.gap_application)?;
    propagate(&generator, grid, config.tolerance)
}

/// Per-group results over seeds: successful traces (in seed order) and fits.
struct SeedGroup {
    traces: Vec<(u64, QubitTrace)>,
    failures: Vec<SeedFailure>,
}

impl SeedGroup {
    fn collect(context: String, seeds: &[u64], results: Vec<Result<QubitTrace>>) -> Self {
        let mut traces = Vec::new();
        let mut failures = Vec::new();
        for (&seed, r) in seeds.iter().zip(results) {
            match r {
                Ok(t) => traces.push((seed, t)),
                Err(e) => failures.push(SeedFailure {
                    context: context.clone(),
                    seed,
                    error: e.to_string(),
                }),
            }
        }
        Self { traces, failures }
    }

    fn fits(&self) -> Vec<(u64, T1Fit)> {
        self.traces.iter().map(|(s, t)| (*s, fit_qubit_t1(t))).collect()
    }

    /// Median of fitted lifetimes; non-decaying traces count as infinite.
    fn median_fit(&self) -> Option<f64> {
        let v: Vec<f64> = self
            .fits()
            .iter()
            .map(|(_, f)| f.t1.unwrap_or(f64::INFINITY))
            .collect();
        median(&v)
    }

    /// Pointwise median of the qubit population over seeds.
    fn median_trace(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = &self.traces.first()?.1;
        let p = (0..first.times.len())
            .map(|i| {
                let col: Vec<f64> = self.traces.iter().map(|(_, t)| t.p_qubit[i]).collect();
                median(&col).unwrap()
            })
            .collect();
        Some((first.times.clone(), p))
    }
}

fn fit_row(fit: &T1Fit) -> Vec<String> {
    vec![opt(fit.t1), opt(fit.crossing), flag(fit.oscillatory), flag(fit.non_decaying)]
}

fn run_heatmap(config: &ExperimentConfig, dir: &Path, prefix: &str) -> Result<Outcome> {
    let grid = uniform_grid(config.horizon, config.output_points);
    let omega = config.ensemble.omega_rabi_max;
    let jobs: Vec<(f64, u64)> = config
        .t1_min_grid
        .iter()
        .flat_map(|&t| config.seeds.iter().map(move |&s| (t, s)))
        .collect();
    let mut results: Vec<Result<QubitTrace>> = jobs
        .par_iter()
        .map(|&(t1_min, seed)| qubit_run(config, omega, t1_min, seed, &grid))
        .collect();

    let mut groups = Vec::new();
    for &t1_min in &config.t1_min_grid {
        let rest = results.split_off(config.seeds.len());
        let chunk = std::mem::replace(&mut results, rest);
        groups.push((t1_min, SeedGroup::collect(format!("t1_min={t1_min}"), &config.seeds, chunk)));
    }

    let mut heat_rows = Vec::new();
    let mut median_rows = Vec::new();
    let mut fit_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut summary = Summary::default();
    let mut failures = Vec::new();
    for (t1_min, group) in &groups {
        for (seed, tr) in &group.traces {
            for (t, p) in tr.times.iter().zip(&tr.p_qubit) {
                heat_rows.push(vec![t1_min.to_string(), t.to_string(), p.to_string(), seed.to_string()]);
            }
        }
        for (seed, fit) in group.fits() {
            let mut row = vec![t1_min.to_string(), seed.to_string()];
            row.extend(fit_row(&fit));
            fit_rows.push(row);
        }
        let median_fit = group.median_fit();
        let (med_fit, med_min) = match group.median_trace() {
            Some((times, p)) => {
                for (t, v) in times.iter().zip(&p) {
                    median_rows.push(vec![*t1_min, *t, *v]);
                }
                (Some(fit_decay(&times, &p)), p.iter().copied().reduce(f64::min))
            }
            None => (None, None),
        };
        let mf = med_fit.unwrap_or_default();
        let tag = format!("@t1_min={t1_min}");
        summary.push(format!("median_fit_t1_s{tag}"), median_fit);
        summary.push(format!("median_trace_t1_s{tag}"), mf.t1);
        summary.push(format!("median_trace_oscillatory{tag}"), med_fit.map(|f| f64::from(u8::from(f.oscillatory))));
        summary.push(format!("median_trace_min_p{tag}"), med_min);
        let mut row = vec![t1_min.to_string(), opt(median_fit)];
        row.extend(fit_row(&mf));
        row.push(opt(med_min));
        row.push(group.traces.len().to_string());
        summary_rows.push(row);
        failures.extend(group.failures.iter().cloned());
    }

    let comments = vec![
        ("omega_rabi_max_hz".to_string(), omega.to_string()),
        ("n_tls".to_string(), config.ensemble.n_tls.to_string()),
        ("rng".to_string(), RNG_ALGORITHM.to_string()),
    ];
    let mut files = Vec::new();
    files.push(write_file(
        dir,
        &format!("{prefix}heatmap.csv"),
        &csv_bytes(|b| write_table(b, &comments, &HEATMAP_COLUMNS, heat_rows))?,
    )?);
    files.push(write_file(
        dir,
        &format!("{prefix}heatmap_median.csv"),
        &csv_bytes(|b| write_numeric_table(b, &comments, &HEATMAP_MEDIAN_COLUMNS, median_rows))?,
    )?);
    files.push(write_file(
        dir,
        &format!("{prefix}fits.csv"),
        &csv_bytes(|b| {
            write_table(
                b,
                &comments,
                &["t1_min_s", "seed", "t1_s", "crossing_s", "oscillatory", "non_decaying"],
                fit_rows,
            )
        })?,
    )?);
    files.push(write_file(
        dir,
        &format!("{prefix}summary.csv"),
        &csv_bytes(|b| {
            write_table(
                b,
                &comments,
                &[
                    "t1_min_s",
                    "median_fit_t1_s",
                    "median_trace_t1_s",
                    "median_trace_crossing_s",
                    "median_trace_oscillatory",
                    "median_trace_non_decaying",
                    "median_trace_min_p",
                    "seeds_ok",
                ],
                summary_rows,
            )
        })?,
    )?);
    Ok(Outcome {
        files,
        failures,
        summary,
    })
}

pub(crate) const HEATMAP_COLUMNS: [&str; 4] = ["t1_min_s", "time_s", "p_qubit", "seed"];
pub(crate) const HEATMAP_MEDIAN_COLUMNS: [&str; 3] = ["t1_min_s", "time_s", "p_qubit_median"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapRow {
    pub t1_min: f64,
    pub time: f64,
    pub p_qubit: f64,
    pub seed: u64,
}

/// Parse the long-format per-seed heatmap table.
pub fn read_heatmap_csv(input: &[u8]) -> Result<Vec<HeatmapRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(HEATMAP_COLUMNS) {
        return Err(Error::Parse(format!("expected columns {HEATMAP_COLUMNS:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            let cell = &rec[k];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse(format!("row {i}: bad number {cell:?}"))),
            }
        };
        let row = HeatmapRow {
            t1_min: num(0)?,
            time: num(1)?,
            p_qubit: num(2)?,
            seed: rec[3]
                .parse()
                .map_err(|e| Error::Parse(format!("row {i}: seed {:?}: {e}", &rec[3])))?,
        };
        if !(row.t1_min > 0.0 && row.time >= 0.0 && (-1e-6..=1.0 + 1e-6).contains(&row.p_qubit)) {
            return Err(Error::Parse(format!("row {i}: value out of range")));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn run_bulk(config: &ExperimentConfig, dir: &Path, prefix: &str) -> Result<Outcome> {
    let jobs: Vec<(usize, u64)> = (0..config.bulk.omega_rabi_max.len())
        .flat_map(|i| config.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let mut results: Vec<Result<QubitTrace>> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let grid = uniform_grid(config.bulk.horizons[i], config.output_points);
            qubit_run(config, config.bulk.omega_rabi_max[i], config.ensemble.t1_min, seed, &grid)
        })
        .collect();

    let f_q = config.ensemble.qubit_frequency;
    let mut fit_rows = Vec::new();
    let mut median_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut summary = Summary::default();
    let mut failures = Vec::new();
    for &omega in &config.bulk.omega_rabi_max {
        let rest = results.split_off(config.seeds.len());
        let chunk = std::mem::replace(&mut results, rest);
        let group = SeedGroup::collect(format!("omega_rabi_max={omega}"), &config.seeds, chunk);
        for (seed, fit) in group.fits() {
            let mut row = vec![omega.to_string(), seed.to_string(), opt(fit.t1), opt(fit.t1.map(|t| quality_factor(t, f_q)))];
            row.extend(fit_row(&fit)[1..].iter().cloned());
            fit_rows.push(row);
        }
        if let Some((times, p)) = group.median_trace() {
            for (t, v) in times.iter().zip(&p) {
                median_rows.push(vec![omega, *t, *v]);
            }
        }
        let m = group.median_fit().filter(|v| v.is_finite());
        let q = m.map(|t| quality_factor(t, f_q));
        summary.push(format!("median_t1_s@omega={omega}"), m);
        summary.push(format!("median_q@omega={omega}"), q);
        summary_rows.push(vec![omega.to_string(), opt(m), opt(q), group.traces.len().to_string()]);
        failures.extend(group.failures);
    }
    let comments = vec![
        ("volume".to_string(), config.ensemble.volume.to_string()),
        ("n_tls".to_string(), config.ensemble.n_tls.to_string()),
        ("t1_min".to_string(), config.ensemble.t1_min.to_string()),
        ("qubit_frequency_hz".to_string(), f_q.to_string()),
        ("rng".to_string(), RNG_ALGORITHM.to_string()),
    ];
    let files = vec![
        write_file(
            dir,
            &format!("{prefix}bulk_fits.csv"),
            &csv_bytes(|b| {
                write_table(
                    b,
                    &comments,
                    &["omega_rabi_max_hz", "seed", "t1_s", "q", "crossing_s", "oscillatory", "non_decaying"],
                    fit_rows,
                )
            })?,
        )?,
        write_file(
            dir,
            &format!("{prefix}bulk_median_traces.csv"),
            &csv_bytes(|b| write_numeric_table(b, &comments, &["omega_rabi_max_hz", "time_s", "p_qubit_median"], median_rows))?,
        )?,
        write_file(
            dir,
            &format!("{prefix}bulk_summary.csv"),
            &csv_bytes(|b| write_table(b, &comments, &["omega_rabi_max_hz", "median_t1_s", "median_q", "seeds_ok"], summary_rows))?,
        )?,
    ];
    Ok(Outcome {
        files,
        failures,
        summary,
    })
}

fn run_angular(config: &ExperimentConfig, dir: &Path, prefix: &str) -> Result<Outcome> {
    let tabulated = match &config.angular_curve {
        Some(path) => Some(config.load_angular_curve(path)?),
        None => None,
    };
    let (curve, source): (&dyn SuppressionCurve, &str) = match &tabulated {
        Some(c) => (c, "tabulated"),
        None => (&config.gap, "anisotropic_gap"),
    };
    let mut rows = Vec::new();
    let mut summary = Summary::default();
    for w in &config.angular_weights {
        let a = angular_average(curve, w)?;
        let name = w.name();
        summary.push(format!("mean_depth@{name}"), Some(a.mean_depth));
        summary.push(format!("mean_rate_factor@{name}"), Some(a.mean_rate_factor));
        summary.push(format!("mean_t1_factor@{name}"), Some(a.mean_t1_factor));
        rows.push(vec![
            name.to_string(),
            source.to_string(),
            a.mean_depth.to_string(),
            a.mean_rate_factor.to_string(),
            a.mean_t1_factor.to_string(),
            (1.0 / a.mean_rate_factor).to_string(),
        ]);
    }
    let cols = ["weight", "curve", "mean_depth", "mean_rate_factor", "mean_t1_factor", "inverse_rate_factor"];
    let files = vec![write_file(
        dir,
        &format!("{prefix}angular_average.csv"),
        &csv_bytes(|b| write_table(b, &[], &cols, rows))?,
    )?];
    Ok(Outcome {
        files,
        failures: Vec::new(),
        summary,
    })
}

fn run_loss(config: &ExperimentConfig, dir: &Path, prefix: &str) -> Result<Outcome> {
    let l = &config.loss;
    let rows = power_sweep(&l.model, l.t1_factor, &l.fields_over_ec)?;
    let mut summary = Summary::default();
    summary.push("t1_factor", Some(l.t1_factor));
    summary.push("highest_field_ratio", rows.last().map(|r| r.ratio));
    let files = vec![write_file(
        dir,
        &format!("{prefix}loss_sweep.csv"),
        &csv_bytes(|b| write_sweep_csv(b, &l.model, l.t1_factor, &rows))?,
    )?];
    Ok(Outcome {
        files,
        failures: Vec::new(),
        summary,
    })
}
