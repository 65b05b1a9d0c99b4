//! Plot-ready tables derived from a finished run's data files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::manifest::{write_file, FileEntry, RunManifest};
use super::run::HEATMAP_MEDIAN_COLUMNS;
use crate::error::{Error, Result};
use crate::gap::DecayTrace;
use crate::table::{read_numeric_table, write_numeric_table, write_table};

fn split(rel: &str) -> (&str, &str) {
    match rel.rfind('/') {
        Some(i) => rel.split_at(i + 1),
        None => ("", rel),
    }
}

fn bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Group `(key, time, value)` triples into a wide table: one time column
/// followed by one column per key. All keys must share the time grid.
fn wide(series: BTreeMap<String, (Vec<f64>, Vec<f64>)>, key_prefix: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut cols = vec!["time_s".to_string()];
    let mut columns: Vec<&[f64]> = Vec::new();
    let mut times: Option<&Vec<f64>> = None;
    for (k, (t, v)) in &series {
        match times {
            None => times = Some(t),
            Some(t0) if t0 != t => {
                return Err(Error::Parse(format!("series {k} uses a different time grid")));
            }
            _ => {}
        }
        cols.push(format!("{key_prefix}{k}"));
        columns.push(v);
    }
    let times = times.cloned().unwrap_or_default();
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| std::iter::once(t).chain(columns.iter().map(|c| c[i])).collect())
        .collect();
    Ok((cols, rows))
}

/// Write plot tables under `plot/` for every recognised data file in the
/// manifest, record them in the manifest and save it.
pub fn emit_plot_data(manifest: &mut RunManifest) -> Result<Vec<PathBuf>> {
    if manifest.files.is_empty() {
        return Err(Error::MissingInput("manifest lists no data files".into()));
    }
    let dir = manifest.output_dir.clone();
    let mut out: Vec<FileEntry> = Vec::new();
    let mut decay: BTreeMap<String, BTreeMap<String, (Vec<f64>, Vec<f64>)>> = BTreeMap::new();

    for entry in &manifest.files {
        let (prefix, name) = split(&entry.path);
        if prefix.starts_with("plot/") || prefix.contains("/plot/") {
            continue;
        }
        if (name.starts_with("fig3_depth_") || name == "decay.csv") && name.ends_with(".csv") {
            let trace = DecayTrace::read_csv(manifest.read(&entry.path)?.as_slice())?;
            let depth = trace
                .metadata
                .parameters
                .iter()
                .find(|(k, _)| k == "depth")
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parse(format!("{}: no depth recorded", entry.path)))?;
            decay
                .entry(prefix.to_string())
                .or_default()
                .insert(depth.to_string(), (trace.times, trace.excited_probability));
        } else if name == "heatmap_median.csv" {
            let rows = read_numeric_table(&manifest.read(&entry.path)?, &HEATMAP_MEDIAN_COLUMNS)?;
            let mut matrix: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
            for r in rows {
                match matrix.last_mut() {
                    Some((t1, times, ps)) if *t1 == r[0] => {
                        times.push(r[1]);
                        ps.push(r[2]);
                    }
                    _ => matrix.push((r[0], vec![r[1]], vec![r[2]])),
                }
            }
            matrix.sort_by(|a, b| a.0.total_cmp(&b.0));
            let Some(times) = matrix.first().map(|m| m.1.clone()) else {
                continue;
            };
            let mut cols = vec!["t1_min_s".to_string()];
            cols.extend(times.iter().map(|t| t.to_string()));
            let cols_ref: Vec<&str> = cols.iter().map(String::as_str).collect();
            let rows = matrix.into_iter().map(|(t1, _, ps)| std::iter::once(t1).chain(ps).collect::<Vec<_>>());
            out.push(write_file(
                &dir,
                &format!("plot/{prefix}heatmap_matrix.csv"),
                &bytes(|b| write_numeric_table(b, &[], &cols_ref, rows))?,
            )?);
        } else if name == "bulk_median_traces.csv" {
            let rows = read_numeric_table(
                &manifest.read(&entry.path)?,
                &["omega_rabi_max_hz", "time_s", "p_qubit_median"],
            )?;
            // Each drive strength has its own horizon, so keep long format
            // with a normalised time column added.
            let mut by_omega: BTreeMap<String, f64> = BTreeMap::new();
            for r in &rows {
                let e = by_omega.entry(r[0].to_string()).or_insert(0.0);
                *e = e.max(r[1]);
            }
            let rows = rows.into_iter().map(|r| {
                let horizon = by_omega[&r[0].to_string()];
                vec![r[0], r[1], r[1] / horizon, r[2]]
            });
            out.push(write_file(
                &dir,
                &format!("plot/{prefix}bulk_series.csv"),
                &bytes(|b| {
                    write_numeric_table(b, &[], &["omega_rabi_max_hz", "time_s", "time_over_horizon", "p_qubit_median"], rows)
                })?,
            )?);
        } else if name == "loss_sweep.csv" {
            let rows = read_numeric_table(
                &manifest.read(&entry.path)?,
                &["e_ac_over_ec", "tan_delta", "tan_delta_gapped", "ratio"],
            )?;
            let rows = rows.into_iter().map(|r| vec![r[0].log10(), r[1].log10(), r[2].log10()]);
            out.push(write_file(
                &dir,
                &format!("plot/{prefix}loss_series.csv"),
                &bytes(|b| {
                    write_numeric_table(b, &[], &["log10_e_ac_over_ec", "log10_tan_delta", "log10_tan_delta_gapped"], rows)
                })?,
            )?);
        } else if name == "angular_average.csv" {
            let text = manifest.read(&entry.path)?;
            let mut rdr = csv::Reader::from_reader(text.as_slice());
            let mut rows = Vec::new();
            for rec in rdr.records() {
                let rec = rec?;
                rows.push(vec![rec[0].to_string(), rec[3].to_string(), rec[5].to_string()]);
            }
            out.push(write_file(
                &dir,
                &format!("plot/{prefix}angular_bars.csv"),
                &bytes(|b| write_table(b, &[], &["weight", "mean_rate_factor", "inverse_rate_factor"], rows))?,
            )?);
        }
    }

    for (prefix, series) in decay {
        let (cols, rows) = wide(series, "p_depth_")?;
        let cols_ref: Vec<&str> = cols.iter().map(String::as_str).collect();
        out.push(write_file(
            &dir,
            &format!("plot/{prefix}decay_series.csv"),
            &bytes(|b| write_numeric_table(b, &[], &cols_ref, rows))?,
        )?);
    }

    if out.is_empty() {
        return Err(Error::MissingInput("no plottable data files in manifest".into()));
    }
    let paths = out.iter().map(|f| dir.join(&f.path)).collect();
    for f in out {
        manifest.files.retain(|e| e.path != f.path);
        manifest.files.push(f);
    }
    manifest.save()?;
    Ok(paths)
}
