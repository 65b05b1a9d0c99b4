//! Sampling of TLS defect ensembles from the standard tunneling model.
//!
//! Tunneling amplitudes are normalized, `delta0 = Δ₀/E ∈ (0, 1]`, so that a
//! defect with `delta0 = 1` has the minimum relaxation time `t1_min` and the
//! full exchange rate `omega_rabi_max` (scaled by its dipole factor).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{rng, table};

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// TLS spectral density P₀, J⁻¹ m⁻³.
    pub p0: f64,
    /// Host volume, m³.
    pub volume: f64,
    /// Full detuning window around the qubit, Hz.
    pub bandwidth: f64,
    pub delta0_min: f64,
    pub delta0_max: f64,
    /// Relaxation time of a `delta0 = 1` defect, s.
    pub t1_min: f64,
    /// Maximum vacuum exchange rate, Hz.
    pub omega_rabi_max: f64,
    pub n_tls: usize,
    pub qubit_frequency: f64,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    /// Thin-film qubit setting: 200 defects in a 1e-16 m³ host over a 10 MHz
    /// window, 45 kHz maximum exchange.
    fn default() -> Self {
        Self {
            p0: 5e43,
            volume: 1e-16,
            bandwidth: 1e7,
            delta0_min: 0.01,
            delta0_max: 1.0,
            t1_min: 1e-7,
            omega_rabi_max: 45e3,
            n_tls: 200,
            qubit_frequency: 5e9,
            seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.delta0_min > 0.0 && self.delta0_min < self.delta0_max && self.delta0_max <= 1.0) {
            return bad("require 0 < delta0_min < delta0_max <= 1");
        }
        if !(self.t1_min > 0.0 && self.t1_min.is_finite()) {
            return bad("t1_min must be positive");
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return bad("bandwidth must be positive");
        }
        if self.n_tls < 1 {
            return bad("n_tls must be at least 1");
        }
        if !(self.omega_rabi_max >= 0.0 && self.omega_rabi_max.is_finite()) {
            return bad("omega_rabi_max must be non-negative");
        }
        if !(self.p0 > 0.0 && self.volume > 0.0 && self.qubit_frequency > 0.0) {
            return bad("p0, volume and qubit_frequency must be positive");
        }
        Ok(())
    }

    /// Expected defect count for this configuration's material parameters.
    pub fn expected_count(&self) -> Result<f64> {
        expected_tls_count(self.p0, self.volume, self.bandwidth, self.delta0_min)
    }
}

/// Expected number of defects with normalized tunneling amplitude above
/// `delta0_min` inside an energy window `h·bandwidth`:
/// `N = p0 · volume · h · bandwidth · ln(1/delta0_min)`.
pub fn expected_tls_count(p0: f64, volume: f64, bandwidth: f64, delta0_min: f64) -> Result<f64> {
    if !(p0 > 0.0 && volume > 0.0 && bandwidth > 0.0 && delta0_min > 0.0) {
        return Err(Error::Domain("expected_tls_count arguments must be positive".into()));
    }
    if delta0_min >= 1.0 {
        return Err(Error::Domain("delta0_min must be below 1".into()));
    }
    Ok(p0 * volume * PLANCK * bandwidth * (1.0 / delta0_min).ln())
}

/// One sampled defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    pub delta0: f64,
    pub dipole_factor: f64,
    /// Dipole angle from the metal plane, radians.
    pub theta: f64,
    /// TLS frequency minus qubit frequency, Hz.
    pub detuning: f64,
    pub t1_intrinsic: f64,
    /// Exchange rate with the qubit, Hz.
    pub omega: f64,
}

impl TlsParams {
    pub fn from_draws(config: &EnsembleConfig, delta0: f64, dipole_factor: f64, theta: f64, detuning: f64) -> Self {
        Self {
            delta0,
            dipole_factor,
            theta,
            detuning,
            t1_intrinsic: config.t1_min / (delta0 * delta0),
            omega: config.omega_rabi_max * delta0 * dipole_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TlsEnsemble {
    pub members: Vec<TlsParams>,
    pub config: EnsembleConfig,
    pub seed_used: u64,
}

/// Draw `config.n_tls` defects i.i.d. from a stream seeded by `config.seed`.
///
/// Per member, in order: `delta0` log-uniform on `[delta0_min, delta0_max]`,
/// dipole factor uniform on `[0, 1]`, angle from the plane with density
/// `cos θ` on `[0, π/2]` (isotropic orientation), detuning uniform over the
/// window.
pub fn sample_ensemble(config: &EnsembleConfig) -> Result<TlsEnsemble> {
    config.validate()?;
    let mut rng = rng::stream(config.seed);
    let log_span = (config.delta0_max / config.delta0_min).ln();
    let half = 0.5 * config.bandwidth;
    let members = (0..config.n_tls)
        .map(|_| {
            let delta0 = config.delta0_min * (log_span * rng.gen::<f64>()).exp();
            let dipole_factor: f64 = rng.gen();
            let theta = rng.gen::<f64>().asin().min(FRAC_PI_2);
            let detuning = config.bandwidth * rng.gen::<f64>() - half;
            TlsParams::from_draws(config, delta0, dipole_factor, theta, detuning)
        })
        .collect();
    Ok(TlsEnsemble {
        members,
        config: config.clone(),
        seed_used: config.seed,
    })
}

/// Which of the two bulk-validation exchange rates to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BulkRabi {
    /// 87 kHz.
    Low,
    /// 870 kHz.
    High,
}

impl BulkRabi {
    pub fn hz(self) -> f64 {
        match self {
            BulkRabi::Low => 87e3,
            BulkRabi::High => 870e3,
        }
    }
}

/// Bulk dielectric preset: 6.4e-15 m³ host with 10⁴ defects.
pub fn bulk_validation_config(rabi: BulkRabi) -> EnsembleConfig {
    EnsembleConfig {
        volume: 6.4e-15,
        n_tls: 10_000,
        omega_rabi_max: rabi.hz(),
        ..EnsembleConfig::default()
    }
}

const ENSEMBLE_COLUMNS: [&str; 6] = ["delta0", "dipole_factor", "theta", "detuning_hz", "t1_s", "omega_hz"];

impl TlsEnsemble {
    /// CSV table, one row per defect, preceded by `# key=value` lines
    /// carrying the configuration and RNG.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let c = &self.config;
        let comments: Vec<(String, String)> = [
            ("rng", rng::RNG_ALGORITHM.to_string()),
            ("seed", self.seed_used.to_string()),
            ("p0", c.p0.to_string()),
            ("volume", c.volume.to_string()),
            ("bandwidth", c.bandwidth.to_string()),
            ("delta0_min", c.delta0_min.to_string()),
            ("delta0_max", c.delta0_max.to_string()),
            ("t1_min", c.t1_min.to_string()),
            ("omega_rabi_max", c.omega_rabi_max.to_string()),
            ("n_tls", c.n_tls.to_string()),
            ("qubit_frequency", c.qubit_frequency.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let rows = self
            .members
            .iter()
            .map(|m| vec![m.delta0, m.dipole_factor, m.theta, m.detuning, m.t1_intrinsic, m.omega]);
        table::write_numeric_table(out, &comments, &ENSEMBLE_COLUMNS, rows)
    }

    /// Parse the table written by [`TlsEnsemble::write_csv`], checking every
    /// row against the configuration from the header.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input
            .read_to_string(&mut text)
            .map_err(|e| Error::Parse(format!("ensemble csv is not UTF-8: {e}")))?;
        let meta: BTreeMap<String, String> = table::read_header_comments(&text).into_iter().collect();
        let num = |key: &str| -> Result<f64> {
            meta.get(key)
                .ok_or_else(|| Error::Parse(format!("missing header field {key}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("header field {key}: {e}")))
        };
        let int = |key: &str| -> Result<u64> {
            meta.get(key)
                .ok_or_else(|| Error::Parse(format!("missing header field {key}")))?
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("header field {key}: {e}")))
        };
        let seed = int("seed")?;
        let config = EnsembleConfig {
            p0: num("p0")?,
            volume: num("volume")?,
            bandwidth: num("bandwidth")?,
            delta0_min: num("delta0_min")?,
            delta0_max: num("delta0_max")?,
            t1_min: num("t1_min")?,
            omega_rabi_max: num("omega_rabi_max")?,
            n_tls: usize::try_from(int("n_tls")?).map_err(|_| Error::Parse("n_tls out of range".into()))?,
            qubit_frequency: num("qubit_frequency")?,
            seed,
        };
        config.validate().map_err(|e| Error::Parse(e.to_string()))?;

        let rows = table::read_numeric_table(text.as_bytes(), &ENSEMBLE_COLUMNS)?;
        if rows.len() != config.n_tls {
            return Err(Error::Parse(format!("expected {} rows, found {}", config.n_tls, rows.len())));
        }
        let mut members = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            let m = TlsParams {
                delta0: r[0],
                dipole_factor: r[1],
                theta: r[2],
                detuning: r[3],
                t1_intrinsic: r[4],
                omega: r[5],
            };
            check_member(&config, &m).map_err(|why| Error::Parse(format!("row {i}: {why}")))?;
            members.push(m);
        }
        Ok(Self {
            members,
            config,
            seed_used: seed,
        })
    }
}

fn check_member(c: &EnsembleConfig, m: &TlsParams) -> std::result::Result<(), String> {
    if !(m.delta0 >= c.delta0_min && m.delta0 <= c.delta0_max) {
        return Err("delta0 outside configured range".into());
    }
    if !(0.0..=1.0).contains(&m.dipole_factor) {
        return Err("dipole_factor outside [0, 1]".into());
    }
    if !(0.0..=FRAC_PI_2).contains(&m.theta) {
        return Err("theta outside [0, pi/2]".into());
    }
    if !(m.detuning.abs() <= 0.5 * c.bandwidth) {
        return Err("detuning outside window".into());
    }
    let expect = TlsParams::from_draws(c, m.delta0, m.dipole_factor, m.theta, m.detuning);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !close(expect.t1_intrinsic, m.t1_intrinsic) || !close(expect.omega, m.omega) {
        return Err("derived fields inconsistent with delta0 and dipole_factor".into());
    }
    Ok(())
}
