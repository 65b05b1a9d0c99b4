use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::GapApplication;
use crate::ensemble::{bulk_validation_config, BulkRabi, EnsembleConfig};
use crate::error::{Error, Result};
use crate::gap::{GapSpec, StandardWeight, TabulatedCurve};
use crate::steady_state::LossModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Single-defect decay for several gap depths.
    Fig3,
    /// Qubit with 200 defects, 45 kHz maximum exchange, over a T₁,min grid.
    Fig4a,
    /// As `fig4a` with 450 kHz maximum exchange.
    Fig4b,
    AngularAverage,
    BulkValidation,
    LossSweep,
    /// Single-defect decay at the configured gap depth.
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig3,
        Preset::Fig4a,
        Preset::Fig4b,
        Preset::AngularAverage,
        Preset::BulkValidation,
        Preset::LossSweep,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::AngularAverage => "angular_average",
            Preset::BulkValidation => "bulk_validation",
            Preset::LossSweep => "loss_sweep",
            Preset::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig3 => "defect decay into a 1 GHz gap for depths 0, 0.6, 0.9, 0.99",
            Preset::Fig4a => "qubit + 200 defects, 45 kHz max exchange, T1,min heatmap",
            Preset::Fig4b => "qubit + 200 defects, 450 kHz max exchange, T1,min heatmap",
            Preset::AngularAverage => "angle-averaged suppression, rate and lifetime factors",
            Preset::BulkValidation => "bulk dielectric, 10^4 defects, 87 / 870 kHz max exchange",
            Preset::LossSweep => "power-dependent loss tangent with and without the gap",
            Preset::Custom => "defect decay at the configured gap",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSweepConfig {
    pub model: LossModel,
    pub t1_factor: f64,
    pub fields_over_ec: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulkConfig {
    /// Maximum exchange rates to run, Hz.
    pub omega_rabi_max: Vec<f64>,
    /// Horizon for each exchange rate, s.
    pub horizons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub ensemble: EnsembleConfig,
    pub gap: GapSpec,
    /// Lifetime modification applied to qubit-dynamics presets.
    pub gap_application: GapApplication,
    pub horizon: f64,
    pub output_points: usize,
    pub t1_min_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub tolerance: f64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub fig3_depths: Vec<f64>,
    pub bulk: BulkConfig,
    pub angular_curve: Option<PathBuf>,
    pub angular_weights: Vec<StandardWeight>,
    pub loss: LossSweepConfig,
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

impl ExperimentConfig {
    /// Defaults for `preset`.
    pub fn for_preset(preset: Preset) -> Self {
        let mut c = Self {
            preset,
            ensemble: EnsembleConfig::default(),
            gap: GapSpec::default(),
            gap_application: GapApplication::None,
            horizon: 100e-6,
            output_points: 1001,
            t1_min_grid: log_grid(1e-10, 1e-4, 25),
            seeds: (0..20).collect(),
            output_dir: PathBuf::from("runs").join(preset.name()),
            tolerance: 1e-8,
            jobs: 0,
            fig3_depths: vec![0.0, 0.6, 0.9, 0.99],
            bulk: BulkConfig {
                omega_rabi_max: vec![BulkRabi::Low.hz(), BulkRabi::High.hz()],
                horizons: vec![4e-6, 0.4e-6],
            },
            angular_curve: None,
            angular_weights: StandardWeight::ALL.to_vec(),
            loss: LossSweepConfig {
                model: LossModel::default(),
                t1_factor: 9.0,
                fields_over_ec: log_grid(1e-3, 1e4, 71),
            },
        };
        match preset {
            Preset::Fig3 | Preset::Custom => {
                c.ensemble.t1_min = 1e-6;
                c.horizon = 200e-6;
                c.output_points = 2001;
                c.tolerance = 1e-9;
            }
            Preset::Fig4a => {}
            Preset::Fig4b => c.ensemble.omega_rabi_max = 450e3,
            Preset::BulkValidation => {
                c.ensemble = bulk_validation_config(BulkRabi::Low);
                c.seeds = (0..5).collect();
                c.output_points = 2001;
            }
            Preset::AngularAverage | Preset::LossSweep => {}
        }
        c
    }

    /// Parse TOML, filling anything not given from the defaults of the
    /// preset named in the file (or `preset`, which takes precedence).
    pub fn from_toml_str(text: &str, preset: Option<Preset>) -> Result<Self> {
        let config = Self::merged(text, preset)?;
        config.validate()?;
        Ok(config)
    }

    /// As [`from_toml_str`](Self::from_toml_str), with a relative
    /// `angular_curve` resolved against the file's directory.
    pub fn from_toml_file(path: &std::path::Path, preset: Option<Preset>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::merged(&text, preset)?;
        if let Some(curve) = config.angular_curve.as_mut() {
            if curve.is_relative() {
                *curve = path.parent().unwrap_or(std::path::Path::new("")).join(&*curve);
            }
        }
        config.validate()?;
        Ok(config)
    }

    fn merged(text: &str, preset: Option<Preset>) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("TOML: {}", e.message())))?;
        let preset = match (preset, user.get("preset")) {
            (Some(p), _) => p,
            (None, Some(toml::Value::String(s))) => Preset::parse(s)?,
            (None, Some(_)) => return Err(Error::Config("preset must be a string".into())),
            (None, None) => return Err(Error::Config("no preset given".into())),
        };
        let mut merged = Self::for_preset(preset).to_toml_table()?;
        merge(&mut merged, user);
        merged.insert("preset".into(), toml::Value::String(preset.name().into()));
        toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub(crate) fn to_toml_table(&self) -> Result<toml::Table> {
        match toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))? {
            toml::Value::Table(t) => Ok(t),
            _ => unreachable!("config serializes to a table"),
        }
    }

    /// Every configuration problem is reported here, before computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.ensemble.validate()?;
        self.gap.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive".into());
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-3) {
            return bad(format!("tolerance {} outside (0, 1e-3]", self.tolerance));
        }
        if self.output_points < 2 {
            return bad("output_points must be at least 2".into());
        }
        match self.gap_application {
            GapApplication::Isotropic { t1_factor } if !(t1_factor > 0.0 && t1_factor.is_finite()) => {
                return bad("isotropic t1_factor must be positive".into())
            }
            GapApplication::Anisotropic { gap } => {
                gap.validate()?;
                if gap.s_parallel.max(gap.s_perpendicular) >= 1.0 {
                    return Err(Error::PerfectGap);
                }
            }
            _ => {}
        }
        match self.preset {
            Preset::Fig3 | Preset::Custom => {
                let depths = if self.preset == Preset::Fig3 {
                    self.fig3_depths.clone()
                } else {
                    vec![self.gap.depth]
                };
                if depths.is_empty() {
                    return bad("fig3_depths is empty".into());
                }
                if depths.iter().any(|d| !(0.0..1.0).contains(d)) {
                    return bad("gap depths must lie in [0, 1)".into());
                }
            }
            Preset::Fig4a | Preset::Fig4b => {
                if self.seeds.is_empty() {
                    return bad("seeds is empty".into());
                }
                if self.t1_min_grid.is_empty() || self.t1_min_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return bad("t1_min_grid must be a nonempty list of positive times".into());
                }
            }
            Preset::BulkValidation => {
                if self.seeds.is_empty() {
                    return bad("seeds is empty".into());
                }
                let b = &self.bulk;
                if b.omega_rabi_max.is_empty() || b.omega_rabi_max.len() != b.horizons.len() {
                    return bad("bulk.omega_rabi_max and bulk.horizons must be nonempty and equally long".into());
                }
                if b.horizons.iter().chain(&b.omega_rabi_max).any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("bulk rates and horizons must be positive".into());
                }
            }
            Preset::AngularAverage => {
                if self.angular_weights.is_empty() {
                    return bad("angular_weights is empty".into());
                }
                if let Some(path) = &self.angular_curve {
                    self.load_angular_curve(path)?;
                }
            }
            Preset::LossSweep => {
                self.loss.model.validate()?;
                if !(self.loss.t1_factor >= 1.0) {
                    return bad("loss.t1_factor must be at least 1".into());
                }
                if self.loss.fields_over_ec.is_empty() || self.loss.fields_over_ec.iter().any(|x| !(*x >= 0.0)) {
                    return bad("loss.fields_over_ec must be nonempty and non-negative".into());
                }
            }
        }
        Ok(())
    }

    pub(crate) fn load_angular_curve(&self, path: &std::path::Path) -> Result<TabulatedCurve> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        TabulatedCurve::read_csv(file).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// One sweep dimension: a dotted config path and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// Parse `key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("axis {spec:?} is not key=v1,v2,...")))?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("axis {key}: {v:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Config(format!("axis {key} has no values")));
        }
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }
}

/// Set the numeric field at dotted path `key` to `value`.
pub fn apply_axis(config: &ExperimentConfig, key: &str, value: f64) -> Result<ExperimentConfig> {
    let mut table = config.to_toml_table()?;
    let mut parts = key.split('.').peekable();
    let mut cursor = &mut table;
    loop {
        let part = parts.next().ok_or_else(|| Error::Config("empty axis key".into()))?;
        let slot = cursor
            .get_mut(part)
            .ok_or_else(|| Error::Config(format!("axis {key:?} does not name a config field")))?;
        if parts.peek().is_none() {
            *slot = match slot {
                toml::Value::Float(_) => toml::Value::Float(value),
                toml::Value::Integer(_) if value.fract() == 0.0 && value.abs() < 9.0e15 => {
                    toml::Value::Integer(value as i64)
                }
                _ => return Err(Error::Config(format!("axis {key:?} is not a numeric field"))),
            };
            break;
        }
        cursor = match slot {
            toml::Value::Table(t) => t,
            _ => return Err(Error::Config(format!("axis {key:?} does not name a config field"))),
        };
    }
    let out: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parameter_table() {
        let a = ExperimentConfig::for_preset(Preset::Fig4a);
        assert_eq!(a.ensemble.omega_rabi_max, 45e3);
        assert_eq!(a.ensemble.n_tls, 200);
        assert_eq!(a.ensemble.p0, 5e43);
        assert_eq!(a.ensemble.volume, 1e-16);
        assert_eq!(a.ensemble.bandwidth, 1e7);
        assert_eq!(a.ensemble.delta0_min, 0.01);
        assert_eq!(a.horizon, 100e-6);
        assert_eq!(a.seeds.len(), 20);
        assert_eq!(a.t1_min_grid.len(), 25);
        assert!((a.t1_min_grid[0] - 1e-10).abs() < 1e-22);
        assert!((a.t1_min_grid[24] - 1e-4).abs() < 1e-16);
        assert_eq!(a.gap_application, GapApplication::None);

        let b = ExperimentConfig::for_preset(Preset::Fig4b);
        assert_eq!(b.ensemble.omega_rabi_max, 450e3);

        let f3 = ExperimentConfig::for_preset(Preset::Fig3);
        assert_eq!(f3.ensemble.t1_min, 1e-6);
        assert_eq!(f3.gap.width, 0.5e9);
        assert_eq!(f3.gap.center, f3.ensemble.qubit_frequency);
        assert_eq!(f3.fig3_depths, vec![0.0, 0.6, 0.9, 0.99]);

        let bulk = ExperimentConfig::for_preset(Preset::BulkValidation);
        assert_eq!(bulk.ensemble.volume, 6.4e-15);
        assert_eq!(bulk.ensemble.n_tls, 10_000);
        assert_eq!(bulk.bulk.omega_rabi_max, vec![87e3, 870e3]);
    }

    #[test]
    fn every_preset_default_validates() {
        for p in Preset::ALL {
            ExperimentConfig::for_preset(p).validate().unwrap();
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
        }
    }

    #[test]
    fn toml_overrides_merge_onto_defaults() {
        let c = ExperimentConfig::from_toml_str(
            "preset = \"fig4b\"\nseeds = [5, 6]\n[ensemble]\nn_tls = 12\n",
            None,
        )
        .unwrap();
        assert_eq!(c.seeds, vec![5, 6]);
        assert_eq!(c.ensemble.n_tls, 12);
        assert_eq!(c.ensemble.omega_rabi_max, 450e3);
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap(), None).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn config_errors() {
        let cases = [
            "seeds = []",
            "preset = \"nope\"",
            "preset = \"fig4a\"\nhorizon = -1.0",
            "preset = \"fig4a\"\nunknown_field = 1",
            "preset = \"fig4a\"\n[ensemble]\ndelta0_min = 2.0",
            "preset = \"loss_sweep\"\n[loss]\nt1_factor = 0.5",
            "preset = \"fig3\"\nfig3_depths = [1.0]",
            "preset = \"angular_average\"\nangular_curve = \"/nonexistent/curve.csv\"",
            "preset = \"fig4a\"\ntolerance = 0.1",
            "preset = [1]",
            "this is not toml",
        ];
        for text in cases {
            let err = ExperimentConfig::from_toml_str(text, None);
            assert!(err.is_err(), "{text}");
        }
    }

    #[test]
    fn axis_application() {
        let c = ExperimentConfig::for_preset(Preset::Custom);
        let d = apply_axis(&c, "gap.depth", 0.99).unwrap();
        assert_eq!(d.gap.depth, 0.99);
        let n = apply_axis(&c, "ensemble.n_tls", 7.0).unwrap();
        assert_eq!(n.ensemble.n_tls, 7);
        assert!(apply_axis(&c, "gap.nope", 1.0).is_err());
        assert!(apply_axis(&c, "preset", 1.0).is_err());
        assert!(apply_axis(&c, "ensemble.n_tls", 1.5).is_err());
        let a = SweepAxis::parse("gap.depth=0, 0.99").unwrap();
        assert_eq!(a.values, vec![0.0, 0.99]);
        assert!(SweepAxis::parse("gap.depth").is_err());
        assert!(SweepAxis::parse("gap.depth=x").is_err());
    }
}
