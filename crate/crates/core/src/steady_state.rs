//! Continuous-wave TLS loss: power-saturated loss tangent and its shift
//! under lifetime enhancement.
//!
//! Fields are expressed relative to the critical field `e_c`, so the unknown
//! proportionality constant in `E_c ∝ 1/√(T₁T₂)` never enters.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModel {
    pub tan_delta0: f64,
    /// Critical field, V/m.
    pub e_c: f64,
    /// T₂/T₁; 2 in the low-temperature limit.
    pub t2_over_t1: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        Self {
            tan_delta0: 1e-6,
            e_c: 1.0,
            t2_over_t1: 2.0,
        }
    }
}

impl LossModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.tan_delta0 > 0.0 && self.e_c > 0.0 && self.t2_over_t1 > 0.0 && self.t2_over_t1 <= 2.0) {
            return Err(Error::Config(
                "loss model needs tan_delta0 > 0, e_c > 0 and t2_over_t1 in (0, 2]".into(),
            ));
        }
        Ok(())
    }
}

/// `tan δ₀ / √(1 + (E_ac/E_c)²)`.
pub fn loss_tangent(model: &LossModel, e_ac: f64) -> f64 {
    let x = e_ac / model.e_c;
    model.tan_delta0 / x.hypot(1.0)
}

/// Loss model after every TLS lifetime is multiplied by `t1_factor`.
///
/// With `T₂` tied to `T₁` by a fixed ratio, `E_c ∝ 1/√(T₁T₂)` scales as
/// `1/t1_factor`; the weak-field loss `tan δ₀` is unchanged. Factors below
/// one are refused unless `allow_degradation` is set.
pub fn rescale_for_gap(model: &LossModel, t1_factor: f64, allow_degradation: bool) -> Result<LossModel> {
    if !(t1_factor > 0.0 && t1_factor.is_finite()) {
        return Err(Error::Domain(format!("t1_factor {t1_factor} must be positive")));
    }
    if t1_factor < 1.0 && !allow_degradation {
        return Err(Error::Domain(format!(
            "t1_factor {t1_factor} < 1 would shorten TLS lifetimes"
        )));
    }
    Ok(LossModel {
        e_c: model.e_c / t1_factor,
        ..*model
    })
}

/// `Q = 1/(participation · tan δ)`.
pub fn quality_factor_from_loss(tan_delta: f64, participation: f64) -> f64 {
    1.0 / (participation * tan_delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub e_ac_over_ec: f64,
    pub tan_delta: f64,
    pub tan_delta_gapped: f64,
    pub ratio: f64,
}

/// Loss tangent with and without the gap over drive fields `e_ac/e_c`.
pub fn power_sweep(model: &LossModel, t1_factor: f64, fields_over_ec: &[f64]) -> Result<Vec<SweepRow>> {
    model.validate()?;
    let gapped = rescale_for_gap(model, t1_factor, false)?;
    Ok(fields_over_ec
        .iter()
        .map(|&x| {
            let e = x * model.e_c;
            let a = loss_tangent(model, e);
            let b = loss_tangent(&gapped, e);
            SweepRow {
                e_ac_over_ec: x,
                tan_delta: a,
                tan_delta_gapped: b,
                ratio: b / a,
            }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(out: W, model: &LossModel, t1_factor: f64, rows: &[SweepRow]) -> Result<()> {
    let comments = vec![
        ("tan_delta0".to_string(), model.tan_delta0.to_string()),
        ("e_c".to_string(), model.e_c.to_string()),
        ("t2_over_t1".to_string(), model.t2_over_t1.to_string()),
        ("t1_factor".to_string(), t1_factor.to_string()),
    ];
    table::write_numeric_table(
        out,
        &comments,
        &["e_ac_over_ec", "tan_delta", "tan_delta_gapped", "ratio"],
        rows.iter()
            .map(|r| vec![r.e_ac_over_ec, r.tan_delta, r.tan_delta_gapped, r.ratio]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: LossModel = LossModel {
        tan_delta0: 2e-6,
        e_c: 0.5,
        t2_over_t1: 2.0,
    };

    #[test]
    fn loss_tangent_landmarks() {
        assert_eq!(loss_tangent(&M, 0.0), 2e-6);
        assert!((loss_tangent(&M, 0.5) - 2e-6 / 2f64.sqrt()).abs() < 1e-20);
        let high = loss_tangent(&M, 500.0);
        assert!((high / 2e-9 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rescale_identity_and_guards() {
        assert_eq!(rescale_for_gap(&M, 1.0, false).unwrap(), M);
        assert!(matches!(rescale_for_gap(&M, 0.5, false), Err(Error::Domain(_))));
        assert!((rescale_for_gap(&M, 0.5, true).unwrap().e_c - 1.0).abs() < 1e-15);
        assert!(rescale_for_gap(&M, 0.0, true).is_err());
    }

    #[test]
    fn weak_field_loss_unchanged_by_gap() {
        let g = rescale_for_gap(&M, 100.0, false).unwrap();
        assert_eq!(loss_tangent(&g, 0.0), loss_tangent(&M, 0.0));
    }

    #[test]
    fn high_field_ratio_is_inverse_factor() {
        let g = rescale_for_gap(&M, 9.0, false).unwrap();
        let e = 1e4 * M.e_c;
        let ratio = loss_tangent(&g, e) / loss_tangent(&M, e);
        assert!((ratio * 9.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn q_from_loss() {
        assert!((quality_factor_from_loss(1e-6, 1.0) - 1e6).abs() < 1e-6);
        assert!((quality_factor_from_loss(1e-6, 1e-2) - 1e8).abs() < 1e-4);
        assert_eq!(quality_factor_from_loss(5e-7, 1.0), 2.0 * quality_factor_from_loss(1e-6, 1.0));
    }

    #[test]
    fn validation() {
        assert!(LossModel { t2_over_t1: 2.5, ..M }.validate().is_err());
        assert!(LossModel { tan_delta0: 0.0, ..M }.validate().is_err());
        assert!(M.validate().is_ok());
    }
}
