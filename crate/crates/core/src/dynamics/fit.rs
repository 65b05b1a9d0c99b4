//! Lifetime extraction from population traces.

use serde::{Deserialize, Serialize};

use super::QubitTrace;

/// Probability window used by the log-linear fit.
pub const FIT_WINDOW: (f64, f64) = (0.05, 0.9);
/// Traces that never drop below this are flagged non-decaying.
pub const NON_DECAYING_FLOOR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct T1Fit {
    /// Best lifetime estimate; `None` for non-decaying traces.
    pub t1: Option<f64>,
    /// First `1/e` crossing, if any.
    pub crossing: Option<f64>,
    /// Population revives above `1/e` after first crossing it.
    pub oscillatory: bool,
    /// Population stays at or above 0.9 over the whole trace.
    pub non_decaying: bool,
}

/// First time `p` falls below `level`, interpolating `ln p` linearly between
/// the bracketing samples (exact for exponentials).
pub fn first_crossing(times: &[f64], p: &[f64], level: f64) -> Option<f64> {
    let i = p.iter().position(|&v| v < level)?;
    if i == 0 {
        return Some(times[0]);
    }
    let (t0, t1, p0, p1) = (times[i - 1], times[i], p[i - 1], p[i]);
    let frac = if p1 > 0.0 && p0 > 0.0 {
        (p0.ln() - level.ln()) / (p0.ln() - p1.ln())
    } else {
        (p0 - level) / (p0 - p1)
    };
    Some(t0 + frac.clamp(0.0, 1.0) * (t1 - t0))
}

/// Lifetime of a decaying population.
///
/// The estimate is a least-squares fit of `ln p = a − t/T₁` to samples with
/// `0.05 ≤ p ≤ 0.9`, taken before the population first drops below 0.05.
/// Oscillatory traces report the `1/e` crossing instead, as does any trace
/// with fewer than three samples in the window.
pub fn fit_decay(times: &[f64], p: &[f64]) -> T1Fit {
    assert_eq!(times.len(), p.len(), "times and populations differ in length");
    let e_inv = (-1.0f64).exp();
    let non_decaying = p.iter().all(|&v| v >= NON_DECAYING_FLOOR);
    if non_decaying {
        return T1Fit {
            non_decaying: true,
            ..Default::default()
        };
    }
    let crossing = first_crossing(times, p, e_inv);
    let oscillatory = match p.iter().position(|&v| v < e_inv) {
        Some(i) => p[i..].iter().any(|&v| v > e_inv),
        None => false,
    };
    if oscillatory {
        return T1Fit {
            t1: crossing,
            crossing,
            oscillatory,
            non_decaying,
        };
    }

    let end = p.iter().position(|&v| v < FIT_WINDOW.0).unwrap_or(p.len());
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    // Centre times for conditioning.
    let t_ref = times[0];
    for (&t, &v) in times[..end].iter().zip(&p[..end]) {
        if (FIT_WINDOW.0..=FIT_WINDOW.1).contains(&v) {
            let x = t - t_ref;
            let y = v.ln();
            n += 1.0;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
    }
    let slope = if n >= 3.0 {
        let denom = n * sxx - sx * sx;
        (denom > 0.0).then(|| (n * sxy - sx * sy) / denom)
    } else {
        None
    };
    let t1 = match slope {
        Some(s) if s < 0.0 => Some(-1.0 / s),
        _ => crossing,
    };
    T1Fit {
        t1,
        crossing,
        oscillatory,
        non_decaying,
    }
}

pub fn fit_qubit_t1(trace: &QubitTrace) -> T1Fit {
    fit_decay(&trace.times, &trace.p_qubit)
}

/// `Q = 2π·f·T₁`.
pub fn quality_factor(t1: f64, frequency: f64) -> f64 {
    std::f64::consts::TAU * frequency * t1
}

/// Median of finite values; `f64::INFINITY` entries count as "longer than
/// anything measured". `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else if v[n / 2 - 1] == v[n / 2] {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
