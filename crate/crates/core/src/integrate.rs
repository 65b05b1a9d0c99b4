//! Adaptive Dormand–Prince 5(4) integration of complex-valued linear and
//! nonlinear ODE systems, with PI step-size control.
//!
//! The solver steps freely between output times but always lands exactly on
//! each requested grid point, so callers never see interpolated values.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Right-hand side `dy/dt = f(t, y)` for a complex state vector.
pub trait ComplexSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

/// Counters accumulated over one `solve` call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on any single step; `f64::INFINITY` for none.
    pub h_max: f64,
}

pub const SOLVER_NAME: &str = "dopri5-pi";

impl Default for Dopri5 {
    fn default() -> Self {
        Self::with_tolerance(1e-8)
    }
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller gains (Hairer, Nørsett & Wanner).
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct Work {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
}

impl Work {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            y_new: z,
        }
    }
}

impl Dopri5 {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 50_000_000,
            h_max: f64::INFINITY,
        }
    }

    /// Integrate from `grid[0]` with initial state `y0`, calling `observe` at
    /// every grid point (including the first) with the index, time and state.
    pub fn solve<S, F>(&self, sys: &S, y0: &[C64], grid: &[f64], mut observe: F) -> Result<SolveStats>
    where
        S: ComplexSystem + ?Sized,
        F: FnMut(usize, f64, &[C64]) -> Result<()>,
    {
        let n = sys.dim();
        assert_eq!(y0.len(), n, "initial state has wrong dimension");
        if grid.is_empty() {
            return Ok(SolveStats::default());
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("output grid must be strictly increasing".into()));
        }

        let mut stats = SolveStats::default();
        let mut y = y0.to_vec();
        let mut t = grid[0];
        let mut w = Work::new(n);

        observe(0, t, &y)?;
        if grid.len() == 1 {
            return Ok(stats);
        }

        sys.rhs(t, &y, &mut w.k[0]);
        stats.rhs_evals += 1;
        let mut h = self.initial_step(sys, t, &y, &mut w, grid[grid.len() - 1] - t);
        stats.rhs_evals += 1;
        let mut err_prev: f64 = 1e-4;

        for (idx, &t_out) in grid.iter().enumerate().skip(1) {
            while t < t_out {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::Tolerance {
                        tolerance: self.rtol,
                        time: t,
                        reason: format!("step budget of {} exhausted", self.max_steps),
                    });
                }
                let remaining = t_out - t;
                let clamped = h >= remaining;
                let h_try = if clamped { remaining } else { h };
                if h_try <= 16.0 * f64::EPSILON * t.abs().max(remaining) {
                    return Err(Error::Tolerance {
                        tolerance: self.rtol,
                        time: t,
                        reason: "step size underflow".into(),
                    });
                }

                let err = self.try_step(sys, t, h_try, &y, &mut w);
                stats.rhs_evals += 6;

                if err <= 1.0 {
                    stats.accepted += 1;
                    t = if clamped { t_out } else { t + h_try };
                    std::mem::swap(&mut y, &mut w.y_new);
                    // FSAL: the last stage is f(t_new, y_new).
                    w.k.swap(0, 6);
                    let err = err.max(1e-10);
                    let fac = (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX);
                    err_prev = err;
                    // A clamped step does not shrink the natural step size.
                    let h_next = if clamped { h.max(h_try * fac) } else { h_try * fac };
                    h = h_next.min(self.h_max);
                } else {
                    stats.rejected += 1;
                    if !err.is_finite() {
                        h = h_try * FAC_MIN;
                    } else {
                        h = h_try * (SAFETY * err.powf(-0.2)).max(FAC_MIN);
                    }
                }
            }
            observe(idx, t, &y)?;
        }
        Ok(stats)
    }

    fn initial_step<S: ComplexSystem + ?Sized>(&self, sys: &S, t: f64, y: &[C64], w: &mut Work, span: f64) -> f64 {
        let scale = |yi: C64| self.atol + self.rtol * yi.norm();
        let rms = |v: &[C64], y: &[C64]| -> f64 {
            let s: f64 = v.iter().zip(y).map(|(vi, yi)| (vi.norm() / scale(*yi)).powi(2)).sum();
            (s / v.len().max(1) as f64).sqrt()
        };
        let d0 = rms(y, y);
        let d1 = rms(&w.k[0], y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        for ((tmp, yi), ki) in w.tmp.iter_mut().zip(y).zip(&w.k[0]) {
            *tmp = yi + ki * h0;
        }
        sys.rhs(t + h0, &w.tmp, &mut w.k[1]);
        let diff: Vec<C64> = w.k[1].iter().zip(&w.k[0]).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff, y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.h_max)
    }

    /// One trial step; leaves the 5th-order solution in `w.y_new` and
    /// `f(t+h, y_new)` in `w.k[6]`. Returns the scaled RMS error.
    fn try_step<S: ComplexSystem + ?Sized>(&self, sys: &S, t: f64, h: f64, y: &[C64], w: &mut Work) -> f64 {
        let n = y.len();
        macro_rules! stage {
            ($dst:expr, $c:expr, [$(($a:expr, $ki:expr)),*]) => {{
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    $( acc += w.k[$ki][i] * $a; )*
                    w.tmp[i] = y[i] + acc * h;
                }
                let (tmp, k) = (&w.tmp, &mut w.k[$dst]);
                sys.rhs(t + $c * h, tmp, k);
            }};
        }
        stage!(1, C2, [(A21, 0)]);
        stage!(2, C3, [(A31, 0), (A32, 1)]);
        stage!(3, C4, [(A41, 0), (A42, 1), (A43, 2)]);
        stage!(4, C5, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
        stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
        for i in 0..n {
            let k = &w.k;
            w.y_new[i] = y[i] + (k[0][i] * A71 + k[2][i] * A73 + k[3][i] * A74 + k[4][i] * A75 + k[5][i] * A76) * h;
        }
        sys.rhs(t + h, &w.y_new, &mut w.k[6]);

        let mut sum = 0.0;
        for i in 0..n {
            let k = &w.k;
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = self.atol + self.rtol * y[i].norm().max(w.y_new[i].norm());
            sum += (e.norm() / sc).powi(2);
        }
        let err = (sum / n.max(1) as f64).sqrt();
        if err.is_nan() {
            f64::INFINITY
        } else {
            err
        }
    }
}

/// `n` points evenly spaced on `[0, horizon]`, inclusive.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let last = (n - 1) as f64;
    (0..n).map(|i| horizon * i as f64 / last).collect()
}
