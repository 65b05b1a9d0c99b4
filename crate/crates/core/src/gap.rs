//! Phononic bandgap as a structured phonon spectral density.
//!
//! The bath seen by a single defect is a flat golden-rule baseline minus one
//! Lorentzian dip,
//!
//! ```text
//! D(ω) = (Γ₀/2π) · [1 − Λ·w² / ((ω − ω_g)² + w²)]
//! ```
//!
//! whose memory kernel is a single damped exponential. That makes the exact
//! single-excitation amplitude equation equivalent to a two-variable linear
//! ODE (a pseudomode embedding), solved in [`gapped_decay`]. The
//! integro-differential form is discretized independently in
//! [`volterra_oracle`].

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ensemble::TlsParams;
use crate::error::{Error, Result};
use crate::integrate::{uniform_grid, ComplexSystem, Dopri5, SOLVER_NAME};
use crate::quadrature;
use crate::table;

/// Bandgap parameters as seen by a defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSpec {
    /// Fractional suppression Λ of the spectral density at gap center.
    pub depth: f64,
    /// Gap center, Hz.
    pub center: f64,
    /// Half-width of the suppression lobe, Hz.
    pub width: f64,
    /// Suppression for dipoles in the metal plane.
    pub s_parallel: f64,
    /// Suppression for dipoles normal to the metal plane.
    pub s_perpendicular: f64,
}

impl Default for GapSpec {
    /// 1 GHz full gap centered on a 5 GHz qubit, an order of magnitude of
    /// in-plane suppression and weak out-of-plane suppression.
    fn default() -> Self {
        Self {
            depth: 0.6,
            center: 5e9,
            width: 0.5e9,
            s_parallel: 0.9,
            s_perpendicular: 0.3,
        }
    }
}

impl GapSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.depth) || !unit(self.s_parallel) || !unit(self.s_perpendicular) {
            return Err(Error::Config("gap depths must lie in [0, 1]".into()));
        }
        if !(self.width > 0.0 && self.width.is_finite() && self.center.is_finite()) {
            return Err(Error::Config("gap width must be positive and center finite".into()));
        }
        Ok(())
    }

    /// A gap with no suppression at any angle or frequency.
    pub fn none() -> Self {
        Self {
            depth: 0.0,
            s_parallel: 0.0,
            s_perpendicular: 0.0,
            ..Self::default()
        }
    }

    /// Same suppression `depth` at every angle.
    pub fn isotropic(depth: f64, center: f64, width: f64) -> Self {
        Self {
            depth,
            center,
            width,
            s_parallel: depth,
            s_perpendicular: depth,
        }
    }
}

/// Lifetime multiplier `1/(1 − depth)` in the wide-gap, on-resonance limit.
pub fn t1_enhancement(depth: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&depth) {
        return Err(Error::Domain(format!("gap depth {depth} outside [0, 1)")));
    }
    Ok(1.0 / (1.0 - depth))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    /// Ungapped decay rate Γ₀ = 1/T₁, s⁻¹.
    pub baseline_rate: f64,
    pub gap: GapSpec,
}

impl SpectralDensity {
    pub fn new(baseline_rate: f64, gap: GapSpec) -> Result<Self> {
        gap.validate()?;
        if !(baseline_rate > 0.0 && baseline_rate.is_finite()) {
            return Err(Error::Domain("baseline rate must be positive".into()));
        }
        Ok(Self { baseline_rate, gap })
    }

    /// D(f) at frequency `f` (Hz).
    pub fn density(&self, f: f64) -> f64 {
        let w = self.gap.width;
        let x = f - self.gap.center;
        self.baseline_rate / TAU * (1.0 - self.gap.depth * w * w / (x * x + w * w))
    }

    fn kernel_params(&self, tls_frequency: f64) -> KernelParams {
        let w_ang = TAU * self.gap.width;
        KernelParams {
            half_rate: 0.5 * self.baseline_rate,
            strength: self.gap.depth * self.baseline_rate * w_ang / 2.0,
            decay: C64::new(w_ang, TAU * (self.gap.center - tls_frequency)),
        }
    }
}

/// `dc/dt = −(Γ₀/2)c + A ∫ e^{−κ(t−s)} c(s) ds` with `A = ΛΓ₀w/2`,
/// `κ = w + iδ_g` (angular units).
#[derive(Debug, Clone, Copy)]
struct KernelParams {
    half_rate: f64,
    strength: f64,
    decay: C64,
}

impl ComplexSystem for KernelParams {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
        dy[0] = y[0] * -self.half_rate + y[1];
        dy[1] = y[0] * self.strength - self.decay * y[1];
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub solver: String,
    pub tolerance: f64,
    pub parameters: Vec<(String, f64)>,
}

/// Excited-state probability of one defect over time.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTrace {
    pub times: Vec<f64>,
    pub excited_probability: Vec<f64>,
    pub amplitude: Vec<C64>,
    pub metadata: TraceMetadata,
}

const DECAY_COLUMNS: [&str; 4] = ["time_s", "p_excited", "re_amplitude", "im_amplitude"];

impl DecayTrace {
    fn from_amplitudes(times: Vec<f64>, amplitude: Vec<C64>, metadata: TraceMetadata) -> Self {
        let excited_probability = amplitude.iter().map(|a| a.norm_sqr()).collect();
        Self {
            times,
            excited_probability,
            amplitude,
            metadata,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut comments = vec![
            ("solver".to_string(), self.metadata.solver.clone()),
            ("tolerance".to_string(), self.metadata.tolerance.to_string()),
        ];
        comments.extend(self.metadata.parameters.iter().map(|(k, v)| (k.clone(), v.to_string())));
        let rows = self
            .times
            .iter()
            .zip(&self.excited_probability)
            .zip(&self.amplitude)
            .map(|((t, p), a)| vec![*t, *p, a.re, a.im]);
        table::write_numeric_table(out, &comments, &DECAY_COLUMNS, rows)
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input
            .read_to_string(&mut text)
            .map_err(|e| Error::Parse(format!("trace csv is not UTF-8: {e}")))?;
        let mut metadata = TraceMetadata::default();
        for (k, v) in table::read_header_comments(&text) {
            match k.as_str() {
                "solver" => metadata.solver = v,
                "tolerance" => {
                    metadata.tolerance = v.parse().map_err(|e| Error::Parse(format!("tolerance: {e}")))?
                }
                _ => metadata.parameters.push((
                    k.clone(),
                    v.parse().map_err(|e| Error::Parse(format!("parameter {k}: {e}")))?,
                )),
            }
        }
        let rows = table::read_numeric_table(text.as_bytes(), &DECAY_COLUMNS)?;
        let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("times must be strictly increasing".into()));
        }
        let amplitude: Vec<C64> = rows.iter().map(|r| C64::new(r[2], r[3])).collect();
        for (i, (r, a)) in rows.iter().zip(&amplitude).enumerate() {
            if (r[1] - a.norm_sqr()).abs() > 1e-9 {
                return Err(Error::Parse(format!("row {i}: p_excited differs from |amplitude|^2")));
            }
        }
        Ok(Self {
            times,
            excited_probability: rows.iter().map(|r| r[1]).collect(),
            amplitude,
            metadata,
        })
    }

    /// First time the probability falls to `1/e`, linearly interpolated.
    pub fn one_over_e_time(&self) -> Option<f64> {
        crate::dynamics::fit::first_crossing(&self.times, &self.excited_probability, (-1.0f64).exp())
    }
}

fn check_horizon(horizon: f64, points: usize) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    if points < 2 {
        return Err(Error::Domain("need at least two output points".into()));
    }
    Ok(())
}

/// Exact single-excitation decay of a defect at `tls_frequency` (Hz) into
/// the gapped bath, sampled at `points` uniform times on `[0, horizon]`.
pub fn gapped_decay(
    spectral: &SpectralDensity,
    tls_frequency: f64,
    horizon: f64,
    points: usize,
    tolerance: f64,
) -> Result<DecayTrace> {
    check_horizon(horizon, points)?;
    let sys = spectral.kernel_params(tls_frequency);
    let grid = uniform_grid(horizon, points);
    let mut amplitude = Vec::with_capacity(points);
    Dopri5::with_tolerance(tolerance).solve(&sys, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &grid, |_, _, y| {
        amplitude.push(y[0]);
        Ok(())
    })?;
    let metadata = TraceMetadata {
        solver: format!("{SOLVER_NAME} pseudomode"),
        tolerance,
        parameters: trace_parameters(spectral, tls_frequency),
    };
    Ok(DecayTrace::from_amplitudes(grid, amplitude, metadata))
}

fn trace_parameters(spectral: &SpectralDensity, tls_frequency: f64) -> Vec<(String, f64)> {
    vec![
        ("baseline_rate".into(), spectral.baseline_rate),
        ("depth".into(), spectral.gap.depth),
        ("center_hz".into(), spectral.gap.center),
        ("width_hz".into(), spectral.gap.width),
        ("tls_frequency_hz".into(), tls_frequency),
    ]
}

/// Trapezoidal discretization of the memory-kernel equation
///
/// ```text
/// dc/dt = −(Γ₀/2)·c(t) + Λ(Γ₀w/2) ∫₀ᵗ e^{−(w + iδ_g)(t − s)} c(s) ds
/// ```
///
/// Both the time derivative and the convolution use the trapezoidal rule on
/// a uniform step no larger than `step`. For an exponential kernel the
/// trapezoidal convolution sum obeys a one-term recursion, so the history is
/// carried in a single accumulator. Second-order accurate.
pub fn volterra_oracle(
    spectral: &SpectralDensity,
    tls_frequency: f64,
    horizon: f64,
    step: f64,
    points: usize,
) -> Result<DecayTrace> {
    check_horizon(horizon, points)?;
    let k = spectral.kernel_params(tls_frequency);
    if !(step > 0.0) || spectral.baseline_rate * step >= 1e-2 || k.decay.re * step >= 1e-1 {
        return Err(Error::StepSize(format!(
            "step {step:e} violates Γ₀·h < 1e-2 and w·h < 0.1 (Γ₀ = {:e}, w = {:e})",
            spectral.baseline_rate, k.decay.re
        )));
    }
    let intervals = points - 1;
    let per_output = ((horizon / intervals as f64) / step).ceil().max(1.0) as usize;
    let h = horizon / (intervals * per_output) as f64;

    let e = (-k.decay * h).exp();
    let a = k.strength;
    let g = k.half_rate;
    let denom = 1.0 + 0.5 * h * g - a * h * h / 4.0;

    let mut c = C64::new(1.0, 0.0);
    let mut memory = C64::new(0.0, 0.0);
    let mut amplitude = Vec::with_capacity(points);
    amplitude.push(c);
    for _ in 0..intervals {
        for _ in 0..per_output {
            let f_now = -g * c + a * memory;
            let carried = e * memory + 0.5 * h * e * c;
            let c_next = (c + 0.5 * h * f_now + 0.5 * h * a * carried) / denom;
            memory = carried + 0.5 * h * c_next;
            c = c_next;
        }
        amplitude.push(c);
    }
    let metadata = TraceMetadata {
        solver: "trapezoidal-volterra".into(),
        tolerance: h,
        parameters: trace_parameters(spectral, tls_frequency),
    };
    Ok(DecayTrace::from_amplitudes(uniform_grid(horizon, points), amplitude, metadata))
}

/// Suppression depth for a dipole at angle `theta` from the metal plane,
/// `s_par·cos²θ + s_perp·sin²θ`.
pub fn angular_depth(gap: &GapSpec, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    gap.s_parallel * c * c + gap.s_perpendicular * s * s
}

/// Defect lifetime with the gap's angular suppression applied.
pub fn effective_tls_t1(tls: &TlsParams, gap: &GapSpec) -> Result<f64> {
    let depth = angular_depth(gap, tls.theta);
    if depth >= 1.0 {
        return Err(Error::PerfectGap);
    }
    Ok(tls.t1_intrinsic / (1.0 - depth))
}

/// Suppression depth as a function of the dipole angle from the plane.
pub trait SuppressionCurve {
    fn depth_at(&self, theta: f64) -> f64;

    /// Largest depth attained on `[0, π/2]`.
    fn max_depth(&self) -> f64;

    /// Points where the curve may have a kink.
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, FRAC_PI_2]
    }
}

impl SuppressionCurve for GapSpec {
    fn depth_at(&self, theta: f64) -> f64 {
        angular_depth(self, theta)
    }

    fn max_depth(&self) -> f64 {
        self.s_parallel.max(self.s_perpendicular)
    }
}

/// Piecewise-linear suppression curve from tabulated `(theta, depth)`
/// points, held constant beyond the first and last angles.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    points: Vec<(f64, f64)>,
}

const CURVE_COLUMNS: [&str; 2] = ["theta_radians", "depth"];

impl TabulatedCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parse("suppression curve has no points".into()));
        }
        for &(theta, depth) in &points {
            if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
                return Err(Error::Parse(format!("theta {theta} outside [0, pi/2]")));
            }
            if !(0.0..=1.0).contains(&depth) {
                return Err(Error::Parse(format!("depth {depth} outside [0, 1]")));
            }
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Parse("theta values must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Two-column CSV, `theta_radians,depth`, with optional `#` comments.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input
            .read_to_end(&mut bytes)
            .map_err(|e| Error::Parse(format!("reading curve: {e}")))?;
        let rows = table::read_numeric_table(&bytes, &CURVE_COLUMNS)?;
        Self::new(rows.into_iter().map(|r| (r[0], r[1])).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        table::write_numeric_table(out, &[], &CURVE_COLUMNS, self.points.iter().map(|&(t, d)| vec![t, d]))
    }
}

impl SuppressionCurve for TabulatedCurve {
    fn depth_at(&self, theta: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|&(t, _)| t <= theta);
        if i == 0 {
            return p[0].1;
        }
        if i == p.len() {
            return p[p.len() - 1].1;
        }
        let (t0, d0) = p[i - 1];
        let (t1, d1) = p[i];
        d0 + (d1 - d0) * (theta - t0) / (t1 - t0)
    }

    fn max_depth(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        b.extend(self.points.iter().map(|p| p.0).filter(|&t| t > 0.0 && t < FRAC_PI_2));
        b.push(FRAC_PI_2);
        b
    }
}

/// Normalized density over the angle from the metal plane on `[0, π/2]`.
pub trait AngularWeight {
    fn density(&self, theta: f64) -> f64;
    fn name(&self) -> &str;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardWeight {
    /// `cos θ`: isotropically oriented dipoles, angle measured from the plane.
    Isotropic,
    /// `sin θ` in the angle from the plane.
    Sine,
}

impl StandardWeight {
    pub const ALL: [StandardWeight; 2] = [StandardWeight::Isotropic, StandardWeight::Sine];
}

impl AngularWeight for StandardWeight {
    fn density(&self, theta: f64) -> f64 {
        match self {
            StandardWeight::Isotropic => theta.cos(),
            StandardWeight::Sine => theta.sin(),
        }
    }

    fn name(&self) -> &str {
        match self {
            StandardWeight::Isotropic => "isotropic",
            StandardWeight::Sine => "sine",
        }
    }
}

/// Adapter for an arbitrary density function.
pub struct FnWeight<F>(pub &'static str, pub F);

impl<F: Fn(f64) -> f64> AngularWeight for FnWeight<F> {
    fn density(&self, theta: f64) -> f64 {
        (self.1)(theta)
    }

    fn name(&self) -> &str {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularAverage {
    pub mean_depth: f64,
    pub mean_rate_factor: f64,
    pub mean_t1_factor: f64,
}

/// Weighted averages over dipole angle of the depth, the residual rate
/// factor `1 − Λ(θ)` and the lifetime factor `1/(1 − Λ(θ))`.
pub fn angular_average<C, W>(curve: &C, weight: &W) -> Result<AngularAverage>
where
    C: SuppressionCurve + ?Sized,
    W: AngularWeight + ?Sized,
{
    const TOL: f64 = 1e-12;
    let breaks = curve.breakpoints();
    let norm = quadrature::integrate_panels(&|t| weight.density(t), &breaks, TOL);
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("angular weight integrates to {norm}, not 1")));
    }
    if curve.max_depth() >= 1.0 {
        return Err(Error::Divergent);
    }
    let mean_depth = quadrature::integrate_panels(&|t| curve.depth_at(t) * weight.density(t), &breaks, TOL);
    let mean_rate_factor =
        quadrature::integrate_panels(&|t| (1.0 - curve.depth_at(t)) * weight.density(t), &breaks, TOL);
    let mean_t1_factor =
        quadrature::integrate_panels(&|t| weight.density(t) / (1.0 - curve.depth_at(t)), &breaks, TOL);
    Ok(AngularAverage {
        mean_depth,
        mean_rate_factor,
        mean_t1_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn flat(depth: f64) -> TabulatedCurve {
        TabulatedCurve::new(vec![(0.0, depth), (FRAC_PI_2, depth)]).unwrap()
    }

    #[test]
    fn enhancement_values() {
        assert_eq!(t1_enhancement(0.0).unwrap(), 1.0);
        assert!((t1_enhancement(0.6).unwrap() - 2.5).abs() < 1e-12);
        assert!((t1_enhancement(0.99).unwrap() - 100.0).abs() < 1e-9);
        assert!(matches!(t1_enhancement(1.0), Err(Error::Domain(_))));
        assert!(matches!(t1_enhancement(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn density_shape() {
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.9, 5e9, 0.5e9)).unwrap();
        assert!((sd.density(5e9) - 1e6 / TAU * 0.1).abs() < 1e-6);
        assert!((sd.density(5.5e9) - 1e6 / TAU * 0.55).abs() < 1e-6);
        assert!(sd.density(1e12) > 0.999 * 1e6 / TAU);
    }

    #[test]
    fn ungapped_decay_is_exponential() {
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.0, 5e9, 0.5e9)).unwrap();
        let tr = gapped_decay(&sd, 5e9, 5e-6, 201, 1e-10).unwrap();
        assert_eq!(tr.excited_probability[0], 1.0);
        for (t, p) in tr.times.iter().zip(&tr.excited_probability) {
            assert!((p - (-1e6 * t).exp()).abs() < 1e-8, "t={t} p={p}");
        }
    }

    #[test]
    fn moderate_gap_one_over_e_time() {
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.6, 5e9, 0.5e9)).unwrap();
        let tr = gapped_decay(&sd, 5e9, 5e-6, 5001, 1e-9).unwrap();
        let t = tr.one_over_e_time().unwrap();
        assert!((2.0e-6..=2.6e-6).contains(&t), "{t}");
    }

    #[test]
    fn deep_gap_one_over_e_time() {
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.99, 5e9, 0.5e9)).unwrap();
        let tr = gapped_decay(&sd, 5e9, 150e-6, 1501, 1e-9).unwrap();
        assert!(tr.one_over_e_time().unwrap() > 50e-6);
    }

    #[test]
    fn oracle_requires_small_step() {
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.5, 5e9, 1e7)).unwrap();
        assert!(matches!(volterra_oracle(&sd, 5e9, 1e-6, 1e-7, 11), Err(Error::StepSize(_))));
        assert!(matches!(volterra_oracle(&sd, 5e9, 1e-6, 1e-8, 11), Err(Error::StepSize(_))));
        assert!(volterra_oracle(&sd, 5e9, 1e-6, 1e-9, 11).is_ok());
    }

    #[test]
    fn oracle_markovian_limit_second_order() {
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.0, 5e9, 1e6)).unwrap();
        let err = |h: f64| {
            let tr = volterra_oracle(&sd, 5e9, 3e-6, h, 31).unwrap();
            tr.times
                .iter()
                .zip(&tr.excited_probability)
                .map(|(t, p)| (p - (-1e6 * t).exp()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(4e-9), err(2e-9));
        assert!(e1 < 1e-5);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "order ratio {ratio}");
    }

    #[test]
    fn far_detuned_gap_is_invisible() {
        // |δ_g| ≫ w, Γ₀: the kernel averages out under fast rotation.
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.9, 5e9 + 2e9, 1e6)).unwrap();
        let tr = volterra_oracle(&sd, 5e9, 3e-6, 2e-12, 31).unwrap();
        let p = *tr.excited_probability.last().unwrap();
        let expect = (-3.0f64).exp();
        assert!(((p - expect) / expect).abs() < 0.01, "{p} vs {expect}");
    }

    #[test]
    fn angular_depth_endpoints_and_midpoint() {
        let g = GapSpec {
            s_parallel: 0.9,
            s_perpendicular: 0.3,
            ..GapSpec::default()
        };
        assert!((angular_depth(&g, 0.0) - 0.9).abs() < 1e-15);
        assert!((angular_depth(&g, FRAC_PI_2) - 0.3).abs() < 1e-15);
        assert!((angular_depth(&g, FRAC_PI_4) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn effective_t1_cases() {
        let tls = TlsParams {
            delta0: 1.0,
            dipole_factor: 1.0,
            theta: 0.0,
            detuning: 0.0,
            t1_intrinsic: 1e-6,
            omega: 0.0,
        };
        assert_eq!(effective_tls_t1(&tls, &GapSpec::none()).unwrap(), 1e-6);
        let g = GapSpec {
            s_parallel: 0.9,
            s_perpendicular: 0.3,
            ..GapSpec::default()
        };
        assert!((effective_tls_t1(&tls, &g).unwrap() - 1e-5).abs() < 1e-18);
        for theta in [0.0, 0.3, 1.2, FRAC_PI_2] {
            let t = effective_tls_t1(&TlsParams { theta, ..tls }, &GapSpec::isotropic(0.99, 5e9, 1e9)).unwrap();
            assert!((t / 1e-6 - 100.0).abs() < 1e-9);
        }
        let perfect = GapSpec::isotropic(1.0, 5e9, 1e9);
        assert!(matches!(effective_tls_t1(&tls, &perfect), Err(Error::PerfectGap)));
    }

    #[test]
    fn constant_curves_average_trivially() {
        for w in StandardWeight::ALL {
            let a = angular_average(&flat(0.0), &w).unwrap();
            assert!((a.mean_depth).abs() < 1e-9 && (a.mean_rate_factor - 1.0).abs() < 1e-9);
            assert!((a.mean_t1_factor - 1.0).abs() < 1e-9);
            let b = angular_average(&flat(0.5), &w).unwrap();
            assert!((b.mean_depth - 0.5).abs() < 1e-9);
            assert!((b.mean_rate_factor - 0.5).abs() < 1e-9);
            assert!((b.mean_t1_factor - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn anisotropic_average_closed_form() {
        // cos weight: <cos²θ> = 2/3, so mean depth = (2/3)s_par + (1/3)s_perp.
        let g = GapSpec {
            s_parallel: 0.9,
            s_perpendicular: 0.3,
            ..GapSpec::default()
        };
        let a = angular_average(&g, &StandardWeight::Isotropic).unwrap();
        assert!((a.mean_depth - 0.7).abs() < 1e-9);
        // sin weight: <cos²θ> = 1/3.
        let b = angular_average(&g, &StandardWeight::Sine).unwrap();
        assert!((b.mean_depth - 0.5).abs() < 1e-9);
    }

    #[test]
    fn divergence_and_normalization_errors() {
        let touching = TabulatedCurve::new(vec![(0.0, 1.0), (FRAC_PI_2, 0.2)]).unwrap();
        assert!(matches!(angular_average(&touching, &StandardWeight::Isotropic), Err(Error::Divergent)));
        let unnormalized = FnWeight("double", |t: f64| 2.0 * t.cos());
        assert!(matches!(angular_average(&flat(0.1), &unnormalized), Err(Error::Domain(_))));
    }

    #[test]
    fn curve_interpolation_and_parsing() {
        let c = TabulatedCurve::read_csv("# digitized\ntheta_radians,depth\n0.0,0.9\n1.0,0.5\n".as_bytes()).unwrap();
        assert!((c.depth_at(0.5) - 0.7).abs() < 1e-12);
        assert_eq!(c.depth_at(1.5), 0.5);
        assert!(TabulatedCurve::read_csv("theta_radians,depth\n0.5,0.9\n0.2,0.5\n".as_bytes()).is_err());
        assert!(TabulatedCurve::read_csv("theta_radians,depth\n0.5,1.9\n".as_bytes()).is_err());
        assert!(TabulatedCurve::read_csv("theta,depth\n0.5,0.9\n".as_bytes()).is_err());
        assert!(TabulatedCurve::read_csv("theta_radians,depth\n".as_bytes()).is_err());
    }

    #[test]
    fn decay_trace_csv_round_trip() {
        let sd = SpectralDensity::new(1e6, GapSpec::isotropic(0.5, 5e9, 1e8)).unwrap();
        let tr = gapped_decay(&sd, 5e9, 1e-6, 11, 1e-8).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("time_s,p_excited,re_amplitude,im_amplitude"));
        assert_eq!(DecayTrace::read_csv(&buf[..]).unwrap(), tr);
    }
}
