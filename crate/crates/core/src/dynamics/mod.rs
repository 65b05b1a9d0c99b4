//! Qubit exchanging one excitation with N decaying defects.
//!
//! In the rotating frame of the qubit, with at most one quantum shared
//! between the qubit and the defects, the state is a vector
//! `(c_q, c_1, …, c_N)` evolving under the non-Hermitian generator
//!
//! ```text
//! H_eff = H − (i/2)·diag(0, γ₁, …, γ_N)
//! ```
//!
//! where `H` couples the qubit to every defect and defects only to the qubit
//! (an arrowhead matrix). Decay leaves the one-excitation sector and never
//! returns, so `1 − ‖ψ‖²` is exactly the probability that a phonon has been
//! emitted and the evolution reproduces the Lindblad populations.

pub mod dense;
pub mod fit;
pub mod lindblad;

use std::f64::consts::TAU;
use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ensemble::TlsEnsemble;
use crate::error::{Error, Result};
use crate::gap::{effective_tls_t1, GapSpec, TraceMetadata};
use crate::integrate::{ComplexSystem, Dopri5, SolveStats, SOLVER_NAME};
use crate::table;

pub use fit::{fit_decay, fit_qubit_t1, quality_factor, T1Fit};

/// Exchange and decay parameters of the qubit–defect system (frequencies in
/// Hz, rates in s⁻¹).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArrowheadGenerator {
    pub qubit_detuning: f64,
    pub tls_detunings: Vec<f64>,
    /// Exchange matrix elements `Ω_j/2`, Hz.
    pub couplings: Vec<f64>,
    /// `γ_j = 1/T₁,j` after any gap enhancement.
    pub decay_rates: Vec<f64>,
}

/// How the phononic gap modifies defect lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum GapApplication {
    None,
    /// Every defect lifetime multiplied by the same factor.
    Isotropic { t1_factor: f64 },
    /// Lifetime enhanced according to each defect's dipole angle.
    Anisotropic { gap: GapSpec },
}

impl ArrowheadGenerator {
    pub fn n_tls(&self) -> usize {
        self.tls_detunings.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tls_detunings.len();
        if self.couplings.len() != n || self.decay_rates.len() != n {
            return Err(Error::Domain("generator vectors have mismatched lengths".into()));
        }
        if self.decay_rates.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::Domain("decay rates must be finite and non-negative".into()));
        }
        if self.couplings.iter().chain(&self.tls_detunings).any(|v| !v.is_finite()) || !self.qubit_detuning.is_finite()
        {
            return Err(Error::Domain("couplings and detunings must be finite".into()));
        }
        Ok(())
    }

    /// Angular-frequency form used by the integrators.
    pub(crate) fn angular(&self) -> AngularGenerator {
        AngularGenerator {
            qubit: TAU * self.qubit_detuning,
            coupling: self.couplings.iter().map(|g| TAU * g).collect(),
            diagonal: self
                .tls_detunings
                .iter()
                .zip(&self.decay_rates)
                .map(|(d, g)| C64::new(TAU * d, -0.5 * g))
                .collect(),
        }
    }

    /// Largest rate in the problem, rad/s; sets the integrator's natural
    /// timescale.
    pub fn fastest_rate(&self) -> f64 {
        let a = self.angular();
        let diag = a.diagonal.iter().map(|d| d.norm()).fold(a.qubit.abs(), f64::max);
        let collective = a.coupling.iter().map(|g| g * g).sum::<f64>().sqrt();
        diag.max(collective)
    }
}

/// Map a sampled ensemble onto a generator. Couplings are `Ω_j/2`.
pub fn build_generator(ensemble: &TlsEnsemble, gap: &GapApplication) -> Result<ArrowheadGenerator> {
    if ensemble.members.is_empty() {
        return Err(Error::Domain("ensemble is empty".into()));
    }
    let decay_rates = ensemble
        .members
        .iter()
        .map(|m| match gap {
            GapApplication::None => Ok(1.0 / m.t1_intrinsic),
            GapApplication::Isotropic { t1_factor } => {
                if !(*t1_factor > 0.0 && t1_factor.is_finite()) {
                    return Err(Error::Domain(format!("isotropic T1 factor {t1_factor} must be positive")));
                }
                Ok(1.0 / (m.t1_intrinsic * t1_factor))
            }
            GapApplication::Anisotropic { gap } => Ok(1.0 / effective_tls_t1(m, gap)?),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ArrowheadGenerator {
        qubit_detuning: 0.0,
        tls_detunings: ensemble.members.iter().map(|m| m.detuning).collect(),
        couplings: ensemble.members.iter().map(|m| 0.5 * m.omega).collect(),
        decay_rates,
    })
}

/// `H_eff` in rad/s: qubit diagonal, couplings, and complex defect
/// diagonal `2πΔ_j − iγ_j/2`.
#[derive(Debug, Clone)]
pub(crate) struct AngularGenerator {
    pub qubit: f64,
    pub coupling: Vec<f64>,
    pub diagonal: Vec<C64>,
}

impl ComplexSystem for AngularGenerator {
    fn dim(&self) -> usize {
        self.coupling.len() + 1
    }

    /// `dψ/dt = −i·H_eff·ψ` in O(N).
    fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
        let q = y[0];
        let mut acc = q * self.qubit;
        for ((g, d), (c, out)) in self.coupling.iter().zip(&self.diagonal).zip(y[1..].iter().zip(&mut dy[1..])) {
            acc += c * g;
            let h = q * g + d * c;
            *out = C64::new(h.im, -h.re);
        }
        dy[0] = C64::new(acc.im, -acc.re);
    }
}

/// Amplitudes in the one-excitation sector.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationState {
    pub qubit_amplitude: C64,
    pub tls_amplitudes: Vec<C64>,
    pub time: f64,
}

impl ExcitationState {
    /// Qubit excited, all defects in their ground state.
    pub fn qubit_excited(n_tls: usize) -> Self {
        Self {
            qubit_amplitude: C64::new(1.0, 0.0),
            tls_amplitudes: vec![C64::new(0.0, 0.0); n_tls],
            time: 0.0,
        }
    }

    /// Defect `j` excited, qubit in its ground state.
    pub fn tls_excited(n_tls: usize, j: usize) -> Self {
        let mut s = Self::qubit_excited(n_tls);
        s.qubit_amplitude = C64::new(0.0, 0.0);
        s.tls_amplitudes[j] = C64::new(1.0, 0.0);
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.qubit_amplitude.norm_sqr() + self.tls_amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    fn to_vec(&self) -> Vec<C64> {
        std::iter::once(self.qubit_amplitude)
            .chain(self.tls_amplitudes.iter().copied())
            .collect()
    }
}

/// Qubit, defect and emitted populations over time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QubitTrace {
    pub times: Vec<f64>,
    pub p_qubit: Vec<f64>,
    pub p_tls_total: Vec<f64>,
    pub p_emitted: Vec<f64>,
    pub metadata: TraceMetadata,
}

const QUBIT_COLUMNS: [&str; 4] = ["time_s", "p_qubit", "p_tls_total", "p_emitted"];

impl QubitTrace {
    fn push(&mut self, t: f64, p_qubit: f64, p_tls: f64, p_emitted: f64) {
        self.times.push(t);
        self.p_qubit.push(p_qubit);
        self.p_tls_total.push(p_tls);
        self.p_emitted.push(p_emitted);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut comments = vec![
            ("solver".to_string(), self.metadata.solver.clone()),
            ("tolerance".to_string(), self.metadata.tolerance.to_string()),
        ];
        comments.extend(self.metadata.parameters.iter().map(|(k, v)| (k.clone(), v.to_string())));
        let rows = (0..self.times.len())
            .map(|i| vec![self.times[i], self.p_qubit[i], self.p_tls_total[i], self.p_emitted[i]]);
        table::write_numeric_table(out, &comments, &QUBIT_COLUMNS, rows)
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
        let rows = table::read_numeric_table(text.as_bytes(), &QUBIT_COLUMNS)?;
        let mut tr = QubitTrace {
            metadata,
            ..Default::default()
        };
        for (i, r) in rows.iter().enumerate() {
            if tr.times.last().is_some_and(|&t| !(r[0] > t)) {
                return Err(Error::Parse(format!("row {i}: times must be strictly increasing")));
            }
            if r[1..].iter().any(|p| !(-1e-6..=1.0 + 1e-6).contains(p)) {
                return Err(Error::Parse(format!("row {i}: probability outside [0, 1]")));
            }
            tr.push(r[0], r[1], r[2], r[3]);
        }
        Ok(tr)
    }
}

/// Result of [`propagate_from`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub trace: QubitTrace,
    pub final_state: ExcitationState,
    pub stats: SolveStats,
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance > 0.0 && tolerance <= 1e-3) {
        return Err(Error::Domain(format!("tolerance {tolerance} outside (0, 1e-3]")));
    }
    Ok(())
}

/// Propagate from the qubit-excited state and record populations at each
/// `grid` time (seconds, starting at 0).
pub fn propagate(generator: &ArrowheadGenerator, grid: &[f64], tolerance: f64) -> Result<QubitTrace> {
    let initial = ExcitationState::qubit_excited(generator.n_tls());
    Ok(propagate_from(generator, &initial, grid, tolerance)?.trace)
}

pub fn propagate_from(
    generator: &ArrowheadGenerator,
    initial: &ExcitationState,
    grid: &[f64],
    tolerance: f64,
) -> Result<Propagation> {
    let system = generator.angular();
    run_subspace(generator, &system, initial, grid, tolerance, SOLVER_NAME)
}

pub(crate) fn run_subspace<S: ComplexSystem>(
    generator: &ArrowheadGenerator,
    system: &S,
    initial: &ExcitationState,
    grid: &[f64],
    tolerance: f64,
    solver: &str,
) -> Result<Propagation> {
    generator.validate()?;
    check_tolerance(tolerance)?;
    if initial.tls_amplitudes.len() != generator.n_tls() {
        return Err(Error::Domain("initial state dimension does not match generator".into()));
    }
    match grid.last() {
        Some(&h) if h > 0.0 => {}
        _ => return Err(Error::Domain("horizon must be positive".into())),
    }
    let mut trace = QubitTrace {
        metadata: TraceMetadata {
            solver: solver.to_string(),
            tolerance,
            parameters: vec![("n_tls".into(), generator.n_tls() as f64)],
        },
        ..Default::default()
    };
    let mut last = initial.to_vec();
    let limit = 1.0 + 10.0 * tolerance;
    let stats = Dopri5::with_tolerance(tolerance).solve(system, &initial.to_vec(), grid, |_, t, y| {
        let p_qubit = y[0].norm_sqr();
        let p_tls: f64 = y[1..].iter().map(|c| c.norm_sqr()).sum();
        let norm = p_qubit + p_tls;
        if !norm.is_finite() || norm > limit {
            return Err(Error::NormGuard { norm, time: t });
        }
        trace.push(t, p_qubit, p_tls, 1.0 - norm);
        last.copy_from_slice(y);
        Ok(())
    })?;
    let final_state = ExcitationState {
        qubit_amplitude: last[0],
        tls_amplitudes: last[1..].to_vec(),
        time: *grid.last().unwrap(),
    };
    Ok(Propagation {
        trace,
        final_state,
        stats,
    })
}
