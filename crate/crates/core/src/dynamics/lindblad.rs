//! Full density-matrix reference for small defect counts.
//!
//! Basis: index 0 is the global ground state, 1 the excited qubit, `2 + j`
//! defect `j` excited. Collapse operators `√γ_j |0⟩⟨2+j|`.

use num_complex::Complex64 as C64;

use super::{ArrowheadGenerator, QubitTrace};
use crate::error::{Error, Result};
use crate::gap::TraceMetadata;
use crate::integrate::{ComplexSystem, Dopri5, SOLVER_NAME};

pub const MAX_ORACLE_TLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialExcitation {
    Qubit,
    Tls(usize),
}

#[derive(Debug, Clone)]
pub struct LindbladTrace {
    pub trace: QubitTrace,
    /// `tr ρ²` at every output time.
    pub purity: Vec<f64>,
}

struct Liouvillian {
    dim: usize,
    /// Hermitian part, rad/s, row-major.
    h: Vec<C64>,
    gammas: Vec<f64>,
}

impl Liouvillian {
    fn new(g: &ArrowheadGenerator) -> Self {
        let a = g.angular();
        let dim = g.n_tls() + 2;
        let mut h = vec![C64::new(0.0, 0.0); dim * dim];
        h[dim + 1] = C64::new(a.qubit, 0.0);
        for (j, (&c, d)) in a.coupling.iter().zip(&a.diagonal).enumerate() {
            let k = j + 2;
            h[dim + k] = C64::new(c, 0.0);
            h[k * dim + 1] = C64::new(c, 0.0);
            h[k * dim + k] = C64::new(d.re, 0.0);
        }
        Self {
            dim,
            h,
            gammas: g.decay_rates.clone(),
        }
    }
}

impl ComplexSystem for Liouvillian {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, _t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        let minus_i = C64::new(0.0, -1.0);
        for a in 0..d {
            for b in 0..d {
                let mut comm = C64::new(0.0, 0.0);
                for k in 0..d {
                    comm += self.h[a * d + k] * rho[k * d + b] - rho[a * d + k] * self.h[k * d + b];
                }
                out[a * d + b] = minus_i * comm;
            }
        }
        for (j, &gamma) in self.gammas.iter().enumerate() {
            if gamma == 0.0 {
                continue;
            }
            let k = j + 2;
            out[0] += gamma * rho[k * d + k];
            for b in 0..d {
                out[k * d + b] -= 0.5 * gamma * rho[k * d + b];
                out[b * d + k] -= 0.5 * gamma * rho[b * d + k];
            }
        }
    }
}

/// Propagate the density matrix under the Lindblad equation and report the
/// same populations as [`super::propagate`].
pub fn lindblad_oracle(
    generator: &ArrowheadGenerator,
    initial: InitialExcitation,
    grid: &[f64],
    tolerance: f64,
) -> Result<LindbladTrace> {
    generator.validate()?;
    let n = generator.n_tls();
    if n > MAX_ORACLE_TLS {
        return Err(Error::OracleSize(n));
    }
    let l = Liouvillian::new(generator);
    let d = l.dim;
    let start = match initial {
        InitialExcitation::Qubit => 1,
        InitialExcitation::Tls(j) if j < n => j + 2,
        InitialExcitation::Tls(j) => return Err(Error::Domain(format!("no defect with index {j}"))),
    };
    let mut rho0 = vec![C64::new(0.0, 0.0); d * d];
    rho0[start * d + start] = C64::new(1.0, 0.0);

    let mut trace = QubitTrace {
        metadata: TraceMetadata {
            solver: format!("{SOLVER_NAME} lindblad"),
            tolerance,
            parameters: vec![("n_tls".into(), n as f64)],
        },
        ..Default::default()
    };
    let mut purity = Vec::with_capacity(grid.len());
    Dopri5::with_tolerance(tolerance).solve(&l, &rho0, grid, |_, t, rho| {
        let p_qubit = rho[d + 1].re;
        let p_tls: f64 = (2..d).map(|k| rho[k * d + k].re).sum();
        trace.push(t, p_qubit, p_tls, rho[0].re);
        // tr ρ² = Σ |ρ_ab|² for Hermitian ρ
        purity.push(rho.iter().map(|v| v.norm_sqr()).sum());
        Ok(())
    })?;
    Ok(LindbladTrace { trace, purity })
}
