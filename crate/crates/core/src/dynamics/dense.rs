//! Dense-matrix reference for the one-excitation propagation. Same
//! integrator, O(N²) matrix–vector product; used to check the arrowhead path.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{run_subspace, ArrowheadGenerator, ExcitationState, Propagation};
use crate::error::Result;
use crate::integrate::ComplexSystem;

/// `−i·H_eff` stored as a full matrix.
pub struct DenseGenerator {
    minus_i_h: Array2<C64>,
}

impl DenseGenerator {
    pub fn new(generator: &ArrowheadGenerator) -> Self {
        let a = generator.angular();
        let n = a.coupling.len() + 1;
        let mut h = Array2::<C64>::zeros((n, n));
        h[[0, 0]] = C64::new(a.qubit, 0.0);
        for (j, (&g, &d)) in a.coupling.iter().zip(&a.diagonal).enumerate() {
            h[[0, j + 1]] = C64::new(g, 0.0);
            h[[j + 1, 0]] = C64::new(g, 0.0);
            h[[j + 1, j + 1]] = d;
        }
        let minus_i = C64::new(0.0, -1.0);
        Self {
            minus_i_h: h.mapv(|v| minus_i * v),
        }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.minus_i_h
    }
}

impl ComplexSystem for DenseGenerator {
    fn dim(&self) -> usize {
        self.minus_i_h.nrows()
    }

    fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
        for (row, out) in self.minus_i_h.rows().into_iter().zip(dy.iter_mut()) {
            *out = row.iter().zip(y).fold(C64::new(0.0, 0.0), |acc, (m, v)| acc + m * v);
        }
    }
}

pub fn propagate_dense(generator: &ArrowheadGenerator, grid: &[f64], tolerance: f64) -> Result<Propagation> {
    let dense = DenseGenerator::new(generator);
    let initial = ExcitationState::qubit_excited(generator.n_tls());
    run_subspace(generator, &dense, &initial, grid, tolerance, "dopri5-pi dense")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ArrowheadGenerator, AngularGenerator};

    #[test]
    fn dense_and_arrowhead_rhs_agree() {
        let g = ArrowheadGenerator {
            qubit_detuning: 1e3,
            tls_detunings: vec![1e5, -2e5, 3e4],
            couplings: vec![1e4, 2e4, 5e3],
            decay_rates: vec![1e6, 0.0, 3e5],
        };
        let y: Vec<C64> = (0..4).map(|k| C64::new(0.3 * k as f64 + 0.1, -0.2 * k as f64)).collect();
        let mut a = vec![C64::new(0.0, 0.0); 4];
        let mut b = a.clone();
        let arrow: AngularGenerator = g.angular();
        arrow.rhs(0.0, &y, &mut a);
        DenseGenerator::new(&g).rhs(0.0, &y, &mut b);
        for (x, z) in a.iter().zip(&b) {
            assert!((x - z).norm() <= 1e-12 * x.norm().max(1.0));
        }
    }
}
