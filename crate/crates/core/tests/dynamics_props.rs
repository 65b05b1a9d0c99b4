use std::time::Instant;

use proptest::prelude::*;
use tlsgap::dynamics::dense::propagate_dense;
use tlsgap::dynamics::fit::median;
use tlsgap::dynamics::lindblad::{lindblad_oracle, InitialExcitation};
use tlsgap::dynamics::{
    build_generator, fit_qubit_t1, propagate, propagate_from, ArrowheadGenerator, ExcitationState, GapApplication,
};
use tlsgap::ensemble::{sample_ensemble, EnsembleConfig};
use tlsgap::integrate::uniform_grid;

fn generator_strategy(max_n: usize) -> impl Strategy<Value = ArrowheadGenerator> {
    (1..=max_n).prop_flat_map(|n| {
        (
            -2e5f64..2e5,
            prop::collection::vec(-1e6f64..1e6, n),
            prop::collection::vec(0.0f64..3e5, n),
            prop::collection::vec(0.0f64..3e6, n),
        )
            .prop_map(|(q, d, c, g)| ArrowheadGenerator {
                qubit_detuning: q,
                tls_detunings: d,
                couplings: c,
                decay_rates: g,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conservation_and_monotone_leakage(g in generator_strategy(40)) {
        let tol = 1e-8;
        let tr = propagate(&g, &uniform_grid(10e-6, 201), tol).unwrap();
        for i in 0..tr.times.len() {
            let total = tr.p_qubit[i] + tr.p_tls_total[i] + tr.p_emitted[i];
            prop_assert!((total - 1.0).abs() <= 10.0 * tol);
            prop_assert!(tr.p_emitted[i] >= -10.0 * tol);
            if i > 0 {
                prop_assert!(tr.p_emitted[i] >= tr.p_emitted[i - 1] - 10.0 * tol);
            }
        }
    }

    #[test]
    fn subspace_matches_master_equation(g in generator_strategy(4), start_tls in any::<bool>()) {
        let n = g.n_tls();
        let (init, state) = if start_tls {
            (InitialExcitation::Tls(n - 1), ExcitationState::tls_excited(n, n - 1))
        } else {
            (InitialExcitation::Qubit, ExcitationState::qubit_excited(n))
        };
        let grid = uniform_grid(10e-6, 101);
        let a = propagate_from(&g, &state, &grid, 1e-11).unwrap().trace;
        let b = lindblad_oracle(&g, init, &grid, 1e-11).unwrap().trace;
        for i in 0..grid.len() {
            prop_assert!((a.p_qubit[i] - b.p_qubit[i]).abs() <= 1e-6);
            prop_assert!((a.p_tls_total[i] - b.p_tls_total[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn arrowhead_matches_dense(g in generator_strategy(64)) {
        let grid = uniform_grid(5e-6, 51);
        let a = propagate_from(&g, &ExcitationState::qubit_excited(g.n_tls()), &grid, 1e-9).unwrap();
        let b = propagate_dense(&g, &grid, 1e-9).unwrap();
        let scale = a.final_state.norm_sqr().sqrt().max(1e-300);
        let mut diff = (a.final_state.qubit_amplitude - b.final_state.qubit_amplitude).norm_sqr();
        for (x, y) in a.final_state.tls_amplitudes.iter().zip(&b.final_state.tls_amplitudes) {
            diff += (x - y).norm_sqr();
        }
        prop_assert!(diff.sqrt() / scale <= 1e-12);
    }
}

#[test]
fn conservation_at_ten_thousand_defects() {
    let ens = sample_ensemble(&EnsembleConfig {
        n_tls: 10_000,
        volume: 6.4e-15,
        omega_rabi_max: 87e3,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let g = build_generator(&ens, &GapApplication::None).unwrap();
    let tol = 1e-8;
    let tr = propagate(&g, &uniform_grid(1e-6, 101), tol).unwrap();
    for i in 0..tr.times.len() {
        assert!((tr.p_qubit[i] + tr.p_tls_total[i] + tr.p_emitted[i] - 1.0).abs() <= 10.0 * tol);
        if i > 0 {
            assert!(tr.p_emitted[i] >= tr.p_emitted[i - 1] - 10.0 * tol);
        }
    }
}

fn seconds_per_rhs(n: usize) -> f64 {
    let ens = sample_ensemble(&EnsembleConfig {
        n_tls: n,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    let g = build_generator(&ens, &GapApplication::None).unwrap();
    let grid = uniform_grid(2e-6, 3);
    (0..3)
        .map(|_| {
            let start = Instant::now();
            let p = propagate_from(&g, &ExcitationState::qubit_excited(n), &grid, 1e-8).unwrap();
            start.elapsed().as_secs_f64() / p.stats.rhs_evals as f64
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn step_cost_is_subquadratic() {
    let small = seconds_per_rhs(1_000);
    let large = seconds_per_rhs(10_000);
    let ratio = large / small;
    // Linear scaling gives 10, quadratic 100.
    assert!(ratio < 40.0, "per-evaluation cost ratio {ratio}");
}

fn median_fit(t1_min: f64, gap: GapApplication) -> f64 {
    let grid = uniform_grid(100e-6, 1001);
    let fits: Vec<f64> = (0..20)
        .map(|seed| {
            let ens = sample_ensemble(&EnsembleConfig {
                t1_min,
                seed,
                ..Default::default()
            })
            .unwrap();
            let g = build_generator(&ens, &gap).unwrap();
            fit_qubit_t1(&propagate(&g, &grid, 1e-8).unwrap()).t1.unwrap_or(f64::INFINITY)
        })
        .collect();
    median(&fits).unwrap()
}

#[test]
fn longer_defect_lifetimes_do_not_shorten_the_qubit() {
    let medians: Vec<f64> = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|f| median_fit(1e-7, GapApplication::Isotropic { t1_factor: f }))
        .collect();
    for w in medians.windows(2) {
        assert!(w[1] >= w[0], "median fitted T1 decreased: {medians:?}");
    }
}

#[test]
fn overdamped_defects_release_the_qubit() {
    let fast = median_fit(1e-10, GapApplication::None);
    let slower = median_fit(1e-8, GapApplication::None);
    assert!(fast > slower, "T1 at 0.1 ns {fast} vs at 10 ns {slower}");
}
