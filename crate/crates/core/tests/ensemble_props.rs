use proptest::prelude::*;
use tlsgap::ensemble::{expected_tls_count, sample_ensemble, EnsembleConfig, TlsEnsemble};

fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn large_sample() -> TlsEnsemble {
    sample_ensemble(&EnsembleConfig {
        n_tls: 100_000,
        seed: 2024,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn marginal_distributions_pass_ks() {
    let ens = large_sample();
    let cfg = &ens.config;
    let col = |f: fn(&tlsgap::ensemble::TlsParams) -> f64| ens.members.iter().map(f).collect::<Vec<_>>();
    let span = (cfg.delta0_max / cfg.delta0_min).ln();
    let d_delta = ks_statistic(col(|m| m.delta0), |x| (x / cfg.delta0_min).ln() / span);
    let d_u = ks_statistic(col(|m| m.dipole_factor), |x| x);
    let d_theta = ks_statistic(col(|m| m.theta), f64::sin);
    let bw = cfg.bandwidth;
    let d_det = ks_statistic(col(|m| m.detuning), |x| (x + bw / 2.0) / bw);
    for (name, d) in [("delta0", d_delta), ("dipole_factor", d_u), ("theta", d_theta), ("detuning", d_det)] {
        assert!(d < 0.01, "{name}: KS statistic {d}");
    }
}

#[test]
fn lifetime_moments_match_sampled_law() {
    let ens = large_sample();
    let n = ens.members.len() as f64;
    let ln = 100f64.ln();
    // E[1/δ₀] = (1/ln 100)(1/0.01 − 1) ≈ 21.5
    let inv = ens.members.iter().map(|m| 1.0 / m.delta0).sum::<f64>() / n;
    let want_inv = (1.0 / 0.01 - 1.0) / ln;
    assert!((inv / want_inv - 1.0).abs() < 0.05, "E[1/delta0] {inv} vs {want_inv}");
    // E[T₁/T₁,min] = E[1/δ₀²] = (1/(2 ln 100))(1/0.01² − 1) ≈ 1086
    let mean = ens.members.iter().map(|m| m.t1_intrinsic / ens.config.t1_min).sum::<f64>() / n;
    let want = (1.0 / (0.01 * 0.01) - 1.0) / (2.0 * ln);
    assert!((mean / want - 1.0).abs() < 0.05, "mean T1 ratio {mean} vs {want}");
}

fn config_strategy() -> impl Strategy<Value = EnsembleConfig> {
    (
        1usize..300,
        any::<u64>(),
        1e-4f64..0.5,
        1e-9f64..1e-4,
        1e3f64..1e6,
        1e5f64..1e8,
    )
        .prop_map(|(n_tls, seed, delta0_min, t1_min, omega, bw)| EnsembleConfig {
            n_tls,
            seed,
            delta0_min,
            t1_min,
            omega_rabi_max: omega,
            bandwidth: bw,
            ..Default::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derived_fields_are_consistent(cfg in config_strategy()) {
        let ens = sample_ensemble(&cfg).unwrap();
        prop_assert_eq!(ens.members.len(), cfg.n_tls);
        for m in &ens.members {
            prop_assert!((m.t1_intrinsic * m.delta0 * m.delta0 / cfg.t1_min - 1.0).abs() <= 4.0 * f64::EPSILON);
            if m.dipole_factor > 0.0 {
                prop_assert!((m.omega / (cfg.omega_rabi_max * m.delta0) / m.dipole_factor - 1.0).abs() <= 4.0 * f64::EPSILON);
            }
            prop_assert!(m.delta0 >= cfg.delta0_min && m.delta0 <= cfg.delta0_max);
            prop_assert!((0.0..=1.0).contains(&m.dipole_factor));
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&m.theta));
            prop_assert!(m.detuning.abs() <= cfg.bandwidth / 2.0);
        }
    }

    #[test]
    fn sampling_is_pure(cfg in config_strategy()) {
        let a = sample_ensemble(&cfg).unwrap();
        let b = sample_ensemble(&cfg).unwrap();
        prop_assert_eq!(a.members, b.members);
    }

    #[test]
    fn csv_round_trip_is_exact(cfg in config_strategy()) {
        let ens = sample_ensemble(&cfg).unwrap();
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).unwrap();
        let back = TlsEnsemble::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.members, ens.members);
        prop_assert_eq!(back.seed_used, ens.seed_used);
    }

    #[test]
    fn truncation_is_monotone(lo in 1e-6f64..0.9, frac in 0.01f64..0.99) {
        let smaller = lo * frac;
        let a = expected_tls_count(5e43, 1e-16, 1e7, lo).unwrap();
        let b = expected_tls_count(5e43, 1e-16, 1e7, smaller).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn count_is_linear_in_volume(v in 1e-18f64..1e-12, k in 1.0f64..100.0) {
        let a = expected_tls_count(5e43, v, 1e7, 0.01).unwrap();
        let b = expected_tls_count(5e43, k * v, 1e7, 0.01).unwrap();
        prop_assert!((b / a / k - 1.0).abs() < 1e-12);
    }
}
