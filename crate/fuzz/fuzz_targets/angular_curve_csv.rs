#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::gap::{angular_average, StandardWeight, SuppressionCurve, TabulatedCurve};

fuzz_target!(|data: &[u8]| {
    if let Ok(curve) = TabulatedCurve::read_csv(data) {
        let max = curve.max_depth();
        for k in 0..=16 {
            let d = curve.depth_at(k as f64 * std::f64::consts::FRAC_PI_2 / 16.0);
            assert!((0.0..=max).contains(&d));
        }
        let _ = angular_average(&curve, &StandardWeight::Isotropic);
    }
});
