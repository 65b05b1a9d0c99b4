#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::harness::{apply_axis, ExperimentConfig, Preset, SweepAxis};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(axis) = SweepAxis::parse(text) {
        let base = ExperimentConfig::for_preset(Preset::Fig4a);
        for &v in axis.values.iter().take(4) {
            let _ = apply_axis(&base, &axis.key, v);
        }
    }
});
