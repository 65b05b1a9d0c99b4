#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::harness::read_heatmap_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_heatmap_csv(data) {
        assert!(rows.iter().all(|r| r.t1_min > 0.0 && r.time >= 0.0));
    }
});
