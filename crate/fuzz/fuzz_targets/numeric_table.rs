#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::table::read_numeric_table;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_numeric_table(data, &["a", "b", "c"]) {
        assert!(rows.iter().all(|r| r.len() == 3 && r.iter().all(|v| v.is_finite())));
    }
});
