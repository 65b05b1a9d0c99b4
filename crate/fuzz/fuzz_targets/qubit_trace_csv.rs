#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::dynamics::{fit_qubit_t1, QubitTrace};

fuzz_target!(|data: &[u8]| {
    if let Ok(trace) = QubitTrace::read_csv(data) {
        if !trace.times.is_empty() {
            let _ = fit_qubit_t1(&trace);
        }
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).expect("parsed trace writes");
        assert_eq!(QubitTrace::read_csv(buf.as_slice()).expect("written trace parses"), trace);
    }
});
