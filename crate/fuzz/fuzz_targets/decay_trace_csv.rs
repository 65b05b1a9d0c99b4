#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::gap::DecayTrace;

fuzz_target!(|data: &[u8]| {
    if let Ok(trace) = DecayTrace::read_csv(data) {
        assert_eq!(trace.times.len(), trace.excited_probability.len());
        let _ = trace.one_over_e_time();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).expect("parsed trace writes");
        assert_eq!(DecayTrace::read_csv(buf.as_slice()).expect("written trace parses"), trace);
    }
});
