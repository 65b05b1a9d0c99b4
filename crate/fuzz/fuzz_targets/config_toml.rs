#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // Keep the target hermetic: configs naming an external curve file are skipped.
    if text.contains("angular_curve") {
        return;
    }
    if let Ok(config) = ExperimentConfig::from_toml_str(text, None) {
        let again = config.to_toml_string().expect("valid config serializes");
        let back = ExperimentConfig::from_toml_str(&again, None).expect("serialized config parses");
        assert_eq!(back, config);
    }
});
