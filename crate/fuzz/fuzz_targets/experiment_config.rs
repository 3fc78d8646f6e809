#![no_main]

use libfuzzer_sys::fuzz_target;
use pulsefit::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_json(text) else { return };
    // validation may reject it, but must not panic
    let _ = cfg.validate();
    let json = cfg.to_json().expect("parsed config serializes");
    ExperimentConfig::from_json(&json).expect("serialized config parses");
});
