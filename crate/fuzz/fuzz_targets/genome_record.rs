#![no_main]

use libfuzzer_sys::fuzz_target;
use pulsefit::harness::GenomeRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(record) = GenomeRecord::from_json(text) {
        let back = GenomeRecord::from_json(&record.to_json().unwrap()).expect("round trip");
        assert_eq!(back.genes.len(), record.genes.len());
        assert_eq!(back.seed, record.seed);
    }
});
