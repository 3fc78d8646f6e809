#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use pulsefit::harness::{format_generation_log, parse_generation_log, plot_data};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(rows) = parse_generation_log(text, Path::new("fuzz")) else { return };
    let _ = plot_data(&rows);
    let again = parse_generation_log(&format_generation_log(&rows), Path::new("fuzz")).expect("formatted log parses");
    assert_eq!(again.len(), rows.len());
});
