#![no_main]

use libfuzzer_sys::fuzz_target;
use pulsefit::pulse::PulseSchedule;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(schedule) = PulseSchedule::from_csv(text) else { return };
    let _ = schedule.total_time();
    let again = PulseSchedule::from_csv(&schedule.to_csv()).expect("written schedule parses");
    assert_eq!(again, schedule);
});
