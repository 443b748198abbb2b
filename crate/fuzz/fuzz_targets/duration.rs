#![no_main]

use libfuzzer_sys::fuzz_target;
use mogen_cli::duration::parse_duration;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(secs) = parse_duration(text) {
        assert!(secs > 0);
    }
});
