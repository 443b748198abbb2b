#![no_main]

use libfuzzer_sys::fuzz_target;
use mogen_core::pathdata::{parse_actions, paths_from_actions};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = parse_actions(data, b',') {
        let _ = paths_from_actions(&records);
    }
});
