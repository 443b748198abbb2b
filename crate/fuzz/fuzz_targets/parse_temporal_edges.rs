#![no_main]

use libfuzzer_sys::fuzz_target;
use mogen_core::pathdata::{extract_paths, parse_temporal_edges};

fuzz_target!(|data: &[u8]| {
    let Some((&delta, text)) = data.split_first() else { return };
    if let Ok(edges) = parse_temporal_edges(text, b',') {
        let _ = extract_paths(&edges, i64::from(delta) + 1);
    }
});
