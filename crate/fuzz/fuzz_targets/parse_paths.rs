#![no_main]

use libfuzzer_sys::fuzz_target;
use mogen_core::pathdata::{parse_paths, write_paths, PathFormat};

// First byte picks the layout; anything that parses must also write back out.
fuzz_target!(|data: &[u8]| {
    let Some((&flags, text)) = data.split_first() else { return };
    let format = PathFormat {
        delimiter: if flags & 1 == 0 { ',' } else { ' ' },
        trailing_count: flags & 2 != 0,
    };
    if let Ok(ds) = parse_paths(text, &format) {
        let mut out = Vec::new();
        write_paths(&ds, &mut out, &format).expect("parsed dataset writes");
    }
});
