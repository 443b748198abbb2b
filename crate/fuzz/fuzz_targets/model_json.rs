#![no_main]

use libfuzzer_sys::fuzz_target;
use mogen_core::models::MoGenModel;

// A model that loads must serialise again.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = MoGenModel::from_json(text) {
        model.to_json().expect("loaded model serialises");
    }
});
