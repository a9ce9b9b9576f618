#![no_main]
use libfuzzer_sys::fuzz_target;

use lorlab::io::decode_header;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = decode_header(text) {
        assert!(h.length.is_power_of_two());
        assert!(h.cell_mass > 0.0 && h.cell_mass.is_finite());
    }
});
