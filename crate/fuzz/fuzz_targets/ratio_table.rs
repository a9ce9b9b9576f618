#![no_main]
use libfuzzer_sys::fuzz_target;

use lorlab::io::parse_ratio_rows;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_ratio_rows(text);
    }
});
