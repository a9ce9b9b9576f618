#![no_main]
use libfuzzer_sys::fuzz_target;

use lorlab::ext::{parse_positive_exponent, Ext, Num};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(n) = text.parse::<Num>() {
        assert!(n.to_f64().is_finite());
    }
    if let Ok(e) = text.parse::<Ext>() {
        assert!(!e.to_f64().is_nan());
    }
    if let Ok(e) = parse_positive_exponent(text) {
        assert!(e.to_f64() > 0.0);
    }
});
