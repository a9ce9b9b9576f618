#![no_main]
use libfuzzer_sys::fuzz_target;

use lorlab::io::{decode_csv, encode_csv, GridHeader};

fuzz_target!(|data: &[u8]| {
    let Some((&shift, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let header = GridHeader { length: 1usize << (shift % 10), cell_mass: 1.0 };
    if let Ok(f) = decode_csv(&header, text) {
        let again = decode_csv(&header, &encode_csv(&f)).expect("re-encoded grid decodes");
        let same = f.samples().iter().zip(again.samples()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
        assert!(same);
    }
});
