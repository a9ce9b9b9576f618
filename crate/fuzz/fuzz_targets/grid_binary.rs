#![no_main]
use libfuzzer_sys::fuzz_target;

use lorlab::io::{decode_binary, encode_binary, GridHeader};

// First byte picks the declared length, the rest is the payload.
fuzz_target!(|data: &[u8]| {
    let Some((&shift, payload)) = data.split_first() else { return };
    let header = GridHeader { length: 1usize << (shift % 12), cell_mass: 0.25 };
    if let Ok(f) = decode_binary(&header, payload) {
        assert_eq!(encode_binary(&f), payload);
    }
});
