#![no_main]

use libfuzzer_sys::fuzz_target;
use weighted_radon::harness::io::{decode_field, encode_field};

// Input layout: u16 LE header length, header text, payload bytes.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let split = (u16::from_le_bytes([data[0], data[1]]) as usize).min(data.len() - 2);
    let (header, payload) = data[2..].split_at(split);
    let Ok(header) = std::str::from_utf8(header) else {
        return;
    };
    if let Ok((field, h)) = decode_field(header, payload) {
        let (again, bytes) = encode_field(&field, h.mask_radius);
        assert_eq!(bytes, payload);
        assert!(decode_field(&again, &bytes).is_ok());
    }
});
