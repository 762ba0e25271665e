#![no_main]

use brightcv_core::oracle::{decode_dump, encode_dump};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(samples) = decode_dump(data) {
        assert_eq!(encode_dump(&samples), data);
    }
});
