#![no_main]

use libfuzzer_sys::fuzz_target;
use nrals::formula::sexpr::read_all;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_all(text, 64);
    }
});
