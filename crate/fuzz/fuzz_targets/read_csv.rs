#![no_main]

use libfuzzer_sys::fuzz_target;
use nrals::driver::{read_csv, write_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = read_csv(text) {
        let mut buf = Vec::new();
        write_csv(&mut buf, &records).unwrap();
    }
});
