#![no_main]

use libfuzzer_sys::fuzz_target;
use nrals::formula::{parse_smt2_with, ParseLimits};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(script) = parse_smt2_with(text, ParseLimits::default()) {
        // printing and reparsing must succeed for anything accepted
        let again = nrals::formula::parse_smt2(&script.problem.to_smt2()).expect("printed problem parses");
        assert_eq!(again.problem.num_reals(), script.problem.num_reals());
    }
});
