#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = hypspec_harness::parse_grid(text) {
            assert!(!g.is_empty());
            assert!(g.iter().all(|x| x.is_finite()));
        }
    }
});
