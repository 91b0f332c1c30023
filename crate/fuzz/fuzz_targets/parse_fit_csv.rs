#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(pts) = hypspec_harness::parse_fit_csv(&text, "lambda", "ratio", Some(("p", "8"))) {
        let _ = hypspec_harness::refit(&pts, "fuzz", 0.25, 0.05);
    }
});
