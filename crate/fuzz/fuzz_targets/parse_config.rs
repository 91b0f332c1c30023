#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = hypspec_harness::parse_config(text) {
            // Every accepted config must survive the JSON echo in the summary.
            let json = serde_json::to_string(&cfg).unwrap();
            let _: hypspec_harness::ExperimentConfig = serde_json::from_str(&json).unwrap();
        }
    }
});
