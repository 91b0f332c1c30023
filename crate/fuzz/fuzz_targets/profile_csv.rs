#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(p) = hypspec::transform::RadialProfile::from_csv(&text, 0.5) {
        let _ = p.interpolate(p.r_max() * 0.5);
        let _ = p.edge_amplitude();
    }
});
