#![no_main]

use libfuzzer_sys::fuzz_target;
use onebit_ae::harness::csv::{parse_csv, summarize, to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_csv(text) {
        let _ = parse_csv(&to_csv(&points)).unwrap();
        let _ = summarize(&[("a".to_string(), points)]);
    }
});
