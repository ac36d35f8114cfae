#![no_main]

use libfuzzer_sys::fuzz_target;
use onebit_ae::ldpc::ParityCheckMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = ParityCheckMatrix::from_alist(text) {
        assert_eq!(ParityCheckMatrix::from_alist(&h.to_alist()).unwrap(), h);
    }
});
