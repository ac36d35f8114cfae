#![no_main]

use libfuzzer_sys::fuzz_target;
use onebit_ae::autoencoder::checkpoint;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = checkpoint::load(text) {
        let _ = checkpoint::load(&checkpoint::save(&p)).unwrap();
    }
});
