#![no_main]

use libfuzzer_sys::fuzz_target;

// Any input must either parse into a valid configuration or produce an
// error; it must never panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = spinbath::parse_config(text) {
            assert!(cfg.validate().is_ok());
        }
    }
});
