#![no_main]

use libfuzzer_sys::fuzz_target;

// Accepted configurations survive serialize -> parse unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = spinbath::parse_config(text) else {
        return;
    };
    let again =
        spinbath::parse_config(&cfg.to_toml()).expect("serialized configuration must parse");
    assert_eq!(cfg, again);
});
