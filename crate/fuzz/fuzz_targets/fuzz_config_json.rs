#![no_main]

use libfuzzer_sys::fuzz_target;

// The run-config parser must never panic, and any accepted config must
// validate cleanly and round-trip through JSON.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = hybrid_bell::config::RunConfig::from_json(text) {
        cfg.validate().expect("accepted config must validate");
        let json = serde_json::to_string(&cfg).expect("config serializes");
        let back = hybrid_bell::config::RunConfig::from_json(&json)
            .expect("re-serialized config must parse");
        assert_eq!(cfg, back, "config round trip must be lossless");
    }
});
