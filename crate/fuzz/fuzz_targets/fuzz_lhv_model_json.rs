#![no_main]

use libfuzzer_sys::fuzz_target;

// LHV model files come from users; deserialization plus validation must
// never panic, and a model that validates must have |S| ≤ 2.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = serde_json::from_str::<hybrid_bell::lhv::LhvModel>(text) {
        if model.validate().is_ok() {
            let s = model.expectation_s();
            assert!(
                s.abs() <= 2.0 + 1e-6,
                "validated LHV model exceeded the classical bound: {s}"
            );
        }
    }
});
