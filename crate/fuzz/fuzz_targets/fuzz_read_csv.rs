#![no_main]

use libfuzzer_sys::fuzz_target;

// The counts CSV parser must never panic, and anything it accepts must
// survive a lossless write/read round trip.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = hybrid_bell::trials::read_csv(text) {
        let rewritten = hybrid_bell::trials::write_csv(&records);
        let back = hybrid_bell::trials::read_csv(&rewritten)
            .expect("re-serialized CSV must parse");
        assert_eq!(records, back, "CSV round trip must be lossless");
    }
});
