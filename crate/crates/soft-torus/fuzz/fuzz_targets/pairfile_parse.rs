#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // pair documents are UTF-8 JSON; parsing must never panic and a
    // successful parse must satisfy the pair invariants
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pair) = soft_torus::pairfile::from_json(text) {
            assert!(pair.u().unitary_defect() <= 1e-8);
            assert!(pair.v().unitary_defect() <= 1e-8);
            // serialization of anything we accepted must round-trip
            let again = soft_torus::pairfile::to_json(&pair);
            let back = soft_torus::pairfile::from_json(&again).expect("reserialized pair parses");
            assert_eq!(pair.u().entries(), back.u().entries());
        }
    }
});
