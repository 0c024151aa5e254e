#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(parsed) = soft_torus::pairfile::parse_theta(text) {
            // anything accepted has a finite value and a displayable form
            // that parses back to the same angle
            let value = parsed.angle.value();
            assert!(value.is_finite());
            let shown = parsed.angle.to_string();
            let again = soft_torus::pairfile::parse_theta(&shown).expect("display form parses");
            assert!((again.angle.value() - value).abs() <= 1e-12);
        }
    }
});
