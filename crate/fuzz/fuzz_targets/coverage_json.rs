#![no_main]
use libfuzzer_sys::fuzz_target;

use covmin::CoverageMap;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cm) = CoverageMap::from_json(text) {
        let again = CoverageMap::from_json(&cm.to_json()).expect("round trip");
        assert_eq!(again, cm);
    }
});
