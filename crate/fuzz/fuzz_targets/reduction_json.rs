#![no_main]
use libfuzzer_sys::fuzz_target;

use covmin::reduction::ReductionResult;
use covmin::CoverageMap;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let cm = CoverageMap::from_pairs([(1, &[0, 1][..]), (2, &[0, 2][..]), (3, &[1, 3][..])]).unwrap();
    if let Ok(r) = ReductionResult::from_json(text, &cm) {
        let again = ReductionResult::from_json(&r.to_json(&cm), &cm).expect("round trip");
        assert_eq!(again.necessary, r.necessary);
        assert_eq!(again.components, r.components);
    }
});
