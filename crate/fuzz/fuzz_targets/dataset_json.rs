#![no_main]
use libfuzzer_sys::fuzz_target;

use covmin::dataset::parse_dataset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_dataset(text) {
        // what we write back must load to the same inputs
        let again = parse_dataset(&d.to_json()).expect("round trip");
        assert_eq!(again.inputs, d.inputs);
        assert!(d.inputs.iter().all(|i| i.cost() > 0));
    }
});
