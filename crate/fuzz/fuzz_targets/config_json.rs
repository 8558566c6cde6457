#![no_main]
use libfuzzer_sys::fuzz_target;

use covmin::harness::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        assert_eq!(cfg.label().len(), 3);
        let _ = cfg.blocks_config();
    }
});
