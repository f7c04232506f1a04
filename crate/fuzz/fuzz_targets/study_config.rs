#![no_main]

use ergofit::harness::StudyConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = StudyConfig::from_json(text) {
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(StudyConfig::from_json(&json).expect("written config parses"), cfg);
    }
});
