#![no_main]

use ergofit::commands::Command;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cmd) = Command::from_json(text) {
        assert_eq!(Command::from_json(&cmd.to_json()).expect("written command parses"), cmd);
    }
});
