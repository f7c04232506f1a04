#![no_main]

use ergofit::calibration::CalibrationTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = CalibrationTable::from_json(text) {
        let back = CalibrationTable::from_json(&table.to_json()).expect("written table parses");
        assert_eq!(back, table);
    }
});
