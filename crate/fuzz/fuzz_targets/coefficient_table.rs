#![no_main]

use ergofit::config::CoefficientTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for column in ["s0", "sigma"] {
        if let Ok(table) = CoefficientTable::parse(text, column) {
            for x in [-1e3, -1.0, 0.0, 0.5, 1e3] {
                let _ = table.eval(x);
            }
        }
    }
});
