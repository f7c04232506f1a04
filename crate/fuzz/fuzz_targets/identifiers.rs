#![no_main]

use ergofit::config::parse_theta;
use ergofit::limits::LawId;
use ergofit::statistics::StatisticKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(law) = text.parse::<LawId>() {
        assert_eq!(law.to_string().parse::<LawId>().unwrap(), law);
    }
    if let Ok(kind) = text.parse::<StatisticKind>() {
        assert_eq!(kind.to_string().parse::<StatisticKind>().unwrap(), kind);
    }
    let _ = parse_theta(text);
});
