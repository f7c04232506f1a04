//! Replays the checked-in fuzz corpus through the parsers the fuzz targets
//! exercise, with the same round-trip assertions.

use std::path::PathBuf;

use ergofit::calibration::CalibrationTable;
use ergofit::commands::Command;
use ergofit::config::{parse_theta, CoefficientTable, ModelSpec};
use ergofit::harness::StudyConfig;
use ergofit::limits::LawId;
use ergofit::simulate::Trajectory;
use ergofit::statistics::StatisticKind;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

fn texts(target: &str) -> Vec<(String, String)> {
    seeds(target)
        .into_iter()
        .map(|(name, bytes)| (name, String::from_utf8(bytes).unwrap()))
        .collect()
}

#[test]
fn model_spec_seeds() {
    let mut parsed = 0;
    for (name, text) in texts("model_spec") {
        if let Ok(spec) = text.parse::<ModelSpec>() {
            assert_eq!(spec.to_string().parse::<ModelSpec>().unwrap(), spec, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}

#[test]
fn trajectory_csv_seeds() {
    let mut outcomes = Vec::new();
    for (_, bytes) in seeds("trajectory_csv") {
        if let Ok(traj) = Trajectory::read_csv(&bytes[..]) {
            let mut out = Vec::new();
            traj.write_csv(&mut out).unwrap();
            assert_eq!(Trajectory::read_csv(&out[..]).unwrap().values(), traj.values());
            outcomes.push(true);
        } else {
            outcomes.push(false);
        }
    }
    assert!(outcomes.contains(&true) && outcomes.contains(&false));
}

#[test]
fn calibration_table_seeds() {
    for (name, text) in texts("calibration_table") {
        match CalibrationTable::from_json(&text) {
            Ok(table) => assert_eq!(CalibrationTable::from_json(&table.to_json()).unwrap(), table, "{name}"),
            Err(e) => assert!(name.ends_with("future_version"), "{name}: {e}"),
        }
    }
}

#[test]
fn study_config_seeds() {
    for (name, text) in texts("study_config") {
        let cfg = StudyConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(StudyConfig::from_json(&json).unwrap(), cfg);
        cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn coefficient_table_seeds() {
    for (name, text) in texts("coefficient_table") {
        for column in ["s0", "sigma"] {
            if let Ok(table) = CoefficientTable::parse(&text, column) {
                assert!(table.eval(0.25).is_finite(), "{name}");
            }
        }
    }
}

#[test]
fn identifier_seeds() {
    for (name, text) in texts("identifiers") {
        let law = text.parse::<LawId>();
        let kind = text.parse::<StatisticKind>();
        let theta = parse_theta(&text);
        assert!(law.is_ok() || kind.is_ok() || theta.is_ok(), "{name}");
        if let Ok(law) = law {
            assert_eq!(law.to_string().parse::<LawId>().unwrap(), law);
        }
        if let Ok(kind) = kind {
            assert_eq!(kind.to_string().parse::<StatisticKind>().unwrap(), kind);
        }
    }
}

#[test]
fn command_json_seeds() {
    for (name, text) in texts("command_json") {
        let cmd = Command::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(Command::from_json(&cmd.to_json()).unwrap(), cmd);
    }
}
