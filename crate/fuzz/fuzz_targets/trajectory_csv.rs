#![no_main]

use ergofit::simulate::Trajectory;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(traj) = Trajectory::read_csv(data) {
        assert!(traj.values().iter().all(|v| v.is_finite()));
        let mut out = Vec::new();
        traj.write_csv(&mut out).unwrap();
        let back = Trajectory::read_csv(&out[..]).expect("written trajectory parses");
        assert_eq!(back.values(), traj.values());
    }
});
