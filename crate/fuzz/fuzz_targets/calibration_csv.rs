//! Calibration CSV reader: no panic on garbage, and anything it does
//! accept must survive a write/read cycle.

#![no_main]

use libfuzzer_sys::fuzz_target;

use emo_core::report::{calibration_csv, read_calibration_csv, RunManifest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(rows) = read_calibration_csv(text) else { return };
    if rows.iter().all(|(p, v, s)| p.is_finite() && v.is_finite() && s.is_finite()) {
        let manifest = RunManifest {
            command: "fuzz".into(),
            config_path: "-".into(),
            overrides: vec![],
            output_dir: "-".into(),
            seed: 0,
        };
        let back = read_calibration_csv(&calibration_csv(&manifest, &rows)).unwrap();
        assert_eq!(back, rows);
    }
});
