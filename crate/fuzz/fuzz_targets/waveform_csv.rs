//! Waveform CSV reader: no panic on garbage, and accepted records keep
//! their samples bitwise through a write/read cycle.

#![no_main]

use libfuzzer_sys::fuzz_target;

use emo_core::report::{read_waveform_csv, waveform_csv, RunManifest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(wf) = read_waveform_csv(text) else { return };
    let finite = wf.t0.is_finite()
        && wf.dt.is_finite()
        && wf.samples.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    if finite {
        let manifest = RunManifest {
            command: "fuzz".into(),
            config_path: "-".into(),
            overrides: vec![],
            output_dir: "-".into(),
            seed: 0,
        };
        let back = read_waveform_csv(&waveform_csv(&manifest, &wf)).unwrap();
        assert_eq!(back.samples, wf.samples);
    }
});
