//! `--set` override strings come straight from the command line; applied
//! to a known-good config they must either take effect or error out.

#![no_main]

use libfuzzer_sys::fuzz_target;

const CANONICAL: &str = include_str!("../../configs/canonical.conf");

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let overrides: Vec<String> = text.lines().map(str::to_string).collect();
        let _ = emo_core::config::parse_config_with_overrides(CANONICAL, &overrides);
    }
});
