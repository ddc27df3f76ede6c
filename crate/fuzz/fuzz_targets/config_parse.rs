//! The config parser must reject arbitrary bytes with an error, never a
//! panic.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = emo_core::config::parse_config_str(text);
    }
});
