#![no_main]

use brightcv_cli::config::parse_config;
use brightcv_cli::settings::{Command, Settings};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = parse_config(text) {
        // resolution must reject bad values with an error, never a panic
        let _ = Settings::resolve(Command::SweepKeyRate, &map);
    }
});
