#![no_main]

use libfuzzer_sys::fuzz_target;
use softcell::scenario::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ScenarioConfig::from_toml_str(text) else { return };
    // Accepted configs must serialize and read back to the same value.
    let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(cfg, again);
});
