#![no_main]

use libfuzzer_sys::fuzz_target;
use weighted_radon::harness::ExperimentConfig;

fuzz_target!(|text: &str| {
    if let Ok(config) = serde_json::from_str::<ExperimentConfig>(text) {
        let _ = config.validate();
    }
});
