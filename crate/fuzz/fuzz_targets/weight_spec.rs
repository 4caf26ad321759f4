#![no_main]

use libfuzzer_sys::fuzz_target;
use weighted_radon::harness::WeightSpec;

fuzz_target!(|text: &str| {
    if let Ok(spec) = text.parse::<WeightSpec>() {
        let canonical = spec.to_string();
        assert_eq!(canonical.parse::<WeightSpec>().unwrap(), spec);
    }
});
