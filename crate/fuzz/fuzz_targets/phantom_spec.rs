#![no_main]

use libfuzzer_sys::fuzz_target;
use weighted_radon::harness::phantom::make_phantom;
use weighted_radon::harness::PhantomSpec;
use weighted_radon::{Grid2D, Mask};

fuzz_target!(|text: &str| {
    if let Ok(spec) = PhantomSpec::parse(text) {
        let grid = Grid2D::square(9, 1.2).unwrap();
        if let Ok(f) = make_phantom(&spec, &grid, &Mask::disk(1.02)) {
            assert!(f.values().iter().all(|v| v.re.is_finite() && v.im == 0.0));
        }
    }
});
