#![no_main]
use gibbs_fisher::{parse_model, thermo_point};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = parse_model(text) {
        // Accepted models must evaluate without panicking; errors are fine.
        for beta in [1e-3, 1.0, 1e3] {
            let _ = thermo_point(&model, beta);
        }
    }
});
