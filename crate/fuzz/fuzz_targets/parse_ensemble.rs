#![no_main]
use gibbs_fisher::ensembles::{conjugate_pair_report, gce_report, gge_report, EnsembleInput};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match EnsembleInput::from_json(text) {
        Ok(EnsembleInput::Gge(e)) => {
            let _ = gge_report(&e);
        }
        Ok(EnsembleInput::Gce(g)) => {
            let _ = gce_report(&g.states, g.beta, g.mu);
        }
        Ok(EnsembleInput::Conjugate(c)) => {
            let _ = conjugate_pair_report(&c.states, c.beta, c.lambda);
        }
        Err(_) => {}
    }
});
