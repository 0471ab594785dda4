#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(outcome) = tecoord_cli::parse_outcome(data) {
        assert_eq!(outcome.payments.len(), outcome.allocations.len());
    }
});
