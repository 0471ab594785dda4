#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(reports) = tecoord_cli::parse_reports(data) {
        assert!(reports.iter().all(|t| t.alpha.is_finite() && t.beta > 0.0));
    }
});
