#![no_main]

use libfuzzer_sys::fuzz_target;
use tecoord_core::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(scenario) = Scenario::from_json(text) else {
        return;
    };
    // Anything accepted must survive a round trip unchanged.
    let again = Scenario::from_json(&scenario.to_json()).expect("serialized scenario parses");
    assert_eq!(again, scenario);
});
