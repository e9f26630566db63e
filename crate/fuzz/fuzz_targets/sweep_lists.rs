#![no_main]

use libfuzzer_sys::fuzz_target;
use softcell::sim::{parse_algorithms, parse_values, Algorithm, Axis};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_values(text) {
        assert!(values.iter().all(|v| v.is_finite()));
    }
    if let Ok(algs) = parse_algorithms(text) {
        let joined: Vec<String> = algs.iter().map(Algorithm::to_string).collect();
        assert_eq!(parse_algorithms(&joined.join(",")).unwrap(), algs);
    }
    if let Ok(axis) = text.parse::<Axis>() {
        assert_eq!(axis.to_string().parse::<Axis>().unwrap(), axis);
    }
});
