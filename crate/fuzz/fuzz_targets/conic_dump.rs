#![no_main]

use libfuzzer_sys::fuzz_target;
use softcell::conic::dump;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(problem) = dump::parse(text) else { return };
    let written = dump::write(&problem);
    let reparsed = dump::parse(&written).expect("written dumps parse");
    assert_eq!(dump::write(&reparsed), written);
});
