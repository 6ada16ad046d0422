//! Anything the parser accepts must print back to a byte-identical
//! canonical form that parses to the same node.

#![no_main]

use libfuzzer_sys::fuzz_target;

use clonekit::term::{parse_term, print_term};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(term) = parse_term(text) else { return };
    let printed = print_term(&term);
    let back = parse_term(&printed).expect("canonical form parses");
    assert_eq!(back, term, "round trip changed the term");
    assert_eq!(print_term(&back), printed, "printing is not canonical");
});
