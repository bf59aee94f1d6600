//! Parsing and canonical printing: precedence, complements, term files.

use physarum::syntax::{complement_term, parse, parse_term_file};

fn main() {
    // tightest first: prefix, hiding, |, &, +
    for text in [
        "a.b.0 + c.0",
        "(a.0 + b.0) & c.0",
        "a.0 | ~a.0 \\ {b}",
        "A(a).R(b).C(c)",
    ] {
        let term = parse(text).unwrap();
        println!("{text:28} parses to {term}");
    }

    let term = parse("a.~b.0 & ~a.b.0").unwrap();
    println!("complement of {} is {}", term, complement_term(&term).unwrap());

    let file = parse_term_file("Walker := a.Walker\nWalker | b.0\n").unwrap();
    for (name, body) in &file.definitions {
        println!("{name} := {body}");
    }
    println!("root: {}", file.root);
}
