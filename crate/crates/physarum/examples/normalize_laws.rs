//! The congruence laws as a rewrite system: canonical forms and the
//! `axiom_equal` decision procedure.

use physarum::equivalence::{axiom_equal, normalize};
use physarum::syntax::parse;

fn main() {
    for text in [
        "b.0 + a.0 + 0 + b.0",       // commutativity, unit, idempotence
        "(a.0 + b.0) & c.0",         // fusion distributes over choice
        "a.b.0 & ~a.~b.0",           // complementary plasmodia annihilate
        "(a.0 + b.0 & c.0) \\ {d}",  // hiding pushes inward
        "a.0 & 0",                   // Nil absorbs fusion
    ] {
        println!("{text:28} normalizes to {}", normalize(&parse(text).unwrap()));
    }

    let lhs = parse("a.0 + b.0 & c.0").unwrap();
    let rhs = parse("(a.0 + b.0) & (a.0 + c.0)").unwrap();
    println!(
        "choice distributes over fusion: {}",
        axiom_equal(&lhs, &rhs)
    );
}
