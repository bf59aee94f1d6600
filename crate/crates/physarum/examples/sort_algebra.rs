//! The Boolean algebra of sorts derived from hiding: negation is
//! difference from the universe, the other connectives follow.

use physarum::environment::Environment;
use physarum::equivalence::SortConnectives;
use physarum::syntax::{parse, sort, Label, LabelSet};

fn main() {
    let universe = LabelSet::from_labels(
        ["a", "b", "c", "d"].map(|n| Label::activator(n)),
    )
    .unwrap();
    let alg = SortConnectives::new(universe);

    let env = Environment::new();
    let p = sort(&parse("a.b.0").unwrap(), &env).unwrap();
    let q = sort(&parse("b.0 + c.0").unwrap(), &env).unwrap();
    println!("P = {p}, Q = {q}");
    println!("not P   = {}", alg.neg(&p).unwrap());
    println!("P and Q = {}", alg.conj(&p, &q).unwrap());
    println!("P or Q  = {}", alg.disj(&p, &q).unwrap());
    println!("P -> Q  = {}", alg.impl_(&p, &q).unwrap());

    // De Morgan
    let lhs = alg.neg(&alg.conj(&p, &q).unwrap()).unwrap();
    let rhs = alg.disj(&alg.neg(&p).unwrap(), &alg.neg(&q).unwrap()).unwrap();
    println!("de morgan: {lhs} == {rhs}");
}
