//! Bounded LTS exploration: the transition system of a plasmodium term,
//! its text and DOT exports, and the diffusion pass.

use physarum::environment::Environment;
use physarum::semantics::{build_lts, Bounds};
use physarum::syntax::parse;

fn main() {
    let env = Environment::load_scene("universe a b\nA: a -> b\n").unwrap();
    let term = parse("A(a).0 | (a.b.0 + b.0)").unwrap();
    let lts = build_lts(&term, &env, Bounds::default(), false).unwrap();
    print!("{}", lts.to_text());

    println!();
    print!("{}", lts.to_dot());

    // the diffusion pass learns C(a) bindings from derived transitions
    let term = parse("a.b.0 & c.b.0").unwrap();
    let lts = build_lts(&term, &env, Bounds::default(), true).unwrap();
    for event in &lts.diffusion_report {
        println!("{event}");
    }
}
