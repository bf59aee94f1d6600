//! Rational streams, execution fragments, and the coinductive trace
//! logic evaluated along a path of a plasmodium.

use std::collections::BTreeMap;

use physarum::environment::Environment;
use physarum::semantics::{build_lts, Bounds};
use physarum::streams::{
    eval_formula, parse_formula, state_streams, stream_equal, RationalStream, Valuation,
};
use physarum::syntax::parse;

fn main() {
    // two presentations of the same lasso stream
    let s1 = RationalStream::lasso(vec![1], vec![2, 3]);
    let s2 = RationalStream::lasso(vec![1, 2, 3], vec![2, 3]);
    println!("{s1} == {s2}: {}", stream_equal(&s1, &s2).is_equal());

    // paths of X = a.X + b.0 from the root
    let env = Environment::new();
    let mut env = env;
    env.define_constant("X", parse("a.X + b.0").unwrap());
    let lts = build_lts(&parse("X").unwrap(), &env, Bounds::default(), false).unwrap();
    let (paths, _) = state_streams(&lts, 0, 16);
    for p in &paths {
        println!("path: {p}");
    }

    // evaluate `alive -> alive` along the looping path
    let formula = parse_formula("alive -> alive").unwrap();
    let mut valuation = Valuation::new();
    for state in 0..lts.states.len() {
        valuation.set("alive", state, state == 0);
    }
    let looping = paths.iter().find(|p| !p.is_finite()).unwrap();
    let bindings = BTreeMap::from([("alive".to_string(), looping.clone())]);
    let truth = eval_formula(&formula, &bindings, &valuation).unwrap();
    println!("{formula} along {looping}: {truth}");
}
