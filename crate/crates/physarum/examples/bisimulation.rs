//! Strong bisimilarity: partition refinement, the naive oracle, and
//! distinguishing action sequences for non-bisimilar terms.

use physarum::environment::Environment;
use physarum::equivalence::{bisimilarity, distinguishing_sequence, naive_bisim};
use physarum::semantics::{build_joint_lts, Bounds};
use physarum::syntax::parse;

fn main() {
    let env = Environment::new();
    let pairs = [
        ("a.0 + a.0", "a.0"),
        ("a.(b.0 + c.0)", "a.b.0 + a.c.0"),
        ("a.b.0 & ~b.0", "a.b.0 & ~b.0 + 0"),
    ];
    for (left, right) in pairs {
        let (lts, p, q) = build_joint_lts(
            &parse(left).unwrap(),
            &parse(right).unwrap(),
            &env,
            Bounds::default(),
        )
        .unwrap();
        let partition = bisimilarity(&lts);
        assert_eq!(partition, naive_bisim(&lts).unwrap());
        if partition.same_block(p, q) {
            println!("{left}  ~  {right}");
        } else {
            let seq = distinguishing_sequence(lts.states.len(), &lts.transitions, p, q)
                .expect("non-bisimilar states have a distinguishing play");
            let words: Vec<String> = seq.iter().map(|l| l.to_string()).collect();
            println!("{left}  !~  {right}   (attacker plays: {})", words.join(" "));
        }
    }
}
