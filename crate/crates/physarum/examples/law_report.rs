//! The conformance report: which congruence laws also hold under strong
//! bisimilarity on seeded random terms. The fusion axioms fail
//! behaviourally because the spread rule gives `P & 0` transitions.

use physarum::environment::Environment;
use physarum::equivalence::{law_conformance, LawSampleParams};

fn main() {
    let env = Environment::new();
    let params = LawSampleParams {
        seed: 0,
        samples: 20,
        ..LawSampleParams::default()
    };
    let report = law_conformance(&params, &env).unwrap();
    print!("{report}");
}
