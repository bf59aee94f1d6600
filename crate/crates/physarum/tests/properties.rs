//! Property tests for the structural invariants: printer/parser round
//! trips, complement involution, normalizer idempotence and congruence,
//! and the rational-stream equations.

use proptest::prelude::*;

use physarum::environment::Environment;
use physarum::equivalence::{axiom_equal, bisimilarity, normalize};
use physarum::semantics::{build_joint_lts, build_lts, Bounds};
use physarum::streams::{stream_equal, RationalStream};
use physarum::syntax::{complement_term, parse, sort, Label, LabelSet, ProcessTerm};

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![
        2 => "[a-d]".prop_map(|n| Label::activator(&n)),
        1 => "[a-d]".prop_map(|n| Label::inhibitor(&n)),
    ]
}

fn label_set() -> impl Strategy<Value = LabelSet> {
    proptest::collection::vec(label(), 0..3)
        .prop_map(|ls| LabelSet::from_labels(ls).expect("named labels"))
}

/// Constant-free terms, so `complement_term` always succeeds.
fn term() -> impl Strategy<Value = ProcessTerm> {
    let leaf = prop_oneof![
        Just(ProcessTerm::Nil),
        label().prop_map(ProcessTerm::Diffuse),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (label(), inner.clone()).prop_map(|(l, p)| ProcessTerm::prefix(l, p)),
            (label(), inner.clone()).prop_map(|(l, p)| ProcessTerm::attract(l, p)),
            (label(), inner.clone()).prop_map(|(l, p)| ProcessTerm::repel(l, p)),
            (inner.clone(), label_set()).prop_map(|(p, h)| ProcessTerm::hide(p, h)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ProcessTerm::choice(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ProcessTerm::fuse(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ProcessTerm::coop(l, r)),
        ]
    })
}

proptest! {
    #[test]
    fn parse_format_roundtrip(t in term()) {
        let text = t.to_string();
        let back = parse(&text).expect("canonical text parses");
        prop_assert_eq!(back, t);
    }

    #[test]
    fn complement_is_an_involution(t in term()) {
        let once = complement_term(&t).expect("constant-free");
        let twice = complement_term(&once).expect("constant-free");
        prop_assert_eq!(twice, t);
    }

    #[test]
    fn complement_preserves_sort_names(t in term()) {
        let env = Environment::new();
        let s1 = sort(&t, &env).unwrap();
        let s2 = sort(&complement_term(&t).unwrap(), &env).unwrap();
        let names = |s: &LabelSet| -> std::collections::BTreeSet<String> {
            s.iter().filter_map(|l| l.name().map(str::to_string)).collect()
        };
        prop_assert_eq!(names(&s1), names(&s2));
    }

    #[test]
    fn normalize_is_idempotent(t in term()) {
        let n = normalize(&t);
        prop_assert_eq!(normalize(&n), n);
    }

    #[test]
    fn axiom_equal_respects_choice_context(t in term(), u in term()) {
        // t + u and u + t are law-11 instances under any shared context
        let l = ProcessTerm::choice(t.clone(), u.clone());
        let r = ProcessTerm::choice(u, t);
        prop_assert!(axiom_equal(&l, &r));
        prop_assert!(axiom_equal(
            &ProcessTerm::prefix(Label::activator("z"), l.clone()),
            &ProcessTerm::prefix(Label::activator("z"), r.clone()),
        ));
        prop_assert!(axiom_equal(
            &ProcessTerm::fuse(l.clone(), ProcessTerm::Nil),
            &ProcessTerm::fuse(ProcessTerm::Nil, r.clone()),
        ));
    }

    #[test]
    fn choice_idempotence_is_bisimilar(t in term()) {
        let env = Environment::new();
        let double = ProcessTerm::choice(t.clone(), t.clone());
        let bounds = Bounds { max_states: 300, ..Bounds::default() };
        let (lts, a, b) = build_joint_lts(&t, &double, &env, bounds).unwrap();
        prop_assume!(!lts.truncated);
        prop_assert!(bisimilarity(&lts).same_block(a, b));
    }

    #[test]
    fn lts_states_are_reachable_and_root_is_zero(t in term()) {
        let env = Environment::new();
        let bounds = Bounds { max_states: 200, ..Bounds::default() };
        let lts = build_lts(&t, &env, bounds, false).unwrap();
        prop_assert_eq!(&lts.states[0], &t);
        let mut reached = vec![false; lts.states.len()];
        reached[0] = true;
        let mut frontier = vec![0usize];
        while let Some(s) = frontier.pop() {
            for e in lts.successors(s) {
                if !reached[e.dst] {
                    reached[e.dst] = true;
                    frontier.push(e.dst);
                }
            }
        }
        prop_assert!(reached.into_iter().all(|r| r));
    }

    #[test]
    fn lasso_presentations_are_equal(
        prefix in proptest::collection::vec(0u8..4, 0..4),
        cycle in proptest::collection::vec(0u8..4, 1..4),
        unroll in 0usize..5,
    ) {
        let s1 = RationalStream::lasso(prefix.clone(), cycle.clone());
        // unroll the cycle into the prefix and rotate: the same stream
        let mut p2 = prefix;
        let mut c2 = cycle;
        for _ in 0..unroll {
            let head = c2.remove(0);
            p2.push(head);
            c2.push(head);
        }
        let s2 = RationalStream::lasso(p2, c2);
        prop_assert_eq!(&s1, &s2);
        prop_assert!(stream_equal(&s1, &s2).is_equal());
    }

    #[test]
    fn nth_matches_naive_unrolling(
        prefix in proptest::collection::vec(0u8..4, 0..4),
        cycle in proptest::collection::vec(0u8..4, 1..4),
        n in 0usize..30,
    ) {
        let s = RationalStream::lasso(prefix.clone(), cycle.clone());
        let expected = if n < prefix.len() {
            prefix[n]
        } else {
            cycle[(n - prefix.len()) % cycle.len()]
        };
        prop_assert_eq!(*s.nth(n).unwrap(), expected);
    }

    #[test]
    fn derivative_shifts_by_one(
        prefix in proptest::collection::vec(0u8..4, 0..4),
        cycle in proptest::collection::vec(0u8..4, 1..4),
        n in 0usize..20,
    ) {
        let s = RationalStream::lasso(prefix, cycle);
        let d = s.derivative().unwrap();
        prop_assert_eq!(d.nth(n).unwrap(), s.nth(n + 1).unwrap());
    }

    #[test]
    fn zip_with_is_pointwise(
        p1 in proptest::collection::vec(0u8..4, 0..3),
        c1 in proptest::collection::vec(0u8..4, 1..4),
        p2 in proptest::collection::vec(0u8..4, 0..3),
        c2 in proptest::collection::vec(0u8..4, 1..4),
    ) {
        let s1 = RationalStream::lasso(p1, c1);
        let s2 = RationalStream::lasso(p2, c2);
        let z = s1.zip_with(&s2, |a, b| a + b);
        for n in 0..24 {
            prop_assert_eq!(
                *z.nth(n).unwrap(),
                s1.nth(n).unwrap() + s2.nth(n).unwrap()
            );
        }
    }
}
