//! The acceptance gate: one test per criterion, each printing a single
//! pass line (visible with `--nocapture`) and asserting its runtime budget.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use physarum::environment::Environment;
use physarum::equivalence::{
    axiom_equal, bisimilarity, bisimilarity_raw, instantiate_law, naive_bisim_raw, SortConnectives,
};
use physarum::gen::TermGen;
use physarum::semantics::{
    build_joint_lts, derive_transitions, Bounds, LtsEdge, RuleTag,
};
use physarum::streams::{eval_formula, stream_equal, Formula, RationalStream, Valuation};
use physarum::syntax::{parse, Label, LabelSet};

fn finish(criterion: usize, name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("acceptance {criterion} {name}: pass ({elapsed:.2?})");
    assert!(
        elapsed < budget,
        "criterion {criterion} took {elapsed:?}, budget {budget:?}"
    );
}

// -- 1: SOS rule battery ----------------------------------------------------

#[test]
fn criterion_1_sos_rule_battery() {
    let started = Instant::now();
    // (scene, term, expected transitions as (action, target, rule))
    let cases: Vec<(&str, &str, Vec<(&str, &str, &str)>)> = vec![
        ("", "a.0", vec![("a", "0", "Prefix")]),
        (
            "universe a b\nA: a -> b\n",
            "A(a).0",
            vec![("b", "0", "PrefixA")],
        ),
        (
            "universe a b\nR: a -> ~b\n",
            "R(a).0",
            vec![("~b", "0", "PrefixR")],
        ),
        (
            "universe a b\nC: a := b.0\n",
            "C(a)",
            vec![("b", "0", "Diffusion")],
        ),
        ("universe a\nX := a.X\n", "X", vec![("a", "X", "Constant")]),
        (
            "",
            "a.0 + b.0",
            vec![("a", "0", "ChoiceL"), ("b", "0", "ChoiceR")],
        ),
        (
            "",
            "a.0 + a.0",
            vec![("a", "0", "ChoiceL"), ("a", "0", "ChoiceR")],
        ),
        (
            "",
            "a.0 | ~a.0",
            vec![
                ("a", "0 | ~a.0", "CoopL"),
                ("~a", "a.0 | 0", "CoopR"),
                ("tau", "0 | 0", "CoopSync"),
            ],
        ),
        (
            "",
            "(a.0 + b.0) \\ {b}",
            vec![("a", "0 \\ {b}", "Hiding")],
        ),
        // fusion of complementary processes: a.(b.0) & ~b.0 fires a into 0
        (
            "",
            "a.b.0 & ~b.0",
            vec![
                ("a", "0", "FuseAnnihilate"),
                ("a", "0 + C(a) + b.0", "FuseSpreadL"),
                ("~b", "0 + C(~b) + 0", "FuseSpreadR"),
            ],
        ),
        (
            "",
            "~b.0 & a.b.0",
            vec![
                ("a", "0", "FuseAnnihilate"),
                ("~b", "0 + C(~b) + 0", "FuseSpreadL"),
                ("a", "0 + C(a) + b.0", "FuseSpreadR"),
            ],
        ),
        (
            "",
            "a.c.0 & a.c.0",
            vec![
                ("a", "c.0", "FuseJoinL"),
                ("a", "c.0", "FuseJoinR"),
                ("a", "0 + C(a) + c.0", "FuseSpreadL"),
                ("a", "0 + C(a) + c.0", "FuseSpreadR"),
            ],
        ),
        (
            "",
            "a.c.0 & b.d.0",
            vec![
                ("a", "0 + C(a) + c.0", "FuseSpreadL"),
                ("b", "0 + C(b) + d.0", "FuseSpreadR"),
            ],
        ),
        ("", "0", vec![]),
        ("", "A(a).0", vec![]), // no attractant mapping: stuck
        ("", "a.0 \\ {a}", vec![]),
        ("", "C(a)", vec![]), // unbound diffusion: stuck
        (
            "",
            "a.0 | b.0",
            vec![
                ("a", "0 | b.0", "CoopL"),
                ("b", "a.0 | 0", "CoopR"),
            ],
        ),
    ];
    assert!(cases.len() >= 16);
    let mut seen_rules = BTreeSet::new();
    for (scene, term, expected) in cases {
        let env = Environment::load_scene(scene).unwrap();
        let derived: BTreeSet<(String, String, String)> =
            derive_transitions(&parse(term).unwrap(), &env)
                .unwrap()
                .into_iter()
                .map(|t| {
                    (
                        t.action.to_string(),
                        t.target.to_string(),
                        t.rule.to_string(),
                    )
                })
                .collect();
        let expected: BTreeSet<(String, String, String)> = expected
            .into_iter()
            .map(|(a, t, r)| (a.to_string(), t.to_string(), r.to_string()))
            .collect();
        assert_eq!(derived, expected, "transition set mismatch for `{term}`");
        for (_, _, rule) in &derived {
            seen_rules.insert(rule.clone());
        }
    }
    let all: BTreeSet<String> = RuleTag::ALL.iter().map(|r| r.to_string()).collect();
    assert_eq!(seen_rules, all, "battery must exercise every rule schema");
    finish(1, "sos rule battery", started, Duration::from_secs(1));
}

// -- 2: axiomatic congruence ------------------------------------------------

#[test]
fn criterion_2_axiomatic_congruence() {
    let started = Instant::now();
    let gen = TermGen::default(); // depth <= 5, 4-letter alphabet
    let mut checked = 0;
    for law in 1..=14 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + law as u64);
        for _ in 0..72 {
            let (lhs, rhs) = instantiate_law(law, &gen, &mut rng);
            assert!(
                axiom_equal(&lhs, &rhs),
                "law {law} not equated: {lhs}  vs  {rhs}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 1000);
    finish(2, "axiomatic congruence", started, Duration::from_secs(60));
}

// -- 3: bisimulation oracle equivalence -------------------------------------

fn random_lts(rng: &mut ChaCha8Rng) -> (usize, Vec<LtsEdge>) {
    let n = rng.gen_range(1..=50);
    let labels = [
        Label::activator("a"),
        Label::activator("b"),
        Label::inhibitor("a"),
        Label::Tau,
    ];
    let m = rng.gen_range(0..=n * 3);
    let edges = (0..m)
        .map(|_| LtsEdge {
            src: rng.gen_range(0..n),
            action: labels[rng.gen_range(0..labels.len())].clone(),
            dst: rng.gen_range(0..n),
            rule: RuleTag::Prefix,
        })
        .collect();
    (n, edges)
}

#[test]
fn criterion_3_bisimulation_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..500 {
        let (n, edges) = random_lts(&mut rng);
        let fast = bisimilarity_raw(n, &edges);
        let slow = naive_bisim_raw(n, &edges).unwrap();
        assert_eq!(fast, slow, "disagreement on random LTS {i} ({n} states)");
    }
    finish(3, "bisimulation oracles", started, Duration::from_secs(60));
}

// -- 4: coinduction / stream suite ------------------------------------------

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn random_stream(rng: &mut ChaCha8Rng, force_infinite: bool) -> RationalStream<u8> {
    let plen = rng.gen_range(0..=3);
    let clen = if force_infinite {
        rng.gen_range(1..=3)
    } else {
        rng.gen_range(0..=3)
    };
    let prefix = (0..plen).map(|_| rng.gen_range(0..3u8)).collect();
    let cycle: Vec<u8> = (0..clen).map(|_| rng.gen_range(0..3u8)).collect();
    if cycle.is_empty() {
        RationalStream::finite(prefix)
    } else {
        RationalStream::lasso(prefix, cycle)
    }
}

/// Bounded-prefix equality oracle: finite streams compare as sequences,
/// infinite ones on the first |p1| + |p2| + lcm(|c1|, |c2|) elements.
fn oracle_equal(s1: &RationalStream<u8>, s2: &RationalStream<u8>) -> bool {
    match (s1.len(), s2.len()) {
        (Some(a), Some(b)) => a == b && (0..a).all(|i| s1.nth(i).unwrap() == s2.nth(i).unwrap()),
        (None, None) => {
            let (c1, c2) = (s1.cycle().len(), s2.cycle().len());
            let bound = s1.prefix().len() + s2.prefix().len() + c1 / gcd(c1, c2) * c2;
            (0..bound).all(|i| s1.nth(i).unwrap() == s2.nth(i).unwrap())
        }
        _ => false,
    }
}

fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    let vars = ["x", "y", "z"];
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            _ => Formula::var(vars[rng.gen_range(0..vars.len())]),
        };
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_formula(rng, depth - 1)),
        1 => Formula::and(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        2 => Formula::or(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        _ => Formula::implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
    }
}

/// The initial value of a formula computed through the head equations,
/// independently of `eval_formula`.
fn head_value(
    f: &Formula,
    env: &BTreeMap<String, RationalStream<usize>>,
    val: &Valuation,
) -> bool {
    match f {
        Formula::Var(name) => val.get(name, *env[name].head().unwrap()).unwrap(),
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Not(p) => !head_value(p, env, val),
        Formula::And(l, r) => head_value(l, env, val) && head_value(r, env, val),
        Formula::Or(l, r) => head_value(l, env, val) || head_value(r, env, val),
        Formula::Implies(l, r) => !head_value(l, env, val) || head_value(r, env, val),
    }
}

#[test]
fn criterion_4_coinduction_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        // bias towards equal pairs so both verdicts are exercised
        let s1 = random_stream(&mut rng, false);
        let s2 = if rng.gen_bool(0.4) {
            s1.clone()
        } else {
            random_stream(&mut rng, false)
        };
        let fast = stream_equal(&s1, &s2).is_equal();
        assert_eq!(fast, oracle_equal(&s1, &s2), "disagreement on {s1} vs {s2}");
    }
    // head / derivative commutation on random formulas over random
    // infinite state streams and a total valuation
    for _ in 0..1000 {
        let formula = random_formula(&mut rng, 6);
        let mut env = BTreeMap::new();
        let mut val = Valuation::new();
        for var in ["x", "y", "z"] {
            let states = random_stream(&mut rng, true).map(|&v| v as usize);
            env.insert(var.to_string(), states);
            for state in 0..3 {
                val.set(var, state, rng.gen_bool(0.5));
            }
        }
        let truth = eval_formula(&formula, &env, &val).unwrap();
        assert_eq!(*truth.head().unwrap(), head_value(&formula, &env, &val));
        let derived_env: BTreeMap<String, RationalStream<usize>> = env
            .iter()
            .map(|(k, s)| (k.clone(), s.derivative().unwrap()))
            .collect();
        let derived = eval_formula(&formula, &derived_env, &val).unwrap();
        assert!(
            stream_equal(&truth.derivative().unwrap(), &derived).is_equal(),
            "derivative does not commute on {formula}"
        );
    }
    finish(4, "coinduction suite", started, Duration::from_secs(30));
}

// -- 5: Boolean algebra of derived connectives -------------------------------

#[test]
fn criterion_5_boolean_algebra() {
    let started = Instant::now();
    let names = ["a", "b", "c", "d"];
    let universe = LabelSet::from_labels(names.iter().map(|n| Label::activator(n))).unwrap();
    let alg = SortConnectives::new(universe.clone());
    let subsets: Vec<LabelSet> = (0u32..16)
        .map(|mask| {
            LabelSet::from_labels(
                names
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, n)| Label::activator(n)),
            )
            .unwrap()
        })
        .collect();
    let empty = LabelSet::new();
    for p in &subsets {
        // complement and identity
        assert_eq!(alg.conj(p, &alg.neg(p).unwrap()).unwrap(), empty);
        assert_eq!(alg.disj(p, &alg.neg(p).unwrap()).unwrap(), universe);
        assert_eq!(alg.conj(p, &universe).unwrap(), *p);
        assert_eq!(alg.disj(p, &empty).unwrap(), *p);
        assert_eq!(alg.neg(&alg.neg(p).unwrap()).unwrap(), *p);
        for q in &subsets {
            // commutativity
            assert_eq!(alg.conj(p, q).unwrap(), alg.conj(q, p).unwrap());
            assert_eq!(alg.disj(p, q).unwrap(), alg.disj(q, p).unwrap());
            // De Morgan
            assert_eq!(
                alg.neg(&alg.conj(p, q).unwrap()).unwrap(),
                alg.disj(&alg.neg(p).unwrap(), &alg.neg(q).unwrap()).unwrap()
            );
            assert_eq!(
                alg.neg(&alg.disj(p, q).unwrap()).unwrap(),
                alg.conj(&alg.neg(p).unwrap(), &alg.neg(q).unwrap()).unwrap()
            );
            // implication as material conditional
            assert_eq!(
                alg.impl_(p, q).unwrap(),
                alg.disj(&alg.neg(p).unwrap(), q).unwrap()
            );
            for r in &subsets {
                // associativity and distributivity
                assert_eq!(
                    alg.conj(p, &alg.conj(q, r).unwrap()).unwrap(),
                    alg.conj(&alg.conj(p, q).unwrap(), r).unwrap()
                );
                assert_eq!(
                    alg.disj(p, &alg.disj(q, r).unwrap()).unwrap(),
                    alg.disj(&alg.disj(p, q).unwrap(), r).unwrap()
                );
                assert_eq!(
                    alg.conj(p, &alg.disj(q, r).unwrap()).unwrap(),
                    alg.disj(&alg.conj(p, q).unwrap(), &alg.conj(p, r).unwrap())
                        .unwrap()
                );
                assert_eq!(
                    alg.disj(p, &alg.conj(q, r).unwrap()).unwrap(),
                    alg.conj(&alg.disj(p, q).unwrap(), &alg.disj(p, r).unwrap())
                        .unwrap()
                );
            }
        }
    }
    finish(5, "boolean algebra", started, Duration::from_secs(1));
}

// -- 6: conformance report --------------------------------------------------

#[test]
fn criterion_6_conformance_report() {
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_physarum");
    let run_laws = || {
        Command::new(bin)
            .args(["laws", "--seed", "0", "--samples", "50"])
            .output()
            .unwrap()
    };
    let first = run_laws();
    let second = run_laws();
    assert_eq!(first.stdout, second.stdout, "report must be deterministic");
    let text = String::from_utf8(first.stdout).unwrap();
    let laws: Vec<&str> = text.lines().filter(|l| l.starts_with("law ")).collect();
    assert_eq!(laws.len(), 14);
    let dir = tempfile::tempdir().unwrap();
    for line in text.lines().filter(|l| l.starts_with("cex ")) {
        let (lhs, rhs) = line[4..].split_once(" ;; ").unwrap();
        let left = dir.path().join("l.phy");
        let right = dir.path().join("r.phy");
        writeln!(std::fs::File::create(&left).unwrap(), "{lhs}").unwrap();
        writeln!(std::fs::File::create(&right).unwrap(), "{rhs}").unwrap();
        let verdict = Command::new(bin)
            .arg("bisim")
            .arg(&left)
            .arg(&right)
            .output()
            .unwrap();
        assert_eq!(
            verdict.status.code(),
            Some(1),
            "counterexample must replay as non-bisimilar: {line}"
        );
    }
    finish(6, "conformance report", started, Duration::from_secs(120));
}

// -- 7: round-trip fuzz ------------------------------------------------------

#[test]
fn criterion_7_roundtrip_fuzz() {
    let started = Instant::now();
    let gen = TermGen::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..10_000 {
        let term = gen.term(&mut rng);
        let text = term.to_string();
        let reparsed = parse(&text).unwrap_or_else(|e| panic!("sample {i} `{text}`: {e}"));
        assert_eq!(reparsed, term, "sample {i} `{text}` did not round-trip");
    }
    finish(7, "round-trip fuzz", started, Duration::from_secs(10));
}

// a non-criterion sanity check tying streams to bisimilarity: bisimilar
// roots have identical bounded trace sets
#[test]
fn bisimilar_roots_share_bounded_traces() {
    let env = Environment::new();
    let gen = TermGen {
        max_depth: 3,
        with_environment_ops: false,
        ..TermGen::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let p = gen.term(&mut rng);
        let q = physarum::syntax::ProcessTerm::choice(p.clone(), p.clone());
        let (lts, a, b) = build_joint_lts(&p, &q, &env, Bounds::default()).unwrap();
        let partition = bisimilarity(&lts);
        assert!(partition.same_block(a, b));
        assert_eq!(
            physarum::semantics::bounded_traces(&lts, a, 6),
            physarum::semantics::bounded_traces(&lts, b, 6)
        );
    }
}
