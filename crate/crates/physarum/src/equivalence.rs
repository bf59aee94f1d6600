//! Strong bisimilarity (partition refinement plus a naive oracle), the
//! congruence laws as a normalizing rewrite system, the hiding-derived
//! Boolean connectives over sorts, and the law conformance reporter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::environment::Environment;
use crate::gen::TermGen;
use crate::semantics::{build_joint_lts, Bounds, Lts, LtsEdge, LtsError};
use crate::syntax::{complement_term, Label, LabelSet, ProcessTerm};

// ---------------------------------------------------------------------------
// Partitions and bisimilarity
// ---------------------------------------------------------------------------

/// A partition of the states of an LTS into bisimilarity classes.
/// Canonical: blocks are numbered by their smallest member, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    /// Set when the underlying LTS was truncated, so the partition only
    /// approximates bisimilarity on the full system.
    pub approximate: bool,
}

impl Partition {
    fn canonical(assignment: Vec<usize>, approximate: bool) -> Partition {
        let mut rename: BTreeMap<usize, usize> = BTreeMap::new();
        let mut block_of = Vec::with_capacity(assignment.len());
        for &b in &assignment {
            let next = rename.len();
            let id = *rename.entry(b).or_insert(next);
            block_of.push(id);
        }
        Partition {
            block_of,
            approximate,
        }
    }

    pub fn num_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.block_of[state]
    }

    pub fn same_block(&self, p: usize, q: usize) -> bool {
        self.block_of[p] == self.block_of[q]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let count = self.block_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (state, &b) in self.block_of.iter().enumerate() {
            blocks[b].push(state);
        }
        blocks
    }
}

fn signature(state: usize, edges: &[LtsEdge], block: &[usize]) -> BTreeSet<(Label, usize)> {
    edges
        .iter()
        .filter(|e| e.src == state)
        .map(|e| (e.action.clone(), block[e.dst]))
        .collect()
}

/// Runs partition refinement, returning the block assignment after every
/// round (round 0 is the trivial one-block partition). States split on
/// (action, target-block) signatures; new block ids are assigned scanning
/// states in ascending order, which makes the result deterministic.
fn refinement_rounds(num_states: usize, edges: &[LtsEdge]) -> Vec<Vec<usize>> {
    let mut rounds = vec![vec![0usize; num_states]];
    loop {
        let current = rounds.last().unwrap();
        let mut ids: BTreeMap<(usize, BTreeSet<(Label, usize)>), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(num_states);
        for state in 0..num_states {
            let key = (current[state], signature(state, edges, current));
            let fresh = ids.len();
            next.push(*ids.entry(key).or_insert(fresh));
        }
        if ids.len() == rounds.last().unwrap().iter().collect::<BTreeSet<_>>().len() {
            break;
        }
        rounds.push(next);
    }
    rounds
}

/// The coarsest strong bisimulation partition of raw LTS data, by
/// iterated signature splitting to a fixed point.
pub fn bisimilarity_raw(num_states: usize, edges: &[LtsEdge]) -> Partition {
    let rounds = refinement_rounds(num_states, edges);
    Partition::canonical(rounds.last().unwrap().clone(), false)
}

/// The coarsest strong bisimulation partition of an LTS. Flagged as
/// approximate when the LTS was truncated by an exploration bound.
pub fn bisimilarity(lts: &Lts) -> Partition {
    let mut p = bisimilarity_raw(lts.states.len(), &lts.transitions);
    p.approximate = lts.truncated;
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("naive bisimulation oracle limited to {limit} states, got {got}")]
pub struct SizeLimit {
    pub limit: usize,
    pub got: usize,
}

const NAIVE_LIMIT: usize = 200;

/// The greatest bisimulation computed the slow way: start from all state
/// pairs and repeatedly delete pairs violating the transfer condition.
/// Serves as the independent oracle for [`bisimilarity`].
pub fn naive_bisim_raw(num_states: usize, edges: &[LtsEdge]) -> Result<Partition, SizeLimit> {
    if num_states > NAIVE_LIMIT {
        return Err(SizeLimit {
            limit: NAIVE_LIMIT,
            got: num_states,
        });
    }
    let mut related = vec![vec![true; num_states]; num_states];
    let moves = |s: usize| -> Vec<(&Label, usize)> {
        edges
            .iter()
            .filter(|e| e.src == s)
            .map(|e| (&e.action, e.dst))
            .collect()
    };
    let mut changed = true;
    while changed {
        changed = false;
        for p in 0..num_states {
            for q in 0..num_states {
                if !related[p][q] {
                    continue;
                }
                let transfer = |from: usize, to: usize, rel: &Vec<Vec<bool>>| {
                    moves(from).into_iter().all(|(a, from2)| {
                        moves(to)
                            .into_iter()
                            .any(|(b, to2)| a == b && rel[from2][to2])
                    })
                };
                if !transfer(p, q, &related) || !transfer(q, p, &related) {
                    related[p][q] = false;
                    related[q][p] = false;
                    changed = true;
                }
            }
        }
    }
    // at the fixed point the relation is an equivalence
    let mut assignment = vec![usize::MAX; num_states];
    for s in 0..num_states {
        let representative = (0..num_states).find(|&r| related[s][r]).unwrap_or(s);
        assignment[s] = representative;
    }
    Ok(Partition::canonical(assignment, false))
}

pub fn naive_bisim(lts: &Lts) -> Result<Partition, SizeLimit> {
    let mut p = naive_bisim_raw(lts.states.len(), &lts.transitions)?;
    p.approximate = lts.truncated;
    Ok(p)
}

/// A bisimulation-game play distinguishing two non-bisimilar states: the
/// actions the attacker picks, descending through the refinement rounds.
/// `None` when the states are bisimilar.
pub fn distinguishing_sequence(
    num_states: usize,
    edges: &[LtsEdge],
    p: usize,
    q: usize,
) -> Option<Vec<Label>> {
    let rounds = refinement_rounds(num_states, edges);
    distinguish_at(&rounds, edges, p, q, rounds.len() - 1)
}

fn distinguish_at(
    rounds: &[Vec<usize>],
    edges: &[LtsEdge],
    p: usize,
    q: usize,
    round: usize,
) -> Option<Vec<Label>> {
    if rounds[round][p] == rounds[round][q] {
        return None;
    }
    // find the earliest round where the pair split
    let split = (1..=round)
        .find(|&r| rounds[r][p] != rounds[r][q])
        .expect("pair split at some round");
    let prev = &rounds[split - 1];
    let sig = |s: usize| signature(s, edges, prev);
    let (sp, sq) = (sig(p), sig(q));
    // an attacker move present on one side but not the other
    let (attacker, defender, item) = if let Some(item) = sp.difference(&sq).next() {
        (p, q, item.clone())
    } else {
        let item = sq.difference(&sp).next().expect("signatures differ").clone();
        (q, p, item)
    };
    let (action, target_block) = item;
    let succ = |s: usize, a: &Label| -> Vec<usize> {
        edges
            .iter()
            .filter(|e| e.src == s && e.action == *a)
            .map(|e| e.dst)
            .collect()
    };
    let attacker_target = succ(attacker, &action)
        .into_iter()
        .find(|&t| prev[t] == target_block)
        .expect("signature move exists");
    let defender_targets = succ(defender, &action);
    if defender_targets.is_empty() {
        return Some(vec![action]);
    }
    // every defender reply lands outside the target block, so each reply
    // pair is already split at an earlier round
    let reply = defender_targets[0];
    let mut seq = vec![action];
    seq.extend(
        distinguish_at(rounds, edges, attacker_target, reply, split - 1)
            .expect("reply pair split earlier"),
    );
    Some(seq)
}

// ---------------------------------------------------------------------------
// The congruence laws as a normalizer
// ---------------------------------------------------------------------------

/// Rewrites a term into the canonical form of the congruence: fusions and
/// choices are flattened into sorted duplicate-free multisets, `Nil` is
/// absorbed by fusion and dropped from choice, hiding is pushed through
/// choice and fusion, fusion distributes over choice into a sum of fusions,
/// absorbed summands are removed, and self-complementary subterms collapse
/// to `Nil` (any `P` with `P = P̄` is provably `0`: `P = P & P = P & P̄ = 0`).
/// Idempotent.
pub fn normalize(term: &ProcessTerm) -> ProcessTerm {
    let mut n = norm0(term);
    loop {
        let next = norm0(&collapse(&n));
        if next == n {
            return n;
        }
        n = next;
    }
}

/// The structural rewrite pass, without self-complement collapse.
fn norm0(term: &ProcessTerm) -> ProcessTerm {
    match term {
        ProcessTerm::Nil | ProcessTerm::Diffuse(_) | ProcessTerm::Const(_) => term.clone(),
        ProcessTerm::Prefix(l, p) => ProcessTerm::prefix(l.clone(), norm0(p)),
        ProcessTerm::Attract(l, p) => ProcessTerm::attract(l.clone(), norm0(p)),
        ProcessTerm::Repel(l, p) => ProcessTerm::repel(l.clone(), norm0(p)),
        ProcessTerm::Coop(l, r) => ProcessTerm::coop(norm0(l), norm0(r)),
        ProcessTerm::Hide(p, hidden) => hide_norm(norm0(p), hidden),
        ProcessTerm::Choice(l, r) => sum_norm(vec![norm0(l), norm0(r)]),
        ProcessTerm::Fuse(l, r) => fuse_norm(vec![norm0(l), norm0(r)]),
    }
}

/// One bottom-up sweep replacing self-complementary subterms by `Nil`.
fn collapse(term: &ProcessTerm) -> ProcessTerm {
    let rebuilt = match term {
        ProcessTerm::Nil | ProcessTerm::Diffuse(_) | ProcessTerm::Const(_) => term.clone(),
        ProcessTerm::Prefix(l, p) => ProcessTerm::prefix(l.clone(), collapse(p)),
        ProcessTerm::Attract(l, p) => ProcessTerm::attract(l.clone(), collapse(p)),
        ProcessTerm::Repel(l, p) => ProcessTerm::repel(l.clone(), collapse(p)),
        ProcessTerm::Coop(l, r) => ProcessTerm::coop(collapse(l), collapse(r)),
        ProcessTerm::Hide(p, hidden) => ProcessTerm::hide(collapse(p), hidden.clone()),
        ProcessTerm::Choice(l, r) => ProcessTerm::choice(collapse(l), collapse(r)),
        ProcessTerm::Fuse(l, r) => ProcessTerm::fuse(collapse(l), collapse(r)),
    };
    if rebuilt != ProcessTerm::Nil {
        if let Ok(comp) = complement_term(&rebuilt) {
            if norm0(&comp) == norm0(&rebuilt) {
                return ProcessTerm::Nil;
            }
        }
    }
    rebuilt
}

/// `normalize(t1) == normalize(t2)`, the decision procedure for the
/// axiomatic congruence.
pub fn axiom_equal(t1: &ProcessTerm, t2: &ProcessTerm) -> bool {
    normalize(t1) == normalize(t2)
}

fn flatten_choice(term: ProcessTerm, out: &mut Vec<ProcessTerm>) {
    match term {
        ProcessTerm::Choice(l, r) => {
            flatten_choice(*l, out);
            flatten_choice(*r, out);
        }
        other => out.push(other),
    }
}

fn flatten_fuse(term: ProcessTerm, out: &mut Vec<ProcessTerm>) {
    match term {
        ProcessTerm::Fuse(l, r) => {
            flatten_fuse(*l, out);
            flatten_fuse(*r, out);
        }
        other => out.push(other),
    }
}

fn rebuild<F: Fn(ProcessTerm, ProcessTerm) -> ProcessTerm>(
    mut operands: Vec<ProcessTerm>,
    join: F,
) -> ProcessTerm {
    let first = operands.remove(0);
    operands.into_iter().fold(first, join)
}

/// Hiding pushed through normalized bodies: `Nil \ H = Nil`, and hiding
/// distributes over both choice and fusion.
fn hide_norm(body: ProcessTerm, hidden: &LabelSet) -> ProcessTerm {
    match body {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Choice(l, r) => {
            sum_norm(vec![hide_norm(*l, hidden), hide_norm(*r, hidden)])
        }
        ProcessTerm::Fuse(l, r) => {
            fuse_norm(vec![hide_norm(*l, hidden), hide_norm(*r, hidden)])
        }
        other => ProcessTerm::hide(other, hidden.clone()),
    }
}

/// N-ary choice of normalized operands: flatten, drop `Nil`, sort, dedup,
/// remove absorbed summands (a summand whose fusion factors include all of
/// another's is redundant).
fn sum_norm(operands: Vec<ProcessTerm>) -> ProcessTerm {
    let mut flat = Vec::new();
    for op in operands {
        flatten_choice(op, &mut flat);
    }
    flat.retain(|t| *t != ProcessTerm::Nil);
    flat.sort();
    flat.dedup();
    if flat.is_empty() {
        return ProcessTerm::Nil;
    }
    // absorption on fusion factor sets
    let factor_sets: Vec<BTreeSet<ProcessTerm>> = flat
        .iter()
        .map(|t| {
            let mut fs = Vec::new();
            flatten_fuse(t.clone(), &mut fs);
            fs.into_iter().collect()
        })
        .collect();
    let keep: Vec<bool> = (0..flat.len())
        .map(|i| {
            !(0..flat.len()).any(|j| {
                j != i
                    && factor_sets[j].is_subset(&factor_sets[i])
                    && factor_sets[j] != factor_sets[i]
            })
        })
        .collect();
    let flat: Vec<ProcessTerm> = flat
        .into_iter()
        .zip(keep)
        .filter_map(|(t, k)| k.then_some(t))
        .collect();
    rebuild(flat, ProcessTerm::choice)
}

/// N-ary fusion of normalized operands: flatten, sort, dedup, absorb into
/// `Nil` when an operand is `Nil` or two operands are syntactic complements,
/// then distribute over any choice operand into a sum of fusions.
fn fuse_norm(operands: Vec<ProcessTerm>) -> ProcessTerm {
    let mut flat = Vec::new();
    for op in operands {
        flatten_fuse(op, &mut flat);
    }
    flat.sort();
    flat.dedup();
    if flat.len() == 1 {
        return flat.pop().unwrap();
    }
    if flat.iter().any(|t| *t == ProcessTerm::Nil) {
        return ProcessTerm::Nil;
    }
    // complement pairs annihilate the whole fusion
    for t in &flat {
        if let Ok(comp) = complement_term(t) {
            let comp = norm0(&comp);
            if flat.iter().any(|u| *u == comp && *u != *t) {
                return ProcessTerm::Nil;
            }
        }
    }
    if flat.iter().any(|t| matches!(t, ProcessTerm::Choice(..))) {
        // fusion distributes over choice: build the sum of all picks
        let alternatives: Vec<Vec<ProcessTerm>> = flat
            .into_iter()
            .map(|t| {
                let mut summands = Vec::new();
                flatten_choice(t, &mut summands);
                summands
            })
            .collect();
        let mut combos: Vec<Vec<ProcessTerm>> = vec![Vec::new()];
        for summands in &alternatives {
            let mut next = Vec::new();
            for combo in &combos {
                for s in summands {
                    let mut extended = combo.clone();
                    extended.push(s.clone());
                    next.push(extended);
                }
            }
            combos = next;
        }
        let summands: Vec<ProcessTerm> = combos.into_iter().map(fuse_norm).collect();
        return sum_norm(summands);
    }
    rebuild(flat, ProcessTerm::fuse)
}

// ---------------------------------------------------------------------------
// Hiding-derived Boolean connectives over sorts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sort {sort} is not contained in the universe {universe}")]
pub struct SortOutOfUniverse {
    pub sort: LabelSet,
    pub universe: LabelSet,
}

/// The Boolean algebra of sorts induced by hiding, with `1` read as the
/// universe: `¬P = 1 \ P`, `P ∧ Q = P \ (1 \ Q)`, `P ∨ Q = 1 \ ((1 \ P) \ Q)`
/// and `P ⊃ Q = 1 \ (P \ Q)`, each computed through set difference.
#[derive(Debug, Clone)]
pub struct SortConnectives {
    universe: LabelSet,
}

impl SortConnectives {
    pub fn new(universe: LabelSet) -> SortConnectives {
        assert!(!universe.is_empty(), "universe must be nonempty");
        SortConnectives { universe }
    }

    fn check(&self, sort: &LabelSet) -> Result<(), SortOutOfUniverse> {
        if sort.is_subset(&self.universe) {
            Ok(())
        } else {
            Err(SortOutOfUniverse {
                sort: sort.clone(),
                universe: self.universe.clone(),
            })
        }
    }

    pub fn neg(&self, p: &LabelSet) -> Result<LabelSet, SortOutOfUniverse> {
        self.check(p)?;
        Ok(self.universe.difference(p))
    }

    pub fn conj(&self, p: &LabelSet, q: &LabelSet) -> Result<LabelSet, SortOutOfUniverse> {
        self.check(p)?;
        self.check(q)?;
        Ok(p.difference(&self.universe.difference(q)))
    }

    pub fn disj(&self, p: &LabelSet, q: &LabelSet) -> Result<LabelSet, SortOutOfUniverse> {
        self.check(p)?;
        self.check(q)?;
        Ok(self
            .universe
            .difference(&self.universe.difference(p).difference(q)))
    }

    pub fn impl_(&self, p: &LabelSet, q: &LabelSet) -> Result<LabelSet, SortOutOfUniverse> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.universe.difference(&p.difference(q)))
    }
}

// ---------------------------------------------------------------------------
// Law conformance under strong bisimilarity
// ---------------------------------------------------------------------------

/// Verdicts for one law across all sampled instantiations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawResult {
    pub law: usize,
    pub holds: usize,
    pub total: usize,
    pub counterexamples: Vec<(ProcessTerm, ProcessTerm)>,
}

impl LawResult {
    pub fn all_hold(&self) -> bool {
        self.holds == self.total
    }
}

/// Per-law verdicts of the congruence equations under strong bisimilarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConformanceReport {
    pub laws: Vec<LawResult>,
}

impl fmt::Display for ConformanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for law in &self.laws {
            writeln!(
                f,
                "law {} {} {}/{}",
                law.law,
                if law.all_hold() { "holds" } else { "fails" },
                law.holds,
                law.total
            )?;
            for (lhs, rhs) in &law.counterexamples {
                writeln!(f, "cex {lhs} ;; {rhs}")?;
            }
        }
        Ok(())
    }
}

/// Sampling parameters for [`law_conformance`].
#[derive(Debug, Clone)]
pub struct LawSampleParams {
    pub seed: u64,
    pub samples: usize,
    pub max_depth: usize,
    pub bounds: Bounds,
}

impl Default for LawSampleParams {
    fn default() -> LawSampleParams {
        LawSampleParams {
            seed: 0,
            samples: 50,
            max_depth: 4,
            bounds: Bounds {
                max_states: 4000,
                max_depth: 64,
                max_unfold: 64,
            },
        }
    }
}

/// Builds both sides of each congruence law for seeded random terms and
/// compares their LTS roots under strong bisimilarity. The congruence holds
/// by construction in [`normalize`]; this report records which laws also
/// hold behaviourally.
pub fn law_conformance(
    params: &LawSampleParams,
    env: &Environment,
) -> Result<ConformanceReport, LtsError> {
    let alphabet: Vec<String> = if env.universe.is_empty() {
        vec!["a".into(), "b".into(), "c".into(), "d".into()]
    } else {
        env.universe
            .iter()
            .filter_map(|l| l.name().map(|n| n.to_string()))
            .collect()
    };
    let gen = TermGen {
        max_depth: params.max_depth,
        alphabet,
        with_environment_ops: true,
    };
    let mut laws = Vec::new();
    for law in 1..=14 {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(law as u64));
        let mut holds = 0;
        let mut counterexamples = Vec::new();
        for _ in 0..params.samples {
            let (lhs, rhs) = instantiate_law(law, &gen, &mut rng);
            let (lts, root_l, root_r) = build_joint_lts(&lhs, &rhs, env, params.bounds)?;
            let partition = bisimilarity(&lts);
            if partition.same_block(root_l, root_r) {
                holds += 1;
            } else {
                counterexamples.push((lhs, rhs));
            }
        }
        laws.push(LawResult {
            law,
            holds,
            total: params.samples,
            counterexamples,
        });
    }
    Ok(ConformanceReport { laws })
}

/// Both sides of congruence law `n` instantiated with random terms.
pub fn instantiate_law(
    law: usize,
    gen: &TermGen,
    rng: &mut ChaCha8Rng,
) -> (ProcessTerm, ProcessTerm) {
    use ProcessTerm as T;
    let p = gen.term(rng);
    let q = gen.term(rng);
    let r = gen.term(rng);
    let h = gen.label_set(rng);
    match law {
        1 => (T::hide(T::Nil, h), T::Nil),
        2 => {
            let comp = complement_term(&p).expect("generated terms are constant-free");
            (T::fuse(p, comp), T::Nil)
        }
        3 => (T::fuse(p.clone(), p.clone()), p),
        4 => (T::fuse(p, T::Nil), T::Nil),
        5 => (
            T::hide(T::choice(p.clone(), q.clone()), h.clone()),
            T::choice(T::hide(p, h.clone()), T::hide(q, h)),
        ),
        6 => (
            T::hide(T::fuse(p.clone(), q.clone()), h.clone()),
            T::fuse(T::hide(p, h.clone()), T::hide(q, h)),
        ),
        7 => (T::fuse(p.clone(), q.clone()), T::fuse(q, p)),
        8 => (
            T::fuse(p.clone(), T::fuse(q.clone(), r.clone())),
            T::fuse(T::fuse(p, q), r),
        ),
        9 => (T::choice(p.clone(), p.clone()), p),
        10 => (T::choice(p.clone(), T::Nil), p),
        11 => (T::choice(p.clone(), q.clone()), T::choice(q, p)),
        12 => (
            T::choice(p.clone(), T::choice(q.clone(), r.clone())),
            T::choice(T::choice(p, q), r),
        ),
        13 => (
            T::fuse(p.clone(), T::choice(q.clone(), r.clone())),
            T::choice(T::fuse(p.clone(), q), T::fuse(p, r)),
        ),
        14 => (
            T::choice(p.clone(), T::fuse(q.clone(), r.clone())),
            T::fuse(T::choice(p.clone(), q), T::choice(p, r)),
        ),
        other => panic!("no law {other}"),
    }
}
