//! One-step transition derivation under the SOS rules, and bounded
//! breadth-first exploration into a labelled transition system.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::environment::Environment;
use crate::syntax::{complement_term, Label, ProcessTerm};

/// Which rule schema produced a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleTag {
    Prefix,
    PrefixA,
    PrefixR,
    Diffusion,
    Constant,
    ChoiceL,
    ChoiceR,
    CoopL,
    CoopR,
    CoopSync,
    Hiding,
    FuseAnnihilate,
    FuseJoinL,
    FuseJoinR,
    FuseSpreadL,
    FuseSpreadR,
}

impl RuleTag {
    pub const ALL: [RuleTag; 16] = [
        RuleTag::Prefix,
        RuleTag::PrefixA,
        RuleTag::PrefixR,
        RuleTag::Diffusion,
        RuleTag::Constant,
        RuleTag::ChoiceL,
        RuleTag::ChoiceR,
        RuleTag::CoopL,
        RuleTag::CoopR,
        RuleTag::CoopSync,
        RuleTag::Hiding,
        RuleTag::FuseAnnihilate,
        RuleTag::FuseJoinL,
        RuleTag::FuseJoinR,
        RuleTag::FuseSpreadL,
        RuleTag::FuseSpreadR,
    ];
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RuleTag::Prefix => "Prefix",
            RuleTag::PrefixA => "PrefixA",
            RuleTag::PrefixR => "PrefixR",
            RuleTag::Diffusion => "Diffusion",
            RuleTag::Constant => "Constant",
            RuleTag::ChoiceL => "ChoiceL",
            RuleTag::ChoiceR => "ChoiceR",
            RuleTag::CoopL => "CoopL",
            RuleTag::CoopR => "CoopR",
            RuleTag::CoopSync => "CoopSync",
            RuleTag::Hiding => "Hiding",
            RuleTag::FuseAnnihilate => "FuseAnnihilate",
            RuleTag::FuseJoinL => "FuseJoinL",
            RuleTag::FuseJoinR => "FuseJoinR",
            RuleTag::FuseSpreadL => "FuseSpreadL",
            RuleTag::FuseSpreadR => "FuseSpreadR",
        };
        write!(f, "{name}")
    }
}

/// A derived one-step transition together with the rule that produced it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: ProcessTerm,
    pub action: Label,
    pub target: ProcessTerm,
    pub rule: RuleTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("unresolved constant `{0}`")]
    UnresolvedConstant(String),
    #[error("constant unfolding exceeded the bound of {0}; definitions may be unguarded")]
    DepthExceeded(usize),
}

/// A (action, target, rule) triple relative to an implicit source.
type Move = (Label, ProcessTerm, RuleTag);

/// Derives the full one-step transition set of a term under the sixteen
/// rule schemata.
pub fn derive_transitions(
    term: &ProcessTerm,
    env: &Environment,
) -> Result<BTreeSet<Transition>, DeriveError> {
    let moves = derive(term, env, env.bounds.max_unfold)?;
    Ok(moves
        .into_iter()
        .map(|(action, target, rule)| Transition {
            source: term.clone(),
            action,
            target,
            rule,
        })
        .collect())
}

fn derive(
    term: &ProcessTerm,
    env: &Environment,
    budget: usize,
) -> Result<BTreeSet<Move>, DeriveError> {
    let mut out = BTreeSet::new();
    match term {
        ProcessTerm::Nil => {}
        ProcessTerm::Prefix(l, p) => {
            out.insert((l.clone(), (**p).clone(), RuleTag::Prefix));
        }
        ProcessTerm::Attract(l, p) => {
            if let Some(beta) = env.lookup_attract(l) {
                out.insert((beta.clone(), (**p).clone(), RuleTag::PrefixA));
            }
        }
        ProcessTerm::Repel(l, p) => {
            if let Some(beta) = env.lookup_repel(l) {
                out.insert((beta.clone(), (**p).clone(), RuleTag::PrefixR));
            }
        }
        ProcessTerm::Diffuse(l) => {
            if let Some(bound) = env.lookup_diffusion(l) {
                if budget == 0 {
                    return Err(DeriveError::DepthExceeded(env.bounds.max_unfold));
                }
                for (action, target, _) in derive(bound, env, budget - 1)? {
                    out.insert((action, target, RuleTag::Diffusion));
                }
            }
        }
        ProcessTerm::Const(name) => {
            if budget == 0 {
                return Err(DeriveError::DepthExceeded(env.bounds.max_unfold));
            }
            let body = env
                .resolve_constant(name)
                .map_err(|e| DeriveError::UnresolvedConstant(e.0))?;
            for (action, target, _) in derive(&body, env, budget - 1)? {
                out.insert((action, target, RuleTag::Constant));
            }
        }
        ProcessTerm::Choice(l, r) => {
            for (action, target, _) in derive(l, env, budget)? {
                out.insert((action, target, RuleTag::ChoiceL));
            }
            for (action, target, _) in derive(r, env, budget)? {
                out.insert((action, target, RuleTag::ChoiceR));
            }
        }
        ProcessTerm::Coop(l, r) => {
            let left = derive(l, env, budget)?;
            let right = derive(r, env, budget)?;
            for (action, target, _) in &left {
                out.insert((
                    action.clone(),
                    ProcessTerm::coop(target.clone(), (**r).clone()),
                    RuleTag::CoopL,
                ));
            }
            for (action, target, _) in &right {
                out.insert((
                    action.clone(),
                    ProcessTerm::coop((**l).clone(), target.clone()),
                    RuleTag::CoopR,
                ));
            }
            for (la, lt, _) in &left {
                if let Some(comp) = la.complement() {
                    for (ra, rt, _) in &right {
                        if *ra == comp {
                            out.insert((
                                Label::Tau,
                                ProcessTerm::coop(lt.clone(), rt.clone()),
                                RuleTag::CoopSync,
                            ));
                        }
                    }
                }
            }
        }
        ProcessTerm::Hide(p, hidden) => {
            for (action, target, _) in derive(p, env, budget)? {
                if !hidden.contains(&action) {
                    out.insert((
                        action,
                        ProcessTerm::hide(target, hidden.clone()),
                        RuleTag::Hiding,
                    ));
                }
            }
        }
        ProcessTerm::Fuse(l, r) => {
            // Annihilation: α.P & complement(P) --α--> Nil, and symmetric.
            if let ProcessTerm::Prefix(alpha, body) = &**l {
                if let Ok(comp) = complement_term(body) {
                    if comp == **r {
                        out.insert((alpha.clone(), ProcessTerm::Nil, RuleTag::FuseAnnihilate));
                    }
                }
            }
            if let ProcessTerm::Prefix(alpha, body) = &**r {
                if let Ok(comp) = complement_term(body) {
                    if comp == **l {
                        out.insert((alpha.clone(), ProcessTerm::Nil, RuleTag::FuseAnnihilate));
                    }
                }
            }
            let left = derive(l, env, budget)?;
            let right = derive(r, env, budget)?;
            // Join: the same action reaching the structurally identical
            // target from both operands.
            for (la, lt, _) in &left {
                for (ra, rt, _) in &right {
                    if la == ra && lt == rt {
                        out.insert((la.clone(), lt.clone(), RuleTag::FuseJoinL));
                        out.insert((la.clone(), lt.clone(), RuleTag::FuseJoinR));
                    }
                }
            }
            // Spread: either operand moves into the literal term
            // Nil + C(α) + P' (left associated).
            let spread_target = |action: &Label, target: &ProcessTerm| {
                ProcessTerm::choice(
                    ProcessTerm::choice(ProcessTerm::Nil, ProcessTerm::Diffuse(action.clone())),
                    target.clone(),
                )
            };
            for (action, target, _) in &left {
                out.insert((
                    action.clone(),
                    spread_target(action, target),
                    RuleTag::FuseSpreadL,
                ));
            }
            for (action, target, _) in &right {
                out.insert((
                    action.clone(),
                    spread_target(action, target),
                    RuleTag::FuseSpreadR,
                ));
            }
        }
    }
    Ok(out)
}

/// Checks that a transition re-derives under its named rule schema.
/// Premises are checked with `derive_transitions`; the final step is
/// matched against the schema shape itself.
pub fn replays(t: &Transition, env: &Environment) -> bool {
    let derivable = |term: &ProcessTerm, action: &Label, target: &ProcessTerm| {
        derive_transitions(term, env)
            .map(|set| set.iter().any(|m| m.action == *action && m.target == *target))
            .unwrap_or(false)
    };
    match (&t.rule, &t.source) {
        (RuleTag::Prefix, ProcessTerm::Prefix(l, p)) => *l == t.action && **p == t.target,
        (RuleTag::PrefixA, ProcessTerm::Attract(l, p)) => {
            env.lookup_attract(l) == Some(&t.action) && **p == t.target
        }
        (RuleTag::PrefixR, ProcessTerm::Repel(l, p)) => {
            env.lookup_repel(l) == Some(&t.action) && **p == t.target
        }
        (RuleTag::Diffusion, ProcessTerm::Diffuse(l)) => match env.lookup_diffusion(l) {
            Some(bound) => derivable(bound, &t.action, &t.target),
            None => false,
        },
        (RuleTag::Constant, ProcessTerm::Const(name)) => match env.resolve_constant(name) {
            Ok(body) => derivable(&body, &t.action, &t.target),
            Err(_) => false,
        },
        (RuleTag::ChoiceL, ProcessTerm::Choice(l, _)) => derivable(l, &t.action, &t.target),
        (RuleTag::ChoiceR, ProcessTerm::Choice(_, r)) => derivable(r, &t.action, &t.target),
        (RuleTag::CoopL, ProcessTerm::Coop(l, r)) => match &t.target {
            ProcessTerm::Coop(tl, tr) => tr == r && derivable(l, &t.action, tl),
            _ => false,
        },
        (RuleTag::CoopR, ProcessTerm::Coop(l, r)) => match &t.target {
            ProcessTerm::Coop(tl, tr) => tl == l && derivable(r, &t.action, tr),
            _ => false,
        },
        (RuleTag::CoopSync, ProcessTerm::Coop(l, r)) => match (&t.action, &t.target) {
            (Label::Tau, ProcessTerm::Coop(tl, tr)) => {
                derive_transitions(l, env).ok().is_some_and(|left| {
                    left.iter().any(|m| {
                        m.target == **tl
                            && m.action
                                .complement()
                                .is_some_and(|c| derivable(r, &c, tr))
                    })
                })
            }
            _ => false,
        },
        (RuleTag::Hiding, ProcessTerm::Hide(p, hidden)) => match &t.target {
            ProcessTerm::Hide(tp, th) => {
                th == hidden && !hidden.contains(&t.action) && derivable(p, &t.action, tp)
            }
            _ => false,
        },
        (RuleTag::FuseAnnihilate, ProcessTerm::Fuse(l, r)) => {
            if t.target != ProcessTerm::Nil {
                return false;
            }
            let matches = |px: &ProcessTerm, qx: &ProcessTerm| match px {
                ProcessTerm::Prefix(alpha, body) => {
                    *alpha == t.action && complement_term(body).is_ok_and(|c| c == *qx)
                }
                _ => false,
            };
            matches(l, r) || matches(r, l)
        }
        (RuleTag::FuseJoinL | RuleTag::FuseJoinR, ProcessTerm::Fuse(l, r)) => {
            derivable(l, &t.action, &t.target) && derivable(r, &t.action, &t.target)
        }
        (RuleTag::FuseSpreadL, ProcessTerm::Fuse(l, _))
        | (RuleTag::FuseSpreadR, ProcessTerm::Fuse(_, l)) => match &t.target {
            ProcessTerm::Choice(head, cont) => {
                **head
                    == ProcessTerm::choice(
                        ProcessTerm::Nil,
                        ProcessTerm::Diffuse(t.action.clone()),
                    )
                    && derivable(l, &t.action, cont)
            }
            _ => false,
        },
        _ => false,
    }
}

/// Exploration bounds for [`build_lts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_states: usize,
    pub max_depth: usize,
    pub max_unfold: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            max_states: 1000,
            max_depth: 100,
            max_unfold: 64,
        }
    }
}

/// An indexed transition in an [`Lts`]; state indices refer to `Lts::states`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LtsEdge {
    pub src: usize,
    pub action: Label,
    pub dst: usize,
    pub rule: RuleTag,
}

/// What the opt-in diffusion pass observed while exploring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffusionEvent {
    Bound { label: Label, term: ProcessTerm },
    Conflict {
        label: Label,
        existing: ProcessTerm,
        attempted: ProcessTerm,
    },
}

impl fmt::Display for DiffusionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusionEvent::Bound { label, term } => write!(f, "bound C({label}) := {term}"),
            DiffusionEvent::Conflict {
                label,
                existing,
                attempted,
            } => write!(
                f,
                "conflict C({label}): kept {existing}, rejected {attempted}"
            ),
        }
    }
}

/// A finite labelled transition system with bounded-exploration metadata.
/// State 0 is the root. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<ProcessTerm>,
    pub transitions: Vec<LtsEdge>,
    pub truncated: bool,
    pub diffusion_report: Vec<DiffusionEvent>,
    /// Optional (species, cell) annotations per state.
    pub coordinates: BTreeMap<usize, (usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("derivation failed at state `{state}`: {source}")]
pub struct LtsError {
    pub state: String,
    #[source]
    pub source: DeriveError,
}

impl Lts {
    pub fn from_parts(states: Vec<ProcessTerm>, mut transitions: Vec<LtsEdge>) -> Lts {
        transitions.sort();
        transitions.dedup();
        Lts {
            states,
            transitions,
            truncated: false,
            diffusion_report: Vec::new(),
            coordinates: BTreeMap::new(),
        }
    }

    pub fn index_of(&self, term: &ProcessTerm) -> Option<usize> {
        self.states.iter().position(|s| s == term)
    }

    pub fn successors(&self, state: usize) -> impl Iterator<Item = &LtsEdge> {
        self.transitions.iter().filter(move |e| e.src == state)
    }

    /// The line-oriented `.lts` export, transitions sorted by
    /// (src, action, dst, rule).
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "states {} transitions {} root 0\n",
            self.states.len(),
            self.transitions.len()
        );
        for (i, s) in self.states.iter().enumerate() {
            out.push_str(&format!("state {i} {s}\n"));
        }
        let mut edges = self.transitions.clone();
        edges.sort_by(|a, b| {
            (a.src, &a.action, a.dst, a.rule).cmp(&(b.src, &b.action, b.dst, b.rule))
        });
        for e in edges {
            out.push_str(&format!("trans {} {} {} {}\n", e.src, e.action, e.dst, e.rule));
        }
        out
    }

    /// DOT digraph export: states labelled by formatted terms, edges by
    /// action and rule tag.
    pub fn to_dot(&self) -> String {
        let escape = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph lts {\n  rankdir=LR;\n");
        for (i, s) in self.states.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{}\"];\n", escape(&s.to_string())));
        }
        let mut edges = self.transitions.clone();
        edges.sort_by(|a, b| {
            (a.src, &a.action, a.dst, a.rule).cmp(&(b.src, &b.action, b.dst, b.rule))
        });
        for e in edges {
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{} ({})\"];\n",
                e.src, e.dst, e.action, e.rule
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Breadth-first closure of [`derive_transitions`] from a root term.
///
/// States are numbered by BFS level, ties within a level broken by the
/// formatted term text, which makes the numbering deterministic. When
/// `diffusion` is set, every derived transition registers its target as
/// the binding for `C(action)`; the first binding per label wins and later
/// disagreeing bindings are reported as conflicts.
pub fn build_lts(
    root: &ProcessTerm,
    env: &Environment,
    bounds: Bounds,
    diffusion: bool,
) -> Result<Lts, LtsError> {
    let mut env = env.clone();
    env.bounds = bounds;
    let mut report = Vec::new();

    let mut states: Vec<ProcessTerm> = vec![root.clone()];
    let mut index: BTreeMap<ProcessTerm, usize> = BTreeMap::new();
    index.insert(root.clone(), 0);
    let mut edges: Vec<LtsEdge> = Vec::new();
    let mut truncated = false;

    let mut frontier: Vec<usize> = vec![0];
    let mut depth = 0;
    while !frontier.is_empty() {
        if depth >= bounds.max_depth {
            truncated = true;
            break;
        }
        let mut discovered: BTreeSet<ProcessTerm> = BTreeSet::new();
        let mut level_edges: Vec<(usize, Label, ProcessTerm, RuleTag)> = Vec::new();
        for &src in &frontier {
            let term = states[src].clone();
            let moves = derive_transitions(&term, &env).map_err(|e| LtsError {
                state: term.to_string(),
                source: e,
            })?;
            for t in moves {
                if diffusion {
                    match env.bind_diffusion(t.action.clone(), t.target.clone()) {
                        Ok(next) => {
                            if env.lookup_diffusion(&t.action).is_none() {
                                report.push(DiffusionEvent::Bound {
                                    label: t.action.clone(),
                                    term: t.target.clone(),
                                });
                            }
                            env = next;
                        }
                        Err(_) => {
                            report.push(DiffusionEvent::Conflict {
                                label: t.action.clone(),
                                existing: env.lookup_diffusion(&t.action).unwrap().clone(),
                                attempted: t.target.clone(),
                            });
                        }
                    }
                }
                if !index.contains_key(&t.target) {
                    discovered.insert(t.target.clone());
                }
                level_edges.push((src, t.action, t.target, t.rule));
            }
        }
        // assign indices to this level's new states in formatted-term order
        let mut ordered: Vec<ProcessTerm> = discovered.into_iter().collect();
        ordered.sort_by_key(|t| t.to_string());
        let mut next_frontier = Vec::new();
        for t in ordered {
            if states.len() >= bounds.max_states {
                truncated = true;
                break;
            }
            let id = states.len();
            states.push(t.clone());
            index.insert(t, id);
            next_frontier.push(id);
        }
        for (src, action, target, rule) in level_edges {
            match index.get(&target) {
                Some(&dst) => edges.push(LtsEdge {
                    src,
                    action,
                    dst,
                    rule,
                }),
                // target dropped by the state bound
                None => truncated = true,
            }
        }
        frontier = next_frontier;
        depth += 1;
    }

    edges.sort();
    edges.dedup();
    Ok(Lts {
        states,
        transitions: edges,
        truncated,
        diffusion_report: report,
        coordinates: BTreeMap::new(),
    })
}

/// Convenience for comparing two terms: both are explored into one LTS
/// whose states are disjointly united. Returns the LTS and both root ids.
pub fn build_joint_lts(
    left: &ProcessTerm,
    right: &ProcessTerm,
    env: &Environment,
    bounds: Bounds,
) -> Result<(Lts, usize, usize), LtsError> {
    let l = build_lts(left, env, bounds, false)?;
    let r = build_lts(right, env, bounds, false)?;
    let offset = l.states.len();
    let mut states = l.states;
    states.extend(r.states);
    let mut transitions = l.transitions;
    transitions.extend(r.transitions.into_iter().map(|e| LtsEdge {
        src: e.src + offset,
        action: e.action,
        dst: e.dst + offset,
        rule: e.rule,
    }));
    let mut lts = Lts::from_parts(states, transitions);
    lts.truncated = l.truncated || r.truncated;
    Ok((lts, 0, offset))
}

/// All action sequences of length at most `max_len` performable from
/// `state`: the bounded, prefix-closed trace set.
pub fn bounded_traces(lts: &Lts, state: usize, max_len: usize) -> BTreeSet<Vec<Label>> {
    let mut out = BTreeSet::from([Vec::new()]);
    let mut frontier = BTreeSet::from([(Vec::new(), state)]);
    for _ in 0..max_len {
        let mut next = BTreeSet::new();
        for (trace, s) in &frontier {
            for e in lts.successors(*s) {
                let mut extended = trace.clone();
                extended.push(e.action.clone());
                out.insert(extended.clone());
                next.insert((extended, e.dst));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}
