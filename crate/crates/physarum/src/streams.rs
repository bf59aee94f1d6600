//! Rational (lasso) streams, execution fragments and their traces, and the
//! coinductive trace logic: `T`, `F`, `!`, `&`, `|`, `->` evaluated
//! pointwise along streams via initial values and derivatives.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;

use thiserror::Error;

use crate::semantics::Lts;
use crate::syntax::Label;

/// An eventually periodic sequence: a finite prefix followed by an optional
/// repeating cycle. An empty cycle denotes a finite stream. Kept in minimal
/// form: the cycle is primitive and the prefix cannot be rolled into it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalStream<T> {
    prefix: Vec<T>,
    cycle: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("the empty stream has no head or derivative")]
    EmptyStream,
    #[error("index {index} out of range for a stream of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

impl<T: Clone + Eq> RationalStream<T> {
    /// A finite stream.
    pub fn finite(elements: Vec<T>) -> RationalStream<T> {
        RationalStream {
            prefix: elements,
            cycle: Vec::new(),
        }
    }

    /// An infinite stream: `prefix` then `cycle` forever. The cycle must be
    /// nonempty; the representation is canonicalized.
    pub fn lasso(prefix: Vec<T>, cycle: Vec<T>) -> RationalStream<T> {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let mut s = RationalStream { prefix, cycle };
        s.canonicalize();
        s
    }

    /// The constant infinite stream of one element.
    pub fn constant(element: T) -> RationalStream<T> {
        RationalStream {
            prefix: Vec::new(),
            cycle: vec![element],
        }
    }

    fn canonicalize(&mut self) {
        // shrink the cycle to its primitive root
        let n = self.cycle.len();
        for d in 1..=n / 2 {
            if n % d == 0 && (d..n).all(|i| self.cycle[i] == self.cycle[i % d]) {
                self.cycle.truncate(d);
                break;
            }
        }
        // roll the prefix tail into the cycle where possible
        while let Some(last) = self.prefix.last() {
            if *last == *self.cycle.last().unwrap() {
                self.prefix.pop();
                let end = self.cycle.pop().unwrap();
                self.cycle.insert(0, end);
            } else {
                break;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.cycle.is_empty()
    }

    /// `Some(n)` for finite streams, `None` for infinite ones.
    pub fn len(&self) -> Option<usize> {
        if self.is_finite() {
            Some(self.prefix.len())
        } else {
            None
        }
    }

    pub fn prefix(&self) -> &[T] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[T] {
        &self.cycle
    }

    /// The initial value.
    pub fn head(&self) -> Result<&T, StreamError> {
        self.prefix
            .first()
            .or_else(|| self.cycle.first())
            .ok_or(StreamError::EmptyStream)
    }

    /// The stream with the initial value removed.
    pub fn derivative(&self) -> Result<RationalStream<T>, StreamError> {
        if !self.prefix.is_empty() {
            let mut s = RationalStream {
                prefix: self.prefix[1..].to_vec(),
                cycle: self.cycle.clone(),
            };
            // prefix was minimal, dropping the first element keeps it so,
            // but canonicalize anyway to preserve the invariant
            if !s.cycle.is_empty() {
                s.canonicalize();
            }
            Ok(s)
        } else if !self.cycle.is_empty() {
            let mut cycle = self.cycle.clone();
            cycle.rotate_left(1);
            Ok(RationalStream {
                prefix: Vec::new(),
                cycle,
            })
        } else {
            Err(StreamError::EmptyStream)
        }
    }

    /// `nth(s, n)` equals the head of the n-fold derivative.
    pub fn nth(&self, n: usize) -> Result<&T, StreamError> {
        if n < self.prefix.len() {
            Ok(&self.prefix[n])
        } else if !self.cycle.is_empty() {
            Ok(&self.cycle[(n - self.prefix.len()) % self.cycle.len()])
        } else {
            Err(StreamError::IndexOutOfRange {
                index: n,
                len: self.prefix.len(),
            })
        }
    }

    /// The first `n` elements (fewer for shorter finite streams).
    pub fn take(&self, n: usize) -> Vec<T> {
        (0..n).map_while(|i| self.nth(i).ok().cloned()).collect()
    }

    pub fn map<U: Clone + Eq, F: FnMut(&T) -> U>(&self, mut f: F) -> RationalStream<U> {
        let prefix = self.prefix.iter().map(&mut f).collect();
        if self.cycle.is_empty() {
            RationalStream::finite(prefix)
        } else {
            RationalStream::lasso(prefix, self.cycle.iter().map(&mut f).collect())
        }
    }

    /// Pointwise combination. Both infinite: the result's prefix is the
    /// longer of the prefixes and its cycle the lcm of the cycle lengths.
    /// A finite operand truncates the result to its length.
    pub fn zip_with<U: Clone + Eq, V: Clone + Eq>(
        &self,
        other: &RationalStream<U>,
        mut f: impl FnMut(&T, &U) -> V,
    ) -> RationalStream<V> {
        let len = match (self.len(), other.len()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        };
        match len {
            Some(n) => RationalStream::finite(
                (0..n)
                    .map(|i| f(self.nth(i).unwrap(), other.nth(i).unwrap()))
                    .collect(),
            ),
            None => {
                let prefix_len = self.prefix.len().max(other.prefix.len());
                let cycle_len = lcm(self.cycle.len(), other.cycle.len());
                let prefix = (0..prefix_len)
                    .map(|i| f(self.nth(i).unwrap(), other.nth(i).unwrap()))
                    .collect();
                let cycle = (prefix_len..prefix_len + cycle_len)
                    .map(|i| f(self.nth(i).unwrap(), other.nth(i).unwrap()))
                    .collect();
                RationalStream::lasso(prefix, cycle)
            }
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl<T: fmt::Display> fmt::Display for RationalStream<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.prefix.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
        }
        if !self.cycle.is_empty() {
            if !self.prefix.is_empty() {
                write!(f, " ")?;
            }
            write!(f, "(")?;
            for (i, e) in self.cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")*")?;
        }
        Ok(())
    }
}

/// Outcome of [`stream_equal`]: on success, the visited pairs form a
/// bisimulation witnessing the equality; on failure, the first index where
/// the streams differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamEquality<T> {
    Equal {
        witness: Vec<(RationalStream<T>, RationalStream<T>)>,
    },
    Distinct {
        mismatch_index: usize,
    },
}

impl<T> StreamEquality<T> {
    pub fn is_equal(&self) -> bool {
        matches!(self, StreamEquality::Equal { .. })
    }
}

/// Decides element-wise equality of two rational streams by synchronized
/// pair exploration with memoization. The memoized pairs are the witness
/// bisimulation: each pair has equal heads and related derivatives.
pub fn stream_equal<T: Clone + Eq + Hash + Ord>(
    s1: &RationalStream<T>,
    s2: &RationalStream<T>,
) -> StreamEquality<T> {
    let mut visited: HashSet<(RationalStream<T>, RationalStream<T>)> = HashSet::new();
    let mut a = s1.clone();
    let mut b = s2.clone();
    let mut index = 0;
    loop {
        match (a.is_empty(), b.is_empty()) {
            (true, true) => {
                return StreamEquality::Equal {
                    witness: visited.into_iter().collect(),
                }
            }
            (true, false) | (false, true) => {
                return StreamEquality::Distinct {
                    mismatch_index: index,
                }
            }
            (false, false) => {}
        }
        if a.head().unwrap() != b.head().unwrap() {
            return StreamEquality::Distinct {
                mismatch_index: index,
            };
        }
        if !visited.insert((a.clone(), b.clone())) {
            // the pair recurs: the remaining comparison repeats forever
            return StreamEquality::Equal {
                witness: visited.into_iter().collect(),
            };
        }
        a = a.derivative().unwrap();
        b = b.derivative().unwrap();
        index += 1;
    }
}

// ---------------------------------------------------------------------------
// Execution fragments and traces
// ---------------------------------------------------------------------------

/// An alternating state/action sequence `p0 a1 p1 a2 ... pn`, optionally
/// closed into a lasso by a final transition back to an earlier state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionFragment {
    pub states: Vec<usize>,
    /// `actions[i]` labels the step from `states[i]` to `states[i + 1]`.
    pub actions: Vec<Label>,
    /// `Some((k, α))`: the last state moves via α back to `states[k]`.
    pub loop_back: Option<(usize, Label)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("fragment step {0} is not a transition of the LTS")]
    NotATransition(usize),
    #[error("fragment shape invalid: {0} states, {1} actions")]
    Malformed(usize, usize),
}

impl ExecutionFragment {
    pub fn finite(states: Vec<usize>, actions: Vec<Label>) -> ExecutionFragment {
        ExecutionFragment {
            states,
            actions,
            loop_back: None,
        }
    }

    /// Checks every adjacent triple (and the loop edge) against the LTS.
    pub fn validate(&self, lts: &Lts) -> Result<(), FragmentError> {
        if self.states.is_empty() || self.actions.len() + 1 != self.states.len() {
            return Err(FragmentError::Malformed(
                self.states.len(),
                self.actions.len(),
            ));
        }
        let has = |src: usize, action: &Label, dst: usize| {
            lts.transitions
                .iter()
                .any(|e| e.src == src && e.action == *action && e.dst == dst)
        };
        for i in 0..self.actions.len() {
            if !has(self.states[i], &self.actions[i], self.states[i + 1]) {
                return Err(FragmentError::NotATransition(i));
            }
        }
        if let Some((k, action)) = &self.loop_back {
            if *k >= self.states.len()
                || !has(*self.states.last().unwrap(), action, self.states[*k])
            {
                return Err(FragmentError::NotATransition(self.actions.len()));
            }
        }
        Ok(())
    }

    /// The word of actions along the fragment.
    pub fn trace(&self) -> RationalStream<Label> {
        match &self.loop_back {
            None => RationalStream::finite(self.actions.clone()),
            Some((k, action)) => {
                let prefix = self.actions[..*k].to_vec();
                let mut cycle = self.actions[*k..].to_vec();
                cycle.push(action.clone());
                RationalStream::lasso(prefix, cycle)
            }
        }
    }

    /// The stream of states visited.
    pub fn state_stream(&self) -> RationalStream<usize> {
        match &self.loop_back {
            None => RationalStream::finite(self.states.clone()),
            Some((k, _)) => {
                RationalStream::lasso(self.states[..*k].to_vec(), self.states[*k..].to_vec())
            }
        }
    }
}

/// Shorthand for [`ExecutionFragment::trace`].
pub fn trace_of(fragment: &ExecutionFragment) -> RationalStream<Label> {
    fragment.trace()
}

/// All maximal execution-fragment state-streams from a state. Fragments end
/// at a deadlock or close into a lasso at the first repeated state on the
/// path. `bound` caps the number of distinct streams; hitting it sets the
/// truncated flag.
pub fn state_streams(
    lts: &Lts,
    state: usize,
    bound: usize,
) -> (Vec<RationalStream<usize>>, bool) {
    let mut out: Vec<RationalStream<usize>> = Vec::new();
    let mut truncated = false;
    let mut path: Vec<usize> = Vec::new();
    walk(lts, state, bound, &mut path, &mut out, &mut truncated);
    out.sort();
    out.dedup();
    (out, truncated)
}

fn walk(
    lts: &Lts,
    state: usize,
    bound: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<RationalStream<usize>>,
    truncated: &mut bool,
) {
    if out.len() >= bound {
        *truncated = true;
        return;
    }
    path.push(state);
    let successors: std::collections::BTreeSet<usize> =
        lts.successors(state).map(|e| e.dst).collect();
    if successors.is_empty() {
        out.push(RationalStream::finite(path.clone()));
    }
    for dst in successors {
        if out.len() >= bound {
            *truncated = true;
            break;
        }
        if let Some(k) = path.iter().position(|&s| s == dst) {
            out.push(RationalStream::lasso(
                path[..k].to_vec(),
                path[k..].to_vec(),
            ));
        } else {
            walk(lts, dst, bound, path, out, truncated);
        }
    }
    path.pop();
}

// ---------------------------------------------------------------------------
// The trace logic
// ---------------------------------------------------------------------------

/// A formula of the coinductive trace logic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// A stream variable, doubling as the atomic proposition applied to it.
    Var(String),
    Top,
    Bottom,
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: &str) -> Formula {
        Formula::Var(name.to_string())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut names = Vec::new();
        self.collect_vars(&mut names);
        names.sort_unstable();
        names.dedup();
        names
    }

    fn collect_vars<'a>(&'a self, names: &mut Vec<&'a str>) {
        match self {
            Formula::Var(n) => names.push(n),
            Formula::Top | Formula::Bottom => {}
            Formula::Not(f) => f.collect_vars(names),
            Formula::Or(l, r) | Formula::And(l, r) | Formula::Implies(l, r) => {
                l.collect_vars(names);
                r.collect_vars(names);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: ! > & > | > ->
        fn go(f: &mut fmt::Formatter<'_>, phi: &Formula, min: u8) -> fmt::Result {
            let lvl = match phi {
                Formula::Implies(..) => 0,
                Formula::Or(..) => 1,
                Formula::And(..) => 2,
                _ => 3,
            };
            if lvl < min {
                write!(f, "(")?;
                go(f, phi, 0)?;
                return write!(f, ")");
            }
            match phi {
                Formula::Var(n) => write!(f, "{n}"),
                Formula::Top => write!(f, "T"),
                Formula::Bottom => write!(f, "F"),
                Formula::Not(p) => {
                    write!(f, "!")?;
                    go(f, p, 3)
                }
                Formula::And(l, r) => {
                    go(f, l, 2)?;
                    write!(f, " & ")?;
                    go(f, r, 3)
                }
                Formula::Or(l, r) => {
                    go(f, l, 1)?;
                    write!(f, " | ")?;
                    go(f, r, 2)
                }
                Formula::Implies(l, r) => {
                    go(f, l, 1)?;
                    write!(f, " -> ")?;
                    go(f, r, 0)
                }
            }
        }
        go(f, self, 0)
    }
}

/// Truth assignments for atomic propositions at states.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    map: BTreeMap<(String, usize), bool>,
}

impl Valuation {
    pub fn new() -> Valuation {
        Valuation::default()
    }

    pub fn from_map(map: BTreeMap<(String, usize), bool>) -> Valuation {
        Valuation { map }
    }

    pub fn set(&mut self, prop: &str, state: usize, value: bool) {
        self.map.insert((prop.to_string(), state), value);
    }

    pub fn get(&self, prop: &str, state: usize) -> Option<bool> {
        self.map.get(&(prop.to_string(), state)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound formula variable `{0}`")]
    UnboundVariable(String),
    #[error("valuation does not cover proposition `{prop}` at state {state}")]
    PartialValuation { prop: String, state: usize },
}

/// Evaluates a formula to a rational truth stream. A variable denotes a
/// state stream from `env`, mapped pointwise through the valuation under
/// the variable's own name as atomic proposition; the connectives act
/// pointwise, matching their initial-value and derivative equations.
pub fn eval_formula(
    formula: &Formula,
    env: &BTreeMap<String, RationalStream<usize>>,
    valuation: &Valuation,
) -> Result<RationalStream<bool>, EvalError> {
    match formula {
        Formula::Var(name) => {
            let stream = env
                .get(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
            let mut missing = None;
            let mapped = stream.map(|&state| match valuation.get(name, state) {
                Some(v) => v,
                None => {
                    missing.get_or_insert(state);
                    false
                }
            });
            match missing {
                Some(state) => Err(EvalError::PartialValuation {
                    prop: name.clone(),
                    state,
                }),
                None => Ok(mapped),
            }
        }
        Formula::Top => Ok(RationalStream::constant(true)),
        Formula::Bottom => Ok(RationalStream::constant(false)),
        Formula::Not(p) => Ok(eval_formula(p, env, valuation)?.map(|v| !v)),
        Formula::Or(l, r) => Ok(eval_formula(l, env, valuation)?
            .zip_with(&eval_formula(r, env, valuation)?, |a, b| *a || *b)),
        Formula::And(l, r) => Ok(eval_formula(l, env, valuation)?
            .zip_with(&eval_formula(r, env, valuation)?, |a, b| *a && *b)),
        Formula::Implies(l, r) => Ok(eval_formula(l, env, valuation)?
            .zip_with(&eval_formula(r, env, valuation)?, |a, b| !*a || *b)),
    }
}

// ---------------------------------------------------------------------------
// Formula parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula parse error at column {column}: {message}")]
pub struct FormulaParseError {
    pub column: usize,
    pub message: String,
}

/// Parses `T`, `F`, `!φ`, `φ & ψ`, `φ | ψ`, `φ -> ψ` and identifiers;
/// precedence `!` > `&` > `|` > `->`, with `->` right-associative.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '!' => {
                toks.push((FTok::Not, col));
                i += 1;
            }
            '&' => {
                toks.push((FTok::And, col));
                i += 1;
            }
            '|' => {
                toks.push((FTok::Or, col));
                i += 1;
            }
            '(' => {
                toks.push((FTok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((FTok::RParen, col));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    toks.push((FTok::Implies, col));
                    i += 2;
                } else {
                    return Err(FormulaParseError {
                        column: col,
                        message: "expected `->`".to_string(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "T" => FTok::Top,
                    "F" => FTok::Bottom,
                    _ => FTok::Ident(word),
                };
                toks.push((tok, col));
            }
            other => {
                return Err(FormulaParseError {
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    toks.push((FTok::Eof, chars.len() + 1));
    let mut p = FParser { toks, pos: 0 };
    let phi = p.implies()?;
    p.expect_eof()?;
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum FTok {
    Ident(String),
    Top,
    Bottom,
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    Eof,
}

struct FParser {
    toks: Vec<(FTok, usize)>,
    pos: usize,
}

impl FParser {
    fn peek(&self) -> &FTok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> FTok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: &str) -> FormulaParseError {
        FormulaParseError {
            column: self.toks[self.pos].1,
            message: message.to_string(),
        }
    }

    fn expect_eof(&self) -> Result<(), FormulaParseError> {
        if *self.peek() == FTok::Eof {
            Ok(())
        } else {
            Err(self.err("expected end of formula"))
        }
    }

    fn implies(&mut self) -> Result<Formula, FormulaParseError> {
        let lhs = self.or()?;
        if *self.peek() == FTok::Implies {
            self.bump();
            let rhs = self.implies()?; // right associative
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, FormulaParseError> {
        let mut acc = self.and()?;
        while *self.peek() == FTok::Or {
            self.bump();
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, FormulaParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == FTok::And {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, FormulaParseError> {
        match self.bump() {
            FTok::Not => Ok(Formula::not(self.unary()?)),
            FTok::Top => Ok(Formula::Top),
            FTok::Bottom => Ok(Formula::Bottom),
            FTok::Ident(name) => Ok(Formula::Var(name)),
            FTok::LParen => {
                let phi = self.implies()?;
                match self.bump() {
                    FTok::RParen => Ok(phi),
                    _ => Err(self.err("expected `)`")),
                }
            }
            _ => Err(self.err("expected a formula")),
        }
    }
}
