//! Labels, process terms, the concrete grammar and the canonical printer.
//!
//! Concrete syntax: `0` for inaction, `.` for prefix, `~a` for the inhibitor
//! complementing the activator `a`, `tau` for the internal action,
//! `A(a).P` / `R(a).P` / `C(a)` for attraction, repelling and diffusion,
//! `P \ {a, b}` for hiding, and uppercase identifiers for constants.
//! Precedence, tightest first: prefix `.`, hiding `\`, cooperation `|`,
//! fusion `&`, choice `+`; binary operators associate to the left.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::environment::Environment;

/// Whether a named action is an activator (`a`) or an inhibitor (`~a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Activator,
    Inhibitor,
}

/// An action label: a named action with a polarity, or the internal action τ.
///
/// An activator and its inhibitor are complements of each other; τ has no
/// complement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Tau,
    Named { name: String, polarity: Polarity },
}

impl Label {
    pub fn activator(name: &str) -> Label {
        Label::Named {
            name: name.to_string(),
            polarity: Polarity::Activator,
        }
    }

    pub fn inhibitor(name: &str) -> Label {
        Label::Named {
            name: name.to_string(),
            polarity: Polarity::Inhibitor,
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Label::Tau => None,
            Label::Named { name, .. } => Some(name),
        }
    }

    /// The complementary label, flipping activator and inhibitor.
    /// τ has no complement.
    pub fn complement(&self) -> Option<Label> {
        match self {
            Label::Tau => None,
            Label::Named { name, polarity } => Some(Label::Named {
                name: name.clone(),
                polarity: match polarity {
                    Polarity::Activator => Polarity::Inhibitor,
                    Polarity::Inhibitor => Polarity::Activator,
                },
            }),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => write!(f, "tau"),
            Label::Named { name, polarity } => match polarity {
                Polarity::Activator => write!(f, "{name}"),
                Polarity::Inhibitor => write!(f, "~{name}"),
            },
        }
    }
}

/// A finite set of named labels. Never contains τ.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet {
    members: BTreeSet<Label>,
}

impl LabelSet {
    pub fn new() -> LabelSet {
        LabelSet::default()
    }

    /// Builds a set from named labels. τ members are rejected.
    pub fn from_labels<I: IntoIterator<Item = Label>>(labels: I) -> Result<LabelSet, TauInSet> {
        let mut members = BTreeSet::new();
        for l in labels {
            if l.is_tau() {
                return Err(TauInSet);
            }
            members.insert(l);
        }
        Ok(LabelSet { members })
    }

    pub fn insert(&mut self, label: Label) -> Result<(), TauInSet> {
        if label.is_tau() {
            return Err(TauInSet);
        }
        self.members.insert(label);
        Ok(())
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.members.contains(label)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.members.iter()
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        LabelSet {
            members: self.members.union(&other.members).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &LabelSet) -> LabelSet {
        LabelSet {
            members: self.members.intersection(&other.members).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &LabelSet) -> LabelSet {
        LabelSet {
            members: self.members.difference(&other.members).cloned().collect(),
        }
    }

    /// Complement relative to a declared universe.
    pub fn complement_within(&self, universe: &LabelSet) -> LabelSet {
        universe.difference(self)
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.members.is_subset(&other.members)
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("tau cannot be a member of a label set")]
pub struct TauInSet;

/// A process term of the calculus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessTerm {
    /// `0`, the deadlocked process.
    Nil,
    /// `a.P` — engage in the label, then behave like the body.
    Prefix(Label, Box<ProcessTerm>),
    /// `A(a).P` — attraction prefix; fires only when the scene maps `a`.
    Attract(Label, Box<ProcessTerm>),
    /// `R(a).P` — repelling prefix; fires only when the scene maps `a`.
    Repel(Label, Box<ProcessTerm>),
    /// `C(a)` — diffusion; behaves as the bound protoplasmic-tube term.
    Diffuse(Label),
    /// `P | Q` — cooperation: interleaving plus τ-synchronization.
    Coop(Box<ProcessTerm>, Box<ProcessTerm>),
    /// `P \ {a, b}` — hiding: the listed actions are forbidden.
    Hide(Box<ProcessTerm>, LabelSet),
    /// `P & Q` — fusion of two active zones.
    Fuse(Box<ProcessTerm>, Box<ProcessTerm>),
    /// `P + Q` — choice between two behaviours.
    Choice(Box<ProcessTerm>, Box<ProcessTerm>),
    /// A named constant defined by an equation `NAME := P`.
    Const(String),
}

impl ProcessTerm {
    pub fn prefix(label: Label, body: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Prefix(label, Box::new(body))
    }

    pub fn attract(label: Label, body: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Attract(label, Box::new(body))
    }

    pub fn repel(label: Label, body: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Repel(label, Box::new(body))
    }

    pub fn coop(left: ProcessTerm, right: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Coop(Box::new(left), Box::new(right))
    }

    pub fn hide(body: ProcessTerm, hidden: LabelSet) -> ProcessTerm {
        ProcessTerm::Hide(Box::new(body), hidden)
    }

    pub fn fuse(left: ProcessTerm, right: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Fuse(Box::new(left), Box::new(right))
    }

    pub fn choice(left: ProcessTerm, right: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Choice(Box::new(left), Box::new(right))
    }

    pub fn constant(name: &str) -> ProcessTerm {
        ProcessTerm::Const(name.to_string())
    }

    pub fn depth(&self) -> usize {
        match self {
            ProcessTerm::Nil | ProcessTerm::Diffuse(_) | ProcessTerm::Const(_) => 1,
            ProcessTerm::Prefix(_, p) | ProcessTerm::Attract(_, p) | ProcessTerm::Repel(_, p) => {
                1 + p.depth()
            }
            ProcessTerm::Hide(p, _) => 1 + p.depth(),
            ProcessTerm::Coop(l, r) | ProcessTerm::Fuse(l, r) | ProcessTerm::Choice(l, r) => {
                1 + l.depth().max(r.depth())
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            ProcessTerm::Nil | ProcessTerm::Diffuse(_) | ProcessTerm::Const(_) => 1,
            ProcessTerm::Prefix(_, p) | ProcessTerm::Attract(_, p) | ProcessTerm::Repel(_, p) => {
                1 + p.node_count()
            }
            ProcessTerm::Hide(p, _) => 1 + p.node_count(),
            ProcessTerm::Coop(l, r) | ProcessTerm::Fuse(l, r) | ProcessTerm::Choice(l, r) => {
                1 + l.node_count() + r.node_count()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unresolved constant `{0}`")]
pub struct UnresolvedConstant(pub String);

/// Flips every label's polarity throughout a constant-free term.
///
/// Hidden sets stay fixed: they are interface restrictions, not behaviour.
/// τ labels are left alone. An involution on constant-free terms.
pub fn complement_term(term: &ProcessTerm) -> Result<ProcessTerm, UnresolvedConstant> {
    let flip = |l: &Label| l.complement().unwrap_or(Label::Tau);
    Ok(match term {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Prefix(l, p) => ProcessTerm::prefix(flip(l), complement_term(p)?),
        ProcessTerm::Attract(l, p) => ProcessTerm::attract(flip(l), complement_term(p)?),
        ProcessTerm::Repel(l, p) => ProcessTerm::repel(flip(l), complement_term(p)?),
        ProcessTerm::Diffuse(l) => ProcessTerm::Diffuse(flip(l)),
        ProcessTerm::Coop(l, r) => ProcessTerm::coop(complement_term(l)?, complement_term(r)?),
        ProcessTerm::Hide(p, hidden) => ProcessTerm::hide(complement_term(p)?, hidden.clone()),
        ProcessTerm::Fuse(l, r) => ProcessTerm::fuse(complement_term(l)?, complement_term(r)?),
        ProcessTerm::Choice(l, r) => ProcessTerm::choice(complement_term(l)?, complement_term(r)?),
        ProcessTerm::Const(name) => return Err(UnresolvedConstant(name.clone())),
    })
}

/// The set of named labels syntactically occurring in a term, unfolding each
/// constant at most once per name so that recursive definitions terminate.
pub fn sort(term: &ProcessTerm, env: &Environment) -> Result<LabelSet, UnresolvedConstant> {
    let mut acc = LabelSet::new();
    let mut unfolded = BTreeSet::new();
    sort_into(term, env, &mut acc, &mut unfolded)?;
    Ok(acc)
}

fn sort_into(
    term: &ProcessTerm,
    env: &Environment,
    acc: &mut LabelSet,
    unfolded: &mut BTreeSet<String>,
) -> Result<(), UnresolvedConstant> {
    let add = |l: &Label, acc: &mut LabelSet| {
        if !l.is_tau() {
            // named labels only, so insertion cannot fail
            acc.insert(l.clone()).expect("named label");
        }
    };
    match term {
        ProcessTerm::Nil => {}
        ProcessTerm::Prefix(l, p) | ProcessTerm::Attract(l, p) | ProcessTerm::Repel(l, p) => {
            add(l, acc);
            sort_into(p, env, acc, unfolded)?;
        }
        ProcessTerm::Diffuse(l) => add(l, acc),
        ProcessTerm::Hide(p, hidden) => {
            for l in hidden.iter() {
                add(l, acc);
            }
            sort_into(p, env, acc, unfolded)?;
        }
        ProcessTerm::Coop(l, r) | ProcessTerm::Fuse(l, r) | ProcessTerm::Choice(l, r) => {
            sort_into(l, env, acc, unfolded)?;
            sort_into(r, env, acc, unfolded)?;
        }
        ProcessTerm::Const(name) => {
            if unfolded.insert(name.clone()) {
                let body = env
                    .resolve_constant(name)
                    .map_err(|_| UnresolvedConstant(name.clone()))?;
                sort_into(&body, env, acc, unfolded)?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Canonical printing
// ---------------------------------------------------------------------------

// Precedence levels, loosest first. A subterm is parenthesized when its own
// level is below the level its position requires.
const LVL_CHOICE: u8 = 0;
const LVL_FUSE: u8 = 1;
const LVL_COOP: u8 = 2;
const LVL_HIDE: u8 = 3;
const LVL_PREFIX: u8 = 4;
const LVL_ATOM: u8 = 5;

fn level(term: &ProcessTerm) -> u8 {
    match term {
        ProcessTerm::Choice(..) => LVL_CHOICE,
        ProcessTerm::Fuse(..) => LVL_FUSE,
        ProcessTerm::Coop(..) => LVL_COOP,
        ProcessTerm::Hide(..) => LVL_HIDE,
        ProcessTerm::Prefix(..) | ProcessTerm::Attract(..) | ProcessTerm::Repel(..) => LVL_PREFIX,
        ProcessTerm::Nil | ProcessTerm::Diffuse(_) | ProcessTerm::Const(_) => LVL_ATOM,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, term: &ProcessTerm, min: u8) -> fmt::Result {
    let lvl = level(term);
    if lvl < min {
        write!(f, "(")?;
        write_term(f, term, 0)?;
        return write!(f, ")");
    }
    match term {
        ProcessTerm::Nil => write!(f, "0"),
        ProcessTerm::Const(name) => write!(f, "{name}"),
        ProcessTerm::Diffuse(l) => write!(f, "C({l})"),
        ProcessTerm::Prefix(l, p) => {
            write!(f, "{l}.")?;
            write_term(f, p, LVL_PREFIX)
        }
        ProcessTerm::Attract(l, p) => {
            write!(f, "A({l}).")?;
            write_term(f, p, LVL_PREFIX)
        }
        ProcessTerm::Repel(l, p) => {
            write!(f, "R({l}).")?;
            write_term(f, p, LVL_PREFIX)
        }
        ProcessTerm::Hide(p, hidden) => {
            write_term(f, p, LVL_HIDE)?;
            write!(f, " \\ {hidden}")
        }
        ProcessTerm::Coop(l, r) => {
            write_term(f, l, LVL_COOP)?;
            write!(f, " | ")?;
            write_term(f, r, LVL_COOP + 1)
        }
        ProcessTerm::Fuse(l, r) => {
            write_term(f, l, LVL_FUSE)?;
            write!(f, " & ")?;
            write_term(f, r, LVL_FUSE + 1)
        }
        ProcessTerm::Choice(l, r) => {
            write_term(f, l, LVL_CHOICE)?;
            write!(f, " + ")?;
            write_term(f, r, LVL_CHOICE + 1)
        }
    }
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

/// Canonical text for a term; `parse(format(t))` is structurally identical
/// to `t`.
pub fn format(term: &ProcessTerm) -> String {
    term.to_string()
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{column}: expected {}, found `{found}`", expected.join(" or "))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Zero,
    Ident(String),   // lowercase-initial: a label name
    UpIdent(String), // uppercase-initial: constant, or A/R/C when applied
    Tau,
    Tilde,
    Dot,
    Backslash,
    Pipe,
    Amp,
    Plus,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Zero => write!(f, "0"),
            Tok::Ident(s) | Tok::UpIdent(s) => write!(f, "{s}"),
            Tok::Tau => write!(f, "tau"),
            Tok::Tilde => write!(f, "~"),
            Tok::Dot => write!(f, "."),
            Tok::Backslash => write!(f, "\\"),
            Tok::Pipe => write!(f, "|"),
            Tok::Amp => write!(f, "&"),
            Tok::Plus => write!(f, "+"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::Comma => write!(f, ","),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '0' => {
                bump(&mut chars);
                toks.push((Tok::Zero, tl, tc));
            }
            '~' => {
                bump(&mut chars);
                toks.push((Tok::Tilde, tl, tc));
            }
            '.' => {
                bump(&mut chars);
                toks.push((Tok::Dot, tl, tc));
            }
            '\\' => {
                bump(&mut chars);
                toks.push((Tok::Backslash, tl, tc));
            }
            '|' => {
                bump(&mut chars);
                toks.push((Tok::Pipe, tl, tc));
            }
            '&' => {
                bump(&mut chars);
                toks.push((Tok::Amp, tl, tc));
            }
            '+' => {
                bump(&mut chars);
                toks.push((Tok::Plus, tl, tc));
            }
            '(' => {
                bump(&mut chars);
                toks.push((Tok::LParen, tl, tc));
            }
            ')' => {
                bump(&mut chars);
                toks.push((Tok::RParen, tl, tc));
            }
            '{' => {
                bump(&mut chars);
                toks.push((Tok::LBrace, tl, tc));
            }
            '}' => {
                bump(&mut chars);
                toks.push((Tok::RBrace, tl, tc));
            }
            ',' => {
                bump(&mut chars);
                toks.push((Tok::Comma, tl, tc));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' || c2 == '\'' {
                        ident.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let tok = if ident == "tau" {
                    Tok::Tau
                } else if ident.chars().next().unwrap().is_ascii_uppercase() {
                    Tok::UpIdent(ident)
                } else {
                    Tok::Ident(ident)
                };
                toks.push((tok, tl, tc));
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    column: tc,
                    expected: vec!["a term".to_string()],
                    found: other.to_string(),
                })
            }
        }
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, line, column) = &self.toks[self.pos];
        ParseError {
            line: *line,
            column: *column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }
}

/// Parses a single process term.
pub fn parse(text: &str) -> Result<ProcessTerm, ParseError> {
    let mut lx = lex(text)?;
    let term = parse_choice(&mut lx)?;
    lx.expect(Tok::Eof, "end of input")?;
    Ok(term)
}

fn parse_choice(lx: &mut Lexer) -> Result<ProcessTerm, ParseError> {
    let mut acc = parse_fusion(lx)?;
    while *lx.peek() == Tok::Plus {
        lx.next();
        let rhs = parse_fusion(lx)?;
        acc = ProcessTerm::choice(acc, rhs);
    }
    Ok(acc)
}

fn parse_fusion(lx: &mut Lexer) -> Result<ProcessTerm, ParseError> {
    let mut acc = parse_coop(lx)?;
    while *lx.peek() == Tok::Amp {
        lx.next();
        let rhs = parse_coop(lx)?;
        acc = ProcessTerm::fuse(acc, rhs);
    }
    Ok(acc)
}

fn parse_coop(lx: &mut Lexer) -> Result<ProcessTerm, ParseError> {
    let mut acc = parse_hiding(lx)?;
    while *lx.peek() == Tok::Pipe {
        lx.next();
        let rhs = parse_hiding(lx)?;
        acc = ProcessTerm::coop(acc, rhs);
    }
    Ok(acc)
}

fn parse_hiding(lx: &mut Lexer) -> Result<ProcessTerm, ParseError> {
    let mut acc = parse_prefix(lx)?;
    while *lx.peek() == Tok::Backslash {
        lx.next();
        let set = parse_label_set(lx)?;
        acc = ProcessTerm::hide(acc, set);
    }
    Ok(acc)
}

fn parse_prefix(lx: &mut Lexer) -> Result<ProcessTerm, ParseError> {
    match lx.peek().clone() {
        Tok::Tilde | Tok::Tau => {
            let label = parse_label(lx)?;
            lx.expect(Tok::Dot, "`.`")?;
            let body = parse_prefix(lx)?;
            Ok(ProcessTerm::prefix(label, body))
        }
        Tok::Ident(_) => {
            let label = parse_label(lx)?;
            lx.expect(Tok::Dot, "`.`")?;
            let body = parse_prefix(lx)?;
            Ok(ProcessTerm::prefix(label, body))
        }
        Tok::UpIdent(name) if (name == "A" || name == "R") && *lx.peek2() == Tok::LParen => {
            lx.next();
            lx.expect(Tok::LParen, "`(`")?;
            let label = parse_label(lx)?;
            lx.expect(Tok::RParen, "`)`")?;
            lx.expect(Tok::Dot, "`.`")?;
            let body = parse_prefix(lx)?;
            Ok(if name == "A" {
                ProcessTerm::attract(label, body)
            } else {
                ProcessTerm::repel(label, body)
            })
        }
        _ => parse_atom(lx),
    }
}

fn parse_atom(lx: &mut Lexer) -> Result<ProcessTerm, ParseError> {
    match lx.peek().clone() {
        Tok::Zero => {
            lx.next();
            Ok(ProcessTerm::Nil)
        }
        Tok::UpIdent(name) if name == "C" && *lx.peek2() == Tok::LParen => {
            lx.next();
            lx.expect(Tok::LParen, "`(`")?;
            let label = parse_label(lx)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(ProcessTerm::Diffuse(label))
        }
        Tok::UpIdent(name) => {
            lx.next();
            Ok(ProcessTerm::Const(name))
        }
        Tok::LParen => {
            lx.next();
            let term = parse_choice(lx)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(term)
        }
        _ => Err(lx.error(&["`0`", "a label", "a constant", "`(`"])),
    }
}

fn parse_label(lx: &mut Lexer) -> Result<Label, ParseError> {
    match lx.peek().clone() {
        Tok::Tau => {
            lx.next();
            Ok(Label::Tau)
        }
        Tok::Tilde => {
            lx.next();
            match lx.peek().clone() {
                Tok::Ident(name) => {
                    lx.next();
                    Ok(Label::inhibitor(&name))
                }
                _ => Err(lx.error(&["a label name"])),
            }
        }
        Tok::Ident(name) => {
            lx.next();
            Ok(Label::activator(&name))
        }
        _ => Err(lx.error(&["a label"])),
    }
}

fn parse_label_set(lx: &mut Lexer) -> Result<LabelSet, ParseError> {
    lx.expect(Tok::LBrace, "`{`")?;
    let mut set = LabelSet::new();
    if *lx.peek() != Tok::RBrace {
        loop {
            let err = lx.error(&["a named label"]);
            let label = parse_label(lx)?;
            set.insert(label).map_err(|_| err)?;
            if *lx.peek() == Tok::Comma {
                lx.next();
            } else {
                break;
            }
        }
    }
    lx.expect(Tok::RBrace, "`}`")?;
    Ok(set)
}

/// A parsed term file: named definitions plus the final bare root term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermFile {
    pub definitions: Vec<(String, ProcessTerm)>,
    pub root: ProcessTerm,
}

/// Parses a `.phy` term file: one `NAME := term` definition per line, one
/// final bare term (the root), `#` comments.
pub fn parse_term_file(text: &str) -> Result<TermFile, ParseError> {
    let mut definitions = Vec::new();
    let mut root = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let at_line = |mut e: ParseError| {
            e.line = line_no;
            e
        };
        if let Some((name, body)) = line.split_once(":=") {
            let name = name.trim();
            if name.is_empty() || !name.chars().next().unwrap().is_ascii_uppercase() {
                return Err(ParseError {
                    line: line_no,
                    column: 1,
                    expected: vec!["an uppercase constant name".to_string()],
                    found: name.to_string(),
                });
            }
            let term = parse(body).map_err(at_line)?;
            definitions.push((name.to_string(), term));
        } else {
            if root.is_some() {
                return Err(ParseError {
                    line: line_no,
                    column: 1,
                    expected: vec!["a single root term".to_string()],
                    found: line.trim().to_string(),
                });
            }
            root = Some(parse(line).map_err(at_line)?);
        }
    }
    let root = root.ok_or(ParseError {
        line: text.lines().count() + 1,
        column: 1,
        expected: vec!["a root term".to_string()],
        found: "end of file".to_string(),
    })?;
    Ok(TermFile { definitions, root })
}
