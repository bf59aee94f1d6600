//! Scenes: the declared alphabet, attractant/repellent tables, diffusion
//! bindings, constant definitions and exploration bounds.
//!
//! Scene files are line oriented:
//!
//! ```text
//! universe a b c
//! A: a -> b
//! R: b -> ~c
//! C: a := b.0
//! X := a.X
//! prop alive 0 T
//! bound states 500
//! bound depth 50
//! ```

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::semantics::Bounds;
use crate::syntax::{self, Label, LabelSet, ProcessTerm, UnresolvedConstant};

/// The scene a term runs in. An immutable value: operations that change it
/// return a new environment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    pub universe: LabelSet,
    attract: BTreeMap<Label, Label>,
    repel: BTreeMap<Label, Label>,
    diffusion: BTreeMap<Label, ProcessTerm>,
    constants: BTreeMap<String, ProcessTerm>,
    /// Atomic proposition assignments for the trace logic, per state id.
    pub props: BTreeMap<(String, usize), bool>,
    pub bounds: Bounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("scene error at line {line}: {message}")]
pub struct SceneError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("diffusion label `{label}` already bound to `{existing}`, refusing `{attempted}`")]
pub struct DiffusionConflict {
    pub label: Label,
    pub existing: String,
    pub attempted: String,
}

impl Environment {
    pub fn new() -> Environment {
        Environment::default()
    }

    /// Looks up the attractant table; `None` means the Attract prefix is
    /// stuck and the corresponding SOS rule does not fire.
    pub fn lookup_attract(&self, label: &Label) -> Option<&Label> {
        self.attract.get(label)
    }

    pub fn lookup_repel(&self, label: &Label) -> Option<&Label> {
        self.repel.get(label)
    }

    pub fn lookup_diffusion(&self, label: &Label) -> Option<&ProcessTerm> {
        self.diffusion.get(label)
    }

    pub fn resolve_constant(&self, name: &str) -> Result<ProcessTerm, UnresolvedConstant> {
        self.constants
            .get(name)
            .cloned()
            .ok_or_else(|| UnresolvedConstant(name.to_string()))
    }

    pub fn constants(&self) -> impl Iterator<Item = (&String, &ProcessTerm)> {
        self.constants.iter()
    }

    pub fn define_constant(&mut self, name: &str, body: ProcessTerm) {
        self.constants.insert(name.to_string(), body);
    }

    /// Returns an environment in which `C(label)` resolves to `term`.
    /// Rebinding with the identical term is idempotent; a different term is
    /// a conflict.
    pub fn bind_diffusion(
        &self,
        label: Label,
        term: ProcessTerm,
    ) -> Result<Environment, DiffusionConflict> {
        if let Some(existing) = self.diffusion.get(&label) {
            if *existing != term {
                return Err(DiffusionConflict {
                    label,
                    existing: existing.to_string(),
                    attempted: term.to_string(),
                });
            }
            return Ok(self.clone());
        }
        let mut next = self.clone();
        next.diffusion.insert(label, term);
        Ok(next)
    }

    /// Parses a `.scene` file. Fails atomically: either every line is valid
    /// and all invariants hold, or the first offending line is reported.
    pub fn load_scene(text: &str) -> Result<Environment, SceneError> {
        let mut env = Environment::new();
        let mut pending: Vec<(usize, Directive)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let directive = parse_directive(line).map_err(|message| SceneError {
                line: line_no,
                message,
            })?;
            pending.push((line_no, directive));
        }
        // universe first, so that table rows can be validated against it
        for (line_no, d) in &pending {
            if let Directive::Universe(names) = d {
                for name in names {
                    env.universe
                        .insert(Label::activator(name))
                        .map_err(|e| SceneError {
                            line: *line_no,
                            message: e.to_string(),
                        })?;
                }
            }
        }
        for (line_no, d) in pending {
            let fail = |message: String| SceneError {
                line: line_no,
                message,
            };
            match d {
                Directive::Universe(_) => {}
                Directive::Attract(from, to) => {
                    env.check_in_universe(&from).map_err(fail)?;
                    env.check_in_universe(&to).map_err(fail)?;
                    env.attract.insert(from, to);
                }
                Directive::Repel(from, to) => {
                    env.check_in_universe(&from).map_err(fail)?;
                    env.check_in_universe(&to).map_err(fail)?;
                    env.repel.insert(from, to);
                }
                Directive::Diffusion(label, term) => {
                    env = env.bind_diffusion(label, term).map_err(|e| SceneError {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                }
                Directive::Constant(name, term) => {
                    env.constants.insert(name, term);
                }
                Directive::Prop(name, state, value) => {
                    env.props.insert((name, state), value);
                }
                Directive::BoundStates(n) => env.bounds.max_states = n,
                Directive::BoundDepth(n) => env.bounds.max_depth = n,
            }
        }
        // every constant body must reference only declared constants
        for (name, body) in &env.constants {
            if let Some(missing) = first_undefined_constant(body, &env.constants) {
                return Err(SceneError {
                    line: 0,
                    message: format!(
                        "constant `{name}` references undefined constant `{missing}`"
                    ),
                });
            }
        }
        Ok(env)
    }

    fn check_in_universe(&self, label: &Label) -> Result<(), String> {
        let base = match label {
            Label::Tau => return Err("tau cannot appear in an A/R table".to_string()),
            Label::Named { name, .. } => Label::activator(name),
        };
        if self.universe.contains(&base) {
            Ok(())
        } else {
            Err(format!("label `{label}` is not declared in the universe"))
        }
    }

    /// Serializes the environment back to scene-file text; loading the
    /// result reproduces the environment.
    pub fn to_scene_text(&self) -> String {
        let mut out = String::new();
        if !self.universe.is_empty() {
            out.push_str("universe");
            for l in self.universe.iter() {
                out.push_str(&format!(" {l}"));
            }
            out.push('\n');
        }
        for (from, to) in &self.attract {
            out.push_str(&format!("A: {from} -> {to}\n"));
        }
        for (from, to) in &self.repel {
            out.push_str(&format!("R: {from} -> {to}\n"));
        }
        for (label, term) in &self.diffusion {
            out.push_str(&format!("C: {label} := {term}\n"));
        }
        for (name, term) in &self.constants {
            out.push_str(&format!("{name} := {term}\n"));
        }
        for ((name, state), value) in &self.props {
            out.push_str(&format!(
                "prop {name} {state} {}\n",
                if *value { "T" } else { "F" }
            ));
        }
        if self.bounds.max_states != Bounds::default().max_states {
            out.push_str(&format!("bound states {}\n", self.bounds.max_states));
        }
        if self.bounds.max_depth != Bounds::default().max_depth {
            out.push_str(&format!("bound depth {}\n", self.bounds.max_depth));
        }
        out
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scene_text())
    }
}

enum Directive {
    Universe(Vec<String>),
    Attract(Label, Label),
    Repel(Label, Label),
    Diffusion(Label, ProcessTerm),
    Constant(String, ProcessTerm),
    Prop(String, usize, bool),
    BoundStates(usize),
    BoundDepth(usize),
}

fn parse_label_text(text: &str) -> Result<Label, String> {
    let text = text.trim();
    if text == "tau" {
        return Ok(Label::Tau);
    }
    let (name, polarity) = match text.strip_prefix('~') {
        Some(rest) => (rest, syntax::Polarity::Inhibitor),
        None => (text, syntax::Polarity::Activator),
    };
    if name.is_empty()
        || !name.chars().next().unwrap().is_ascii_lowercase()
        || !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
    {
        return Err(format!("`{text}` is not a label"));
    }
    Ok(Label::Named {
        name: name.to_string(),
        polarity,
    })
}

fn parse_arrow(rest: &str) -> Result<(Label, Label), String> {
    let (from, to) = rest
        .split_once("->")
        .ok_or_else(|| format!("expected `<label> -> <label>`, found `{rest}`"))?;
    Ok((parse_label_text(from)?, parse_label_text(to)?))
}

fn parse_directive(line: &str) -> Result<Directive, String> {
    if let Some(rest) = line.strip_prefix("universe") {
        if !rest.starts_with(char::is_whitespace) && !rest.is_empty() {
            return Err(format!("unknown directive `{line}`"));
        }
        let names: Vec<String> = rest.split_whitespace().map(|s| s.to_string()).collect();
        if names.is_empty() {
            return Err("empty universe declaration".to_string());
        }
        for n in &names {
            parse_label_text(n)?;
            if n.starts_with('~') {
                return Err("universe declares activator names only".to_string());
            }
        }
        return Ok(Directive::Universe(names));
    }
    if let Some(rest) = line.strip_prefix("A:") {
        let (from, to) = parse_arrow(rest)?;
        return Ok(Directive::Attract(from, to));
    }
    if let Some(rest) = line.strip_prefix("R:") {
        let (from, to) = parse_arrow(rest)?;
        return Ok(Directive::Repel(from, to));
    }
    if let Some(rest) = line.strip_prefix("C:") {
        let (label, term) = rest
            .split_once(":=")
            .ok_or_else(|| format!("expected `C: <label> := <term>`, found `{line}`"))?;
        let label = parse_label_text(label)?;
        let term = syntax::parse(term).map_err(|e| e.to_string())?;
        return Ok(Directive::Diffusion(label, term));
    }
    if let Some(rest) = line.strip_prefix("prop") {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(format!("expected `prop <name> <state-id> <T|F>`, found `{line}`"));
        }
        let state: usize = parts[1]
            .parse()
            .map_err(|_| format!("`{}` is not a state id", parts[1]))?;
        let value = match parts[2] {
            "T" => true,
            "F" => false,
            other => return Err(format!("`{other}` is not `T` or `F`")),
        };
        return Ok(Directive::Prop(parts[0].to_string(), state, value));
    }
    if let Some(rest) = line.strip_prefix("bound") {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(format!("expected `bound states|depth <n>`, found `{line}`"));
        }
        let n: usize = parts[1]
            .parse()
            .map_err(|_| format!("`{}` is not a number", parts[1]))?;
        return match parts[0] {
            "states" => Ok(Directive::BoundStates(n)),
            "depth" => Ok(Directive::BoundDepth(n)),
            other => Err(format!("unknown bound `{other}`")),
        };
    }
    if let Some((name, body)) = line.split_once(":=") {
        let name = name.trim();
        if !name.is_empty() && name.chars().next().unwrap().is_ascii_uppercase() {
            let term = syntax::parse(body).map_err(|e| e.to_string())?;
            return Ok(Directive::Constant(name.to_string(), term));
        }
    }
    Err(format!("unknown directive `{line}`"))
}

fn first_undefined_constant(
    term: &ProcessTerm,
    constants: &BTreeMap<String, ProcessTerm>,
) -> Option<String> {
    match term {
        ProcessTerm::Nil | ProcessTerm::Diffuse(_) => None,
        ProcessTerm::Prefix(_, p) | ProcessTerm::Attract(_, p) | ProcessTerm::Repel(_, p) => {
            first_undefined_constant(p, constants)
        }
        ProcessTerm::Hide(p, _) => first_undefined_constant(p, constants),
        ProcessTerm::Coop(l, r) | ProcessTerm::Fuse(l, r) | ProcessTerm::Choice(l, r) => {
            first_undefined_constant(l, constants).or_else(|| first_undefined_constant(r, constants))
        }
        ProcessTerm::Const(name) => {
            if constants.contains_key(name) {
                None
            } else {
                Some(name.clone())
            }
        }
    }
}
