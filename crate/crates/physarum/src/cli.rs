//! The command-line front end behind the `physarum` binary.
//!
//! Exit codes: 0 on success, 1 when a queried verdict is negative
//! (non-bisimilar terms, a failing law, a falsified formula), 2 on usage
//! errors, 3 on unreadable or unparseable input.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::environment::Environment;
use crate::equivalence::{
    bisimilarity, distinguishing_sequence, law_conformance, normalize, LawSampleParams,
};
use crate::semantics::{bounded_traces, build_joint_lts, build_lts, Bounds, Lts};
use crate::streams::{eval_formula, parse_formula, state_streams, RationalStream, Valuation};
use crate::syntax::{parse_term_file, ProcessTerm, TermFile};

#[derive(Parser)]
#[command(name = "physarum", version, about = "A Physarum polycephalum process calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scene file declaring the universe, attractant/repellent tables,
    /// diffusion bindings, constants and bounds.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Exploration bounds as `max-states,max-depth`.
    #[arg(long, value_parser = parse_bounds)]
    bounds: Option<Bounds>,
}

#[derive(Subcommand)]
enum Command {
    /// Reprint a term file in canonical form.
    Fmt { file: PathBuf },
    /// Explore the labelled transition system of a term.
    Lts {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Run the diffusion pass, binding `C(a)` from derived transitions.
        #[arg(long)]
        diffusion: bool,
        /// Emit a DOT digraph instead of the line-oriented format.
        #[arg(long)]
        dot: bool,
    },
    /// Decide strong bisimilarity of the roots of two term files.
    Bisim {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rewrite the root term into the normal form of the congruence laws.
    Normalize { file: PathBuf },
    /// Evaluate a trace-logic formula along an execution path of a term.
    Eval {
        /// File holding one formula over `T F ! & | ->` and variables.
        formula: PathBuf,
        /// Term file providing the system the path is taken in.
        term: PathBuf,
        #[command(flatten)]
        common: Common,
        /// State to start the path at.
        #[arg(long, default_value_t = 0)]
        state: usize,
        /// Which maximal path from the state to follow.
        #[arg(long, default_value_t = 0)]
        path_index: usize,
        /// How many truth values to print.
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Check the congruence laws against bisimilarity on random terms.
    Laws {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// List the bounded trace set of a state.
    Trace {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        state: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
}

fn parse_bounds(text: &str) -> Result<Bounds, String> {
    let (states, depth) = text
        .split_once(',')
        .ok_or_else(|| "expected `max-states,max-depth`".to_string())?;
    Ok(Bounds {
        max_states: states.trim().parse().map_err(|e| format!("max-states: {e}"))?,
        max_depth: depth.trim().parse().map_err(|e| format!("max-depth: {e}"))?,
        ..Bounds::default()
    })
}

/// Everything that makes an invocation unusable: missing files, parse
/// errors, out-of-range indices. Mapped to exit code 3.
struct InputError(String);

macro_rules! from_display {
    ($($ty:ty),+) => {$(
        impl From<$ty> for InputError {
            fn from(e: $ty) -> InputError {
                InputError(e.to_string())
            }
        }
    )+};
}

from_display!(
    crate::syntax::ParseError,
    crate::environment::SceneError,
    crate::semantics::LtsError,
    crate::streams::FormulaParseError,
    crate::streams::EvalError
);

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_term_file(path: &Path) -> Result<TermFile, InputError> {
    Ok(parse_term_file(&read(path)?)?)
}

/// Builds the environment from the optional scene file, folds the term
/// file's definitions in, and applies a `--bounds` override.
fn setup(file: &TermFile, common: &Common) -> Result<Environment, InputError> {
    let mut env = match &common.scene {
        Some(path) => Environment::load_scene(&read(path)?)?,
        None => Environment::new(),
    };
    for (name, body) in &file.definitions {
        env.define_constant(name, body.clone());
    }
    if let Some(bounds) = common.bounds {
        env.bounds = bounds;
    }
    Ok(env)
}

fn explore(root: &ProcessTerm, env: &Environment, diffusion: bool) -> Result<Lts, InputError> {
    Ok(build_lts(root, env, env.bounds, diffusion)?)
}

/// Runs the CLI on the given arguments, returning the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            3
        }
    }
}

fn dispatch(command: Command) -> Result<i32, InputError> {
    match command {
        Command::Fmt { file } => cmd_fmt(&file),
        Command::Lts {
            file,
            common,
            diffusion,
            dot,
        } => cmd_lts(&file, &common, diffusion, dot),
        Command::Bisim {
            left,
            right,
            common,
        } => cmd_bisim(&left, &right, &common),
        Command::Normalize { file } => cmd_normalize(&file),
        Command::Eval {
            formula,
            term,
            common,
            state,
            path_index,
            depth,
        } => cmd_eval(&formula, &term, &common, state, path_index, depth),
        Command::Laws {
            common,
            seed,
            samples,
        } => cmd_laws(&common, seed, samples),
        Command::Trace {
            file,
            common,
            state,
            max_len,
        } => cmd_trace(&file, &common, state, max_len),
    }
}

fn cmd_fmt(file: &Path) -> Result<i32, InputError> {
    let parsed = load_term_file(file)?;
    for (name, body) in &parsed.definitions {
        println!("{name} := {body}");
    }
    println!("{}", parsed.root);
    Ok(0)
}

fn cmd_lts(file: &Path, common: &Common, diffusion: bool, dot: bool) -> Result<i32, InputError> {
    let parsed = load_term_file(file)?;
    let env = setup(&parsed, common)?;
    let lts = explore(&parsed.root, &env, diffusion)?;
    print!("{}", if dot { lts.to_dot() } else { lts.to_text() });
    for event in &lts.diffusion_report {
        eprintln!("diffusion: {event}");
    }
    if lts.truncated {
        eprintln!("warning: exploration truncated by bounds");
    }
    Ok(0)
}

fn cmd_bisim(left: &Path, right: &Path, common: &Common) -> Result<i32, InputError> {
    let lhs = load_term_file(left)?;
    let rhs = load_term_file(right)?;
    let mut env = setup(&lhs, common)?;
    for (name, body) in &rhs.definitions {
        env.define_constant(name, body.clone());
    }
    let (lts, root_l, root_r) = build_joint_lts(&lhs.root, &rhs.root, &env, env.bounds)?;
    let partition = bisimilarity(&lts);
    let qualifier = if partition.approximate { " (approximate)" } else { "" };
    if partition.same_block(root_l, root_r) {
        println!("bisimilar{qualifier}");
        Ok(0)
    } else {
        println!("not bisimilar{qualifier}");
        if let Some(seq) =
            distinguishing_sequence(lts.states.len(), &lts.transitions, root_l, root_r)
        {
            let words: Vec<String> = seq.iter().map(|l| l.to_string()).collect();
            println!("distinguished by: {}", words.join(" "));
        }
        Ok(1)
    }
}

fn cmd_normalize(file: &Path) -> Result<i32, InputError> {
    let parsed = load_term_file(file)?;
    println!("{}", normalize(&parsed.root));
    Ok(0)
}

fn cmd_eval(
    formula_file: &Path,
    term_file: &Path,
    common: &Common,
    state: usize,
    path_index: usize,
    depth: usize,
) -> Result<i32, InputError> {
    let formula = parse_formula(read(formula_file)?.trim())?;
    let parsed = load_term_file(term_file)?;
    let env = setup(&parsed, common)?;
    let lts = explore(&parsed.root, &env, false)?;
    if state >= lts.states.len() {
        return Err(InputError(format!(
            "state {state} out of range, LTS has {} states",
            lts.states.len()
        )));
    }
    let (paths, truncated) = state_streams(&lts, state, 256);
    if path_index >= paths.len() {
        return Err(InputError(format!(
            "path index {path_index} out of range, state {state} has {} paths{}",
            paths.len(),
            if truncated { " (truncated)" } else { "" }
        )));
    }
    let path = &paths[path_index];
    let mut bindings: BTreeMap<String, RationalStream<usize>> = BTreeMap::new();
    for var in formula.variables() {
        bindings.insert(var.to_string(), path.clone());
    }
    let valuation = Valuation::from_map(env.props.clone());
    let truth = eval_formula(&formula, &bindings, &valuation)?;
    let shown: Vec<&str> = truth
        .take(depth)
        .into_iter()
        .map(|v| if v { "T" } else { "F" })
        .collect();
    println!("path: {path}");
    println!("truth: {truth}");
    println!("first {depth}: {}", shown.join(" "));
    let holds = truth.prefix().iter().all(|&v| v) && truth.cycle().iter().all(|&v| v);
    println!("verdict: {}", if holds { "true" } else { "false" });
    Ok(if holds { 0 } else { 1 })
}

fn cmd_laws(common: &Common, seed: u64, samples: usize) -> Result<i32, InputError> {
    let env = match &common.scene {
        Some(path) => Environment::load_scene(&read(path)?)?,
        None => Environment::new(),
    };
    let mut params = LawSampleParams {
        seed,
        samples,
        ..LawSampleParams::default()
    };
    if let Some(bounds) = common.bounds {
        params.bounds = bounds;
    }
    let report = law_conformance(&params, &env)?;
    print!("{report}");
    let all = report.laws.iter().all(|l| l.all_hold());
    Ok(if all { 0 } else { 1 })
}

fn cmd_trace(file: &Path, common: &Common, state: usize, max_len: usize) -> Result<i32, InputError> {
    let parsed = load_term_file(file)?;
    let env = setup(&parsed, common)?;
    let lts = explore(&parsed.root, &env, false)?;
    if state >= lts.states.len() {
        return Err(InputError(format!(
            "state {state} out of range, LTS has {} states",
            lts.states.len()
        )));
    }
    for trace in bounded_traces(&lts, state, max_len) {
        if trace.is_empty() {
            continue;
        }
        let words: Vec<String> = trace.iter().map(|l| l.to_string()).collect();
        println!("trace {}", words.join(" "));
    }
    Ok(0)
}
