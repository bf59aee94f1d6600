//! A process calculus for modelling Physarum polycephalum plasmodia.
//!
//! The calculus has inaction (`0`), action prefix (`a.P`), attraction and
//! repelling prefixes (`A(a).P`, `R(a).P`), diffusion (`C(a)`), cooperation
//! (`P | Q`), hiding (`P \ {a}`), fusion (`P & Q`), choice (`P + Q`) and
//! recursive constants. This crate provides:
//!
//! * [`syntax`] — labels, process terms, a parser and a canonical printer;
//! * [`environment`] — scenes: the declared alphabet, attractant/repellent
//!   tables, diffusion bindings and constant definitions;
//! * [`semantics`] — one-step transition derivation under the SOS rules and
//!   bounded labelled-transition-system exploration;
//! * [`streams`] — rational (lasso) streams, execution fragments, and the
//!   coinductive trace logic;
//! * [`equivalence`] — strong bisimilarity, the congruence laws as a
//!   normalizer, the hiding-derived Boolean connectives, and a law
//!   conformance reporter;
//! * [`gen`] — seeded random term generation for testing and reports;
//! * [`cli`] — the command-line front end used by the `physarum` binary.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cli;
pub mod environment;
pub mod equivalence;
pub mod gen;
pub mod semantics;
pub mod streams;
pub mod syntax;

pub use environment::Environment;
pub use semantics::{Bounds, Lts, Transition};
pub use streams::{Formula, RationalStream, Valuation};
pub use syntax::{Label, LabelSet, Polarity, ProcessTerm};
