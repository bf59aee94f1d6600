//! Seeded random generation of labels and process terms, used by the law
//! conformance reporter and by the test suites. Everything here is
//! deterministic for a fixed seed.

use rand::Rng;

use crate::syntax::{Label, LabelSet, ProcessTerm};

/// Parameters for random term generation.
#[derive(Debug, Clone)]
pub struct TermGen {
    pub max_depth: usize,
    pub alphabet: Vec<String>,
    /// Allow `A(a).P` / `R(a).P` / `C(a)` nodes.
    pub with_environment_ops: bool,
}

impl Default for TermGen {
    fn default() -> TermGen {
        TermGen {
            max_depth: 5,
            alphabet: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            with_environment_ops: true,
        }
    }
}

impl TermGen {
    pub fn label<R: Rng>(&self, rng: &mut R) -> Label {
        let name = &self.alphabet[rng.gen_range(0..self.alphabet.len())];
        if rng.gen_bool(0.3) {
            Label::inhibitor(name)
        } else {
            Label::activator(name)
        }
    }

    pub fn label_set<R: Rng>(&self, rng: &mut R) -> LabelSet {
        let mut set = LabelSet::new();
        for name in &self.alphabet {
            if rng.gen_bool(0.3) {
                set.insert(Label::activator(name)).expect("named label");
            }
            if rng.gen_bool(0.15) {
                set.insert(Label::inhibitor(name)).expect("named label");
            }
        }
        set
    }

    /// A random constant-free term of depth at most `max_depth`.
    pub fn term<R: Rng>(&self, rng: &mut R) -> ProcessTerm {
        self.term_at(rng, self.max_depth)
    }

    fn term_at<R: Rng>(&self, rng: &mut R, depth: usize) -> ProcessTerm {
        if depth <= 1 {
            return if self.with_environment_ops && rng.gen_bool(0.3) {
                ProcessTerm::Diffuse(self.label(rng))
            } else {
                ProcessTerm::Nil
            };
        }
        match rng.gen_range(0..10) {
            0 => ProcessTerm::Nil,
            1 | 2 => ProcessTerm::prefix(self.label(rng), self.term_at(rng, depth - 1)),
            3 => {
                if self.with_environment_ops {
                    match rng.gen_range(0..3) {
                        0 => ProcessTerm::attract(self.label(rng), self.term_at(rng, depth - 1)),
                        1 => ProcessTerm::repel(self.label(rng), self.term_at(rng, depth - 1)),
                        _ => ProcessTerm::Diffuse(self.label(rng)),
                    }
                } else {
                    ProcessTerm::prefix(self.label(rng), self.term_at(rng, depth - 1))
                }
            }
            4 => ProcessTerm::hide(self.term_at(rng, depth - 1), self.label_set(rng)),
            5 | 6 => ProcessTerm::choice(
                self.term_at(rng, depth - 1),
                self.term_at(rng, depth - 1),
            ),
            7 | 8 => ProcessTerm::fuse(
                self.term_at(rng, depth - 1),
                self.term_at(rng, depth - 1),
            ),
            _ => ProcessTerm::coop(
                self.term_at(rng, depth - 1),
                self.term_at(rng, depth - 1),
            ),
        }
    }
}
