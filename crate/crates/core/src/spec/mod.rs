//! Moore specification automata and their trace semantics.

mod decentralized;
mod random;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{
    self, atoms_of, equivalent, eval, parse_expr_with, Atom, Encoder, Expr, ExprError, ParseError, Verdict,
};
use crate::replicated::{mem_from_event, Event, ReplicatedError};

pub use decentralized::{
    decentralized_run, enumerate_traces, first_disagreement, DecentralizedSpec, DecentralizedSpecFile,
    DecentralizedTrace,
};
pub use random::{random_monitorable_specification, random_specification, RandomSpecConfig};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("label {label:?}: {source}")]
    Label { label: String, source: ParseError },
    #[error("invalid specification file: {0}")]
    Json(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Replicated(#[from] ReplicatedError),
    #[error("name {0:?} is both a monitor and a proposition")]
    NameCollision(String),
    #[error("monitor {monitor:?}: {reason}")]
    InvalidMonitor { monitor: String, reason: String },
    #[error("unknown monitor {0:?}")]
    UnknownMonitor(String),
    #[error("round budget exceeded while evaluating monitor {0:?}")]
    RoundBudgetExceeded(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transition {
    pub from: StateId,
    pub to: StateId,
    pub label: Expr,
}

/// Deterministic Moore automaton with expression-labeled transitions.
#[derive(Clone, PartialEq, Eq)]
pub struct Specification {
    names: Vec<String>,
    initial: StateId,
    verdicts: Vec<Verdict>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

/// Result of one transition over an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub state: StateId,
    /// The event was non-empty but no label evaluated to ⊤.
    pub stuck: bool,
}

/// Violations found by [`Specification::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// Pairs of transitions (indices) leaving one state towards different
    /// targets whose labels can hold together.
    pub determinism: Vec<(usize, usize)>,
    /// States whose outgoing labels do not cover every event.
    pub completeness: Vec<StateId>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.determinism.is_empty() && self.completeness.is_empty()
    }
}

impl Specification {
    pub fn new(
        names: Vec<String>,
        initial: StateId,
        verdicts: Vec<Verdict>,
        transitions: Vec<Transition>,
    ) -> Result<Self, SpecError> {
        let n = names.len();
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name) {
                return Err(SpecError::DuplicateState(name.clone()));
            }
        }
        if initial >= n || verdicts.len() != n {
            return Err(SpecError::UnknownState(format!("#{initial}")));
        }
        let mut outgoing = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            if t.from >= n || t.to >= n {
                return Err(SpecError::UnknownState(format!("#{}/#{}", t.from, t.to)));
            }
            outgoing[t.from].push(i);
        }
        Ok(Specification { names, initial, verdicts, transitions, outgoing })
    }

    /// Convenience constructor from state names and label text.
    pub fn build(
        states: &[(&str, Verdict)],
        initial: &str,
        edges: &[(&str, &str, &str)],
    ) -> Result<Self, SpecError> {
        let file = SpecFile {
            states: states.iter().map(|(s, _)| s.to_string()).collect(),
            initial: initial.to_string(),
            verdicts: states.iter().map(|(s, v)| (s.to_string(), *v)).collect(),
            transitions: edges
                .iter()
                .map(|(f, t, l)| TransitionFile { from: f.to_string(), to: t.to_string(), label: l.to_string() })
                .collect(),
        };
        Specification::from_file(&file, &|n| Atom::plain(n))
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn name(&self, q: StateId) -> &str {
        &self.names[q]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn verdict(&self, q: StateId) -> Verdict {
        self.verdicts[q]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, q: StateId) -> impl Iterator<Item = &Transition> {
        self.outgoing[q].iter().map(move |i| &self.transitions[*i])
    }

    /// Distinct successors of `q`, ascending.
    pub fn successors(&self, q: StateId) -> BTreeSet<StateId> {
        self.outgoing(q).map(|t| t.to).collect()
    }

    /// Atoms used by any label.
    pub fn label_atoms(&self) -> BTreeSet<Atom> {
        self.transitions.iter().flat_map(|t| atoms_of(&t.label)).collect()
    }

    /// Largest number of distinct atoms in one label.
    pub fn max_label_size(&self) -> usize {
        self.transitions.iter().map(|t| atoms_of(&t.label).len()).max().unwrap_or(0)
    }

    /// Checks determinism and completeness state by state.
    pub fn validate(&self) -> Result<ValidationReport, SpecError> {
        let mut report = ValidationReport::default();
        for q in self.states() {
            let out: Vec<usize> = self.outgoing[q].clone();
            let atoms: BTreeSet<Atom> = out.iter().flat_map(|i| atoms_of(&self.transitions[*i].label)).collect();
            let limit = expr::exact_threshold();
            if atoms.len() > limit {
                return Err(ExprError::ThresholdExceeded { atoms: atoms.len(), limit }.into());
            }
            for (k, i) in out.iter().enumerate() {
                for j in &out[k + 1..] {
                    let (a, b) = (&self.transitions[*i], &self.transitions[*j]);
                    if a.to == b.to {
                        continue;
                    }
                    let both = Expr::and(a.label.clone(), b.label.clone());
                    if !equivalent(&both, &Expr::bottom())? {
                        report.determinism.push((*i, *j));
                    }
                }
            }
            let any = Expr::or_all(out.iter().map(|i| self.transitions[*i].label.clone()));
            if !equivalent(&any, &Expr::top())? {
                report.completeness.push(q);
            }
        }
        Ok(report)
    }

    /// Merges parallel edges by disjoining their labels.
    pub fn normalize(&self) -> Specification {
        let mut merged: BTreeMap<(StateId, StateId), Expr> = BTreeMap::new();
        let mut order = Vec::new();
        for t in &self.transitions {
            match merged.get_mut(&(t.from, t.to)) {
                Some(l) => *l = Expr::or(l.clone(), t.label.clone()),
                None => {
                    merged.insert((t.from, t.to), t.label.clone());
                    order.push((t.from, t.to));
                }
            }
        }
        let transitions = order
            .into_iter()
            .map(|(from, to)| Transition { from, to, label: merged[&(from, to)].clone() })
            .collect();
        Specification::new(self.names.clone(), self.initial, self.verdicts.clone(), transitions)
            .expect("normalization keeps states")
    }

    /// `Δ(q, evt)` with the stuck diagnostic.
    pub fn step(&self, q: StateId, evt: &Event) -> Step {
        if evt.is_empty() {
            return Step { state: q, stuck: false };
        }
        let m = mem_from_event(evt, Encoder::Identity);
        for t in self.outgoing(q) {
            if eval(&t.label, &m) == Verdict::Top {
                return Step { state: t.to, stuck: false };
            }
        }
        Step { state: q, stuck: true }
    }

    /// `Δ*`: left fold of [`Specification::step`] from the initial state.
    pub fn run(&self, global: &[Event]) -> StateId {
        global.iter().fold(self.initial, |q, e| self.step(q, e).state)
    }

    pub fn from_file(file: &SpecFile, resolve: &dyn Fn(&str) -> Atom) -> Result<Self, SpecError> {
        let index = |s: &str| file.states.iter().position(|n| n == s).ok_or_else(|| SpecError::UnknownState(s.into()));
        let initial = index(&file.initial)?;
        for s in file.verdicts.keys() {
            index(s)?;
        }
        let verdicts = file.states.iter().map(|s| file.verdicts.get(s).copied().unwrap_or_default()).collect();
        let mut transitions = Vec::with_capacity(file.transitions.len());
        for t in &file.transitions {
            let label = parse_expr_with(&t.label, resolve)
                .map_err(|source| SpecError::Label { label: t.label.clone(), source })?;
            transitions.push(Transition { from: index(&t.from)?, to: index(&t.to)?, label });
        }
        Specification::new(file.states.clone(), initial, verdicts, transitions)
    }

    pub fn to_file(&self) -> SpecFile {
        SpecFile {
            states: self.names.clone(),
            initial: self.names[self.initial].clone(),
            verdicts: self.states().map(|q| (self.names[q].clone(), self.verdicts[q])).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionFile {
                    from: self.names[t.from].clone(),
                    to: self.names[t.to].clone(),
                    label: t.label.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        Specification::from_file(&file, &|n| Atom::plain(n))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

impl fmt::Debug for Specification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "initial {}", self.names[self.initial])?;
        for q in self.states() {
            writeln!(f, "  {} [{}]", self.names[q], self.verdicts[q])?;
            for t in self.outgoing(q) {
                writeln!(f, "    -({})-> {}", t.label, self.names[t.to])?;
            }
        }
        Ok(())
    }
}

/// On-disk form of a specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecFile {
    pub states: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub verdicts: BTreeMap<String, Verdict>,
    #[serde(default)]
    pub transitions: Vec<TransitionFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionFile {
    pub from: String,
    pub to: String,
    pub label: String,
}

#[cfg(test)]
mod tests;
