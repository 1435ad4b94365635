//! LTL formulas, one-step progression, and a progression-based Moore
//! automaton synthesizer. [`chor`] splits a formula into a monitor tree.

pub mod chor;
mod parse;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::expr::{canonical, fold, Atom, Expr, ExprError, Node, Verdict};
use crate::replicated::Memory;
use crate::spec::{SpecError, Specification, Transition};

pub use chor::{choose, decentralize, net_chor, score, split, MonitorData, MonitorTree};
pub use parse::parse_ltl;

pub const DEFAULT_STATE_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("LTL parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("no final verdict for {0} in the event")]
    IncompleteEvent(String),
    #[error("more than {0} states")]
    StateCapExceeded(usize),
    #[error("formula has no atomic propositions")]
    NoAtomicPropositions,
    #[error("proposition {0:?} has no owning component")]
    UnknownProposition(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ltl {
    True,
    False,
    Ap(String),
    /// Verdict of another monitor, used once a subformula is delegated.
    Ref(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Finally(Box<Ltl>),
    Globally(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

use Ltl::*;

impl Ltl {
    pub fn ap(name: &str) -> Ltl {
        Ap(name.to_string())
    }

    pub fn not(a: Ltl) -> Ltl {
        Not(Box::new(a))
    }

    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Or(Box::new(a), Box::new(b))
    }

    pub fn next(a: Ltl) -> Ltl {
        Next(Box::new(a))
    }

    pub fn finally(a: Ltl) -> Ltl {
        Finally(Box::new(a))
    }

    pub fn globally(a: Ltl) -> Ltl {
        Globally(Box::new(a))
    }

    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Until(Box::new(a), Box::new(b))
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Next(_) | Finally(_) | Globally(_) | Until(..))
    }

    /// Proposition names, each occurrence counted.
    pub fn ap_leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Ap(a) = f {
                out.push(a.as_str());
            }
        });
        out
    }

    pub fn aps(&self) -> BTreeSet<String> {
        self.ap_leaves().into_iter().map(str::to_string).collect()
    }

    pub fn refs(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Ref(r) = f {
                out.insert(r.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Ltl)) {
        f(self);
        match self {
            True | False | Ap(_) | Ref(_) => {}
            Not(a) | Next(a) | Finally(a) | Globally(a) => a.walk(f),
            And(a, b) | Or(a, b) | Until(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// Operator count.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |f| {
            if !matches!(f, True | False | Ap(_) | Ref(_)) {
                n += 1;
            }
        });
        n
    }

    /// Rebuilds with `f` applied to every leaf.
    pub fn map_leaves(&self, f: &dyn Fn(&Ltl) -> Ltl) -> Ltl {
        match self {
            True | False | Ap(_) | Ref(_) => f(self),
            Not(a) => Ltl::not(a.map_leaves(f)),
            Next(a) => Ltl::next(a.map_leaves(f)),
            Finally(a) => Ltl::finally(a.map_leaves(f)),
            Globally(a) => Ltl::globally(a.map_leaves(f)),
            And(a, b) => Ltl::and(a.map_leaves(f), b.map_leaves(f)),
            Or(a, b) => Ltl::or(a.map_leaves(f), b.map_leaves(f)),
            Until(a, b) => Ltl::until(a.map_leaves(f), b.map_leaves(f)),
        }
    }

    fn atom(&self) -> Option<Atom> {
        match self {
            Ap(a) => Some(Atom::plain(a)),
            Ref(r) => Some(Atom::monitor(r)),
            _ => None,
        }
    }

    /// Atoms read by the next progression step (those not under `X`).
    pub fn now_atoms(&self) -> BTreeSet<Atom> {
        fn go(f: &Ltl, out: &mut BTreeSet<Atom>) {
            match f {
                True | False | Next(_) => {}
                Ap(_) | Ref(_) => {
                    out.insert(f.atom().unwrap());
                }
                Not(a) | Finally(a) | Globally(a) => go(a, out),
                And(a, b) | Or(a, b) | Until(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }
}

// Precedence: 0 `||`, 1 `U`, 2 `&&`, 3 unary operand.
fn write_ltl(f: &Ltl, out: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    let level = match f {
        Or(..) => 0,
        Until(..) => 1,
        And(..) => 2,
        _ => 3,
    };
    if level < ctx {
        out.write_str("(")?;
    }
    match f {
        True => out.write_str("true")?,
        False => out.write_str("false")?,
        Ap(a) | Ref(a) => out.write_str(a)?,
        Not(a) => {
            out.write_str("!")?;
            write_ltl(a, out, 3)?;
        }
        Next(a) | Finally(a) | Globally(a) => {
            out.write_str(match f {
                Next(_) => "X ",
                Finally(_) => "F ",
                _ => "G ",
            })?;
            write_ltl(a, out, 3)?;
        }
        And(a, b) => {
            write_ltl(a, out, 2)?;
            out.write_str(" && ")?;
            write_ltl(b, out, 3)?;
        }
        Or(a, b) => {
            write_ltl(a, out, 0)?;
            out.write_str(" || ")?;
            write_ltl(b, out, 1)?;
        }
        Until(a, b) => {
            write_ltl(a, out, 2)?;
            out.write_str(" U ")?;
            write_ltl(b, out, 1)?;
        }
    }
    if level < ctx {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ltl(self, f, 0)
    }
}

impl fmt::Debug for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Normal form used as state identity: temporal operands are normalized
/// recursively, trivial temporal cases are folded, and the Boolean skeleton
/// (temporal subformulas treated as opaque) is replaced by its canonical
/// two-level cover.
pub fn normalize(f: &Ltl) -> Ltl {
    match f {
        True | False | Ap(_) | Ref(_) => f.clone(),
        Next(a) => match normalize(a) {
            c @ (True | False) => c,
            a => Ltl::next(a),
        },
        Finally(a) => match normalize(a) {
            c @ (True | False) => c,
            a @ Finally(_) => a,
            a => Ltl::finally(a),
        },
        Globally(a) => match normalize(a) {
            c @ (True | False) => c,
            a @ Globally(_) => a,
            a => Ltl::globally(a),
        },
        Until(a, b) => match (normalize(a), normalize(b)) {
            (_, c @ (True | False)) => c,
            (True, b) => normalize(&Ltl::finally(b)),
            (False, b) => b,
            (a, b) => Ltl::until(a, b),
        },
        Not(_) | And(..) | Or(..) => {
            let mut table = HashMap::new();
            let skeleton = to_expr(f, &mut table);
            let reduced = canonical(&skeleton).unwrap_or_else(|_| fold(&skeleton));
            from_expr(&reduced, &table)
        }
    }
}

fn to_expr(f: &Ltl, table: &mut HashMap<String, Ltl>) -> Expr {
    match f {
        True => Expr::top(),
        False => Expr::bottom(),
        Ap(_) | Ref(_) => Expr::atom(f.atom().unwrap()),
        Not(a) => Expr::not(to_expr(a, table)),
        And(a, b) => Expr::and(to_expr(a, table), to_expr(b, table)),
        Or(a, b) => Expr::or(to_expr(a, table), to_expr(b, table)),
        _ => {
            let g = normalize(f);
            if !g.is_temporal() {
                return to_expr(&g, table);
            }
            // Temporal texts contain a space, so they never clash with
            // proposition names.
            let key = g.to_string();
            table.insert(key.clone(), g);
            Expr::atom(Atom::plain(&key))
        }
    }
}

fn from_expr(e: &Expr, table: &HashMap<String, Ltl>) -> Ltl {
    match e.node() {
        Node::Const(true) => True,
        Node::Const(false) => False,
        Node::Atom(Atom::Plain(n)) => table.get(&**n).cloned().unwrap_or_else(|| Ap(n.to_string())),
        Node::Atom(a) => Ref(a.name().to_string()),
        Node::Not(a) => Ltl::not(from_expr(a, table)),
        Node::And(a, b) => Ltl::and(from_expr(a, table), from_expr(b, table)),
        Node::Or(a, b) => Ltl::or(from_expr(a, table), from_expr(b, table)),
    }
}

/// One-step progression through an event given as a memory over plain and
/// monitor atoms, followed by [`normalize`].
pub fn progress(f: &Ltl, m: &Memory) -> Result<Ltl, SynthesisError> {
    fn go(f: &Ltl, m: &Memory) -> Result<Ltl, SynthesisError> {
        Ok(match f {
            True | False => f.clone(),
            Ap(_) | Ref(_) => match m.get(&f.atom().unwrap()).and_then(Verdict::as_bool) {
                Some(true) => True,
                Some(false) => False,
                None => return Err(SynthesisError::IncompleteEvent(f.to_string())),
            },
            Not(a) => Ltl::not(go(a, m)?),
            And(a, b) => Ltl::and(go(a, m)?, go(b, m)?),
            Or(a, b) => Ltl::or(go(a, m)?, go(b, m)?),
            Next(a) => (**a).clone(),
            Finally(a) => Ltl::or(go(a, m)?, f.clone()),
            Globally(a) => Ltl::and(go(a, m)?, f.clone()),
            Until(a, b) => Ltl::or(go(b, m)?, Ltl::and(go(a, m)?, f.clone())),
        })
    }
    Ok(normalize(&go(f, m)?))
}

pub fn synthesize(f: &Ltl) -> Result<Specification, SynthesisError> {
    synthesize_capped(f, DEFAULT_STATE_CAP)
}

/// States are the normalized formulas reachable by progression; each
/// transition label is the cover of the assignments leading to its target.
pub fn synthesize_capped(f: &Ltl, cap: usize) -> Result<Specification, SynthesisError> {
    let init = normalize(f);
    let mut index: HashMap<Ltl, usize> = HashMap::new();
    let mut formulas: Vec<Ltl> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(init.clone(), 0);
    formulas.push(init);
    queue.push_back(0);
    let mut transitions = Vec::new();
    while let Some(q) = queue.pop_front() {
        let phi = formulas[q].clone();
        if matches!(phi, True | False) {
            transitions.push(Transition { from: q, to: q, label: Expr::top() });
            continue;
        }
        let atoms: Vec<Atom> = phi.now_atoms().into_iter().collect();
        let limit = crate::expr::exact_threshold();
        if atoms.len() > limit {
            return Err(ExprError::ThresholdExceeded { atoms: atoms.len(), limit }.into());
        }
        let mut rows: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for bits in 0..(1u64 << atoms.len()) {
            let m: Memory =
                atoms.iter().enumerate().map(|(i, a)| (a.clone(), Verdict::from_bool(bits >> i & 1 == 1))).collect();
            let succ = progress(&phi, &m)?;
            let to = match index.get(&succ) {
                Some(i) => *i,
                None => {
                    if formulas.len() >= cap {
                        return Err(SynthesisError::StateCapExceeded(cap));
                    }
                    let i = formulas.len();
                    index.insert(succ.clone(), i);
                    formulas.push(succ);
                    queue.push_back(i);
                    i
                }
            };
            rows.entry(to).or_default().push(bits);
        }
        for (to, minterms) in rows {
            let cover = Expr::or_all(minterms.into_iter().map(|bits| {
                Expr::and_all(atoms.iter().enumerate().map(|(i, a)| {
                    let lit = Expr::atom(a.clone());
                    if bits >> i & 1 == 1 {
                        lit
                    } else {
                        Expr::not(lit)
                    }
                }))
            }));
            transitions.push(Transition { from: q, to, label: canonical(&cover)? });
        }
    }
    let verdicts = formulas
        .iter()
        .map(|f| match f {
            True => Verdict::Top,
            False => Verdict::Bottom,
            _ => Verdict::Unknown,
        })
        .collect();
    let names = (0..formulas.len()).map(|i| format!("q{i}")).collect();
    Ok(Specification::new(names, 0, verdicts, transitions)?)
}

/// Random formula with `ops` operators over `aps`; leaves are propositions.
pub fn random_ltl<R: Rng + ?Sized>(rng: &mut R, aps: &[String], ops: usize) -> Ltl {
    assert!(!aps.is_empty());
    if ops == 0 {
        return Ap(aps[rng.random_range(0..aps.len())].clone());
    }
    match rng.random_range(0..7) {
        0 => Ltl::not(random_ltl(rng, aps, ops - 1)),
        1 => Ltl::next(random_ltl(rng, aps, ops - 1)),
        2 => Ltl::finally(random_ltl(rng, aps, ops - 1)),
        3 => Ltl::globally(random_ltl(rng, aps, ops - 1)),
        k => {
            let left = rng.random_range(0..ops);
            let (a, b) = (random_ltl(rng, aps, left), random_ltl(rng, aps, ops - 1 - left));
            match k {
                4 => Ltl::and(a, b),
                5 => Ltl::or(a, b),
                _ => Ltl::until(a, b),
            }
        }
    }
}
