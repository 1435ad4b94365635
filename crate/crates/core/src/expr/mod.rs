//! Boolean expressions over atoms.
//!
//! Expressions are immutable DAGs: every node is reference counted so that
//! histories built round by round can share their prefixes. All traversals
//! memoize on node identity, which keeps them linear in the number of
//! distinct nodes rather than in the size of the unfolded tree.

mod parse;
mod sat;
mod table;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::replicated::Memory;

pub use parse::{parse_expr, parse_expr_with, ParseError};

/// Default number of distinct atoms up to which decisions use truth tables.
pub const DEFAULT_EXACT_ATOMS: usize = 16;

/// Hard ceiling on the truth-table route, whatever the configured value.
const MAX_TABLE_ATOMS: usize = 24;

static EXACT_ATOMS: AtomicUsize = AtomicUsize::new(DEFAULT_EXACT_ATOMS);

/// Current exact-decision threshold (distinct atoms).
pub fn exact_threshold() -> usize {
    EXACT_ATOMS.load(Ordering::Relaxed)
}

/// Sets the exact-decision threshold; values above 24 are clamped.
pub fn set_exact_threshold(n: usize) {
    EXACT_ATOMS.store(n.min(MAX_TABLE_ATOMS), Ordering::Relaxed);
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("exact decision limit exceeded: {atoms} atoms > {limit}")]
    ThresholdExceeded { atoms: usize, limit: usize },
}

/// Three-valued verdict. The declaration order is the replace order used by
/// memory merges: `Unknown < Bottom < Top`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    #[default]
    Unknown,
    Bottom,
    Top,
}

impl Verdict {
    pub fn is_final(self) -> bool {
        self != Verdict::Unknown
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Top
        } else {
            Verdict::Bottom
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Verdict::Top => Some(true),
            Verdict::Bottom => Some(false),
            Verdict::Unknown => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Top => "⊤",
            Verdict::Bottom => "⊥",
            Verdict::Unknown => "?",
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Verdict::Top => "top",
            Verdict::Bottom => "bottom",
            Verdict::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

pub type Name = Arc<str>;

/// An encoded observable.
///
/// `Plain` and `Monitor` live in specification labels; the timestamp encoder
/// turns them into `Timed` and `MonRef` respectively. The derived order is
/// kind first, then round, then name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Plain(Name),
    Monitor(Name),
    Timed { t: u32, ap: Name },
    MonRef { t: u32, id: Name },
}

impl Atom {
    pub fn plain(ap: &str) -> Self {
        Atom::Plain(ap.into())
    }

    pub fn monitor(id: &str) -> Self {
        Atom::Monitor(id.into())
    }

    pub fn timed(t: u32, ap: &str) -> Self {
        Atom::Timed { t, ap: ap.into() }
    }

    pub fn monref(t: u32, id: &str) -> Self {
        Atom::MonRef { t, id: id.into() }
    }

    pub fn name(&self) -> &str {
        match self {
            Atom::Plain(n) | Atom::Monitor(n) => n,
            Atom::Timed { ap, .. } => ap,
            Atom::MonRef { id, .. } => id,
        }
    }

    pub fn round(&self) -> Option<u32> {
        match self {
            Atom::Timed { t, .. } | Atom::MonRef { t, .. } => Some(*t),
            _ => None,
        }
    }

    pub fn is_monitor_ref(&self) -> bool {
        matches!(self, Atom::Monitor(_) | Atom::MonRef { .. })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Plain(n) | Atom::Monitor(n) => f.write_str(n),
            Atom::Timed { t, ap } => write!(f, "<{t},{ap}>"),
            Atom::MonRef { t, id } => write!(f, "<{id},{t}>"),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Maps label atoms to history atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoder {
    Identity,
    Timestamp(u32),
}

impl Encoder {
    pub fn atom(self, a: &Atom) -> Atom {
        match (self, a) {
            (Encoder::Identity, _) => a.clone(),
            (Encoder::Timestamp(t), Atom::Plain(ap)) => Atom::Timed { t, ap: ap.clone() },
            (Encoder::Timestamp(t), Atom::Monitor(id)) => Atom::MonRef { t, id: id.clone() },
            (Encoder::Timestamp(_), other) => other.clone(),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub enum Node {
    Const(bool),
    Atom(Atom),
    Not(Expr),
    And(Expr, Expr),
    Or(Expr, Expr),
}

struct Inner {
    node: Node,
    /// Atom leaves of the unfolded tree, saturating.
    leaves: u64,
}

/// Shared, immutable Boolean expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

type Key = *const Inner;

impl Expr {
    fn new(node: Node) -> Self {
        let leaves = match &node {
            Node::Const(_) => 0,
            Node::Atom(_) => 1,
            Node::Not(e) => e.leaves(),
            Node::And(a, b) | Node::Or(a, b) => a.leaves().saturating_add(b.leaves()),
        };
        Expr(Arc::new(Inner { node, leaves }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    fn key(&self) -> Key {
        Arc::as_ptr(&self.0)
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Number of atom leaves in the unfolded tree (saturating).
    pub fn leaves(&self) -> u64 {
        self.0.leaves
    }

    pub fn constant(b: bool) -> Self {
        Expr::new(Node::Const(b))
    }

    pub fn top() -> Self {
        Expr::constant(true)
    }

    pub fn bottom() -> Self {
        Expr::constant(false)
    }

    pub fn atom(a: Atom) -> Self {
        Expr::new(Node::Atom(a))
    }

    pub fn plain(ap: &str) -> Self {
        Expr::atom(Atom::plain(ap))
    }

    // Raw structural constructors: no folding at all.

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::new(Node::Not(e))
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::new(Node::And(a, b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::new(Node::Or(a, b))
    }

    pub fn and_all<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        balanced(items.into_iter().collect(), Expr::and).unwrap_or_else(Expr::top)
    }

    pub fn or_all<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        balanced(items.into_iter().collect(), Expr::or).unwrap_or_else(Expr::bottom)
    }

    /// Number of distinct nodes in the DAG.
    pub fn size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.key()) {
                continue;
            }
            match e.node() {
                Node::Not(x) => stack.push(x),
                Node::And(a, b) | Node::Or(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                _ => {}
            }
        }
        seen.len()
    }

    // Folding constructors: apply local constant, idempotence, complement and
    // absorption rules at the top node only.

    pub fn negate(e: Expr) -> Self {
        match e.node() {
            Node::Const(b) => Expr::constant(!b),
            Node::Not(inner) => inner.clone(),
            _ => Expr::not(e),
        }
    }

    pub fn conj(a: Expr, b: Expr) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(false), _) | (_, Some(false)) => return Expr::bottom(),
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            _ => {}
        }
        if same(&a, &b) {
            return a;
        }
        if complementary(&a, &b) {
            return Expr::bottom();
        }
        if absorbs(&a, &b, false) {
            return a;
        }
        if absorbs(&b, &a, false) {
            return b;
        }
        Expr::and(a, b)
    }

    pub fn disj(a: Expr, b: Expr) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(true), _) | (_, Some(true)) => return Expr::top(),
            (Some(false), _) => return b,
            (_, Some(false)) => return a,
            _ => {}
        }
        if same(&a, &b) {
            return a;
        }
        if complementary(&a, &b) {
            return Expr::top();
        }
        if absorbs(&a, &b, true) {
            return a;
        }
        if absorbs(&b, &a, true) {
            return b;
        }
        Expr::or(a, b)
    }

    pub fn as_const(&self) -> Option<bool> {
        match self.node() {
            Node::Const(b) => Some(*b),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        self.as_const().is_some()
    }
}

/// Cheap equality: identity, or structural equality on small trees.
// Pairwise reduction keeps the depth logarithmic; left-to-right order of
// operands is preserved.
fn balanced(mut items: Vec<Expr>, op: fn(Expr, Expr) -> Expr) -> Option<Expr> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => op(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop()
}

fn same(a: &Expr, b: &Expr) -> bool {
    a.ptr_eq(b) || (a.leaves() <= 8 && b.leaves() <= 8 && a == b)
}

fn complementary(a: &Expr, b: &Expr) -> bool {
    match (a.node(), b.node()) {
        (Node::Not(x), _) if same(x, b) => true,
        (_, Node::Not(y)) if same(a, y) => true,
        _ => false,
    }
}

/// `x ∧ (x ∨ y) = x` (with `in_or = false`) and `x ∨ (x ∧ y) = x`.
fn absorbs(x: &Expr, other: &Expr, in_or: bool) -> bool {
    let (l, r) = match (other.node(), in_or) {
        (Node::Or(l, r), false) | (Node::And(l, r), true) => (l, r),
        _ => return false,
    };
    same(x, l) || same(x, r)
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        let mut seen = std::collections::HashSet::new();
        struct_eq(self, other, &mut seen)
    }
}

impl Eq for Expr {}

fn struct_eq(a: &Expr, b: &Expr, seen: &mut std::collections::HashSet<(Key, Key)>) -> bool {
    if a.ptr_eq(b) || seen.contains(&(a.key(), b.key())) {
        return true;
    }
    if a.leaves() != b.leaves() {
        return false;
    }
    let eq = match (a.node(), b.node()) {
        (Node::Const(x), Node::Const(y)) => x == y,
        (Node::Atom(x), Node::Atom(y)) => x == y,
        (Node::Not(x), Node::Not(y)) => struct_eq(x, y, seen),
        (Node::And(a1, a2), Node::And(b1, b2)) | (Node::Or(a1, a2), Node::Or(b1, b2)) => {
            struct_eq(a1, b1, seen) && struct_eq(a2, b2, seen)
        }
        _ => false,
    };
    if eq {
        seen.insert((a.key(), b.key()));
    }
    eq
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Precedence levels: 0 = or context, 1 = and context, 2 = operand of `!`.
fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    match e.node() {
        Node::Const(true) => f.write_str("true"),
        Node::Const(false) => f.write_str("false"),
        Node::Atom(a) => write!(f, "{a}"),
        Node::Not(x) => {
            f.write_str("!")?;
            write_expr(x, f, 2)
        }
        Node::And(a, b) => {
            if ctx > 1 {
                f.write_str("(")?;
            }
            write_expr(a, f, 1)?;
            f.write_str(" && ")?;
            write_expr(b, f, 1)?;
            if ctx > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Node::Or(a, b) => {
            if ctx > 0 {
                f.write_str("(")?;
            }
            write_expr(a, f, 0)?;
            f.write_str(" || ")?;
            write_expr(b, f, 0)?;
            if ctx > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

/// Bottom-up rebuild with memoization on node identity. `leaf` decides the
/// replacement of atoms and constants; `combine` rebuilds inner nodes.
fn map_dag(
    e: &Expr,
    memo: &mut HashMap<Key, Expr>,
    leaf: &mut dyn FnMut(&Expr) -> Expr,
    combine: &dyn Fn(&Expr, &Node, Vec<Expr>) -> Expr,
) -> Expr {
    if let Some(r) = memo.get(&e.key()) {
        return r.clone();
    }
    let out = match e.node() {
        Node::Const(_) | Node::Atom(_) => leaf(e),
        Node::Not(x) => {
            let x2 = map_dag(x, memo, leaf, combine);
            combine(e, e.node(), vec![x2])
        }
        Node::And(a, b) | Node::Or(a, b) => {
            let a2 = map_dag(a, memo, leaf, combine);
            let b2 = map_dag(b, memo, leaf, combine);
            combine(e, e.node(), vec![a2, b2])
        }
    };
    memo.insert(e.key(), out.clone());
    out
}

/// Structural rebuild; reuses the original node when children are unchanged.
fn rebuild_raw(orig: &Expr, node: &Node, kids: Vec<Expr>) -> Expr {
    match node {
        Node::Not(x) => {
            if x.ptr_eq(&kids[0]) {
                orig.clone()
            } else {
                Expr::not(kids[0].clone())
            }
        }
        Node::And(a, b) | Node::Or(a, b) => {
            if a.ptr_eq(&kids[0]) && b.ptr_eq(&kids[1]) {
                return orig.clone();
            }
            let (x, y) = (kids[0].clone(), kids[1].clone());
            if matches!(node, Node::And(..)) {
                Expr::and(x, y)
            } else {
                Expr::or(x, y)
            }
        }
        _ => orig.clone(),
    }
}

fn rebuild_folded(orig: &Expr, node: &Node, kids: Vec<Expr>) -> Expr {
    match node {
        Node::Not(x) => {
            if x.ptr_eq(&kids[0]) && !kids[0].is_const() && !matches!(x.node(), Node::Not(_)) {
                orig.clone()
            } else {
                Expr::negate(kids[0].clone())
            }
        }
        Node::And(..) => keep_if_same(orig, Expr::conj(kids[0].clone(), kids[1].clone())),
        Node::Or(..) => keep_if_same(orig, Expr::disj(kids[0].clone(), kids[1].clone())),
        _ => orig.clone(),
    }
}

// A rebuilt node with the same operator and child pointers is replaced by the
// original, so sharing between separately folded expressions survives.
fn keep_if_same(orig: &Expr, built: Expr) -> Expr {
    match (orig.node(), built.node()) {
        (Node::And(a, b), Node::And(c, d)) | (Node::Or(a, b), Node::Or(c, d))
            if a.ptr_eq(c) && b.ptr_eq(d) =>
        {
            orig.clone()
        }
        _ => built,
    }
}

/// Re-encodes every atom; structure is unchanged.
pub fn encode(e: &Expr, enc: Encoder) -> Expr {
    if enc == Encoder::Identity {
        return e.clone();
    }
    let mut memo = HashMap::new();
    map_dag(
        e,
        &mut memo,
        &mut |leaf| match leaf.node() {
            Node::Atom(a) => Expr::atom(enc.atom(a)),
            _ => leaf.clone(),
        },
        &rebuild_raw,
    )
}

/// Replaces atoms holding a final verdict in `m` by constants.
pub fn rewrite(e: &Expr, m: &Memory) -> Expr {
    let mut memo = HashMap::new();
    map_dag(e, &mut memo, &mut |leaf| substitute(leaf, m), &rebuild_raw)
}

fn substitute(leaf: &Expr, m: &Memory) -> Expr {
    match leaf.node() {
        Node::Atom(a) => match m.get(a).and_then(Verdict::as_bool) {
            Some(b) => Expr::constant(b),
            None => leaf.clone(),
        },
        _ => leaf.clone(),
    }
}

/// Constant folding with double-negation, idempotence, complement and
/// absorption rules applied locally at every node.
pub fn fold(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    map_dag(e, &mut memo, &mut |leaf| leaf.clone(), &rebuild_folded)
}

/// `fold(rewrite(e, m))` in one pass.
pub fn rewrite_fold(e: &Expr, m: &Memory) -> Expr {
    let mut memo = HashMap::new();
    map_dag(e, &mut memo, &mut |leaf| substitute(leaf, m), &rebuild_folded)
}

/// Distinct atoms of `e`, in atom order.
pub fn atoms_of(e: &Expr) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    let mut seen = std::collections::HashSet::new();
    collect_atoms(e, &mut seen, &mut out, usize::MAX);
    out
}

/// Like [`atoms_of`] but gives up once more than `limit` atoms are found.
pub fn atoms_within(e: &Expr, limit: usize) -> Option<BTreeSet<Atom>> {
    let mut out = BTreeSet::new();
    let mut seen = std::collections::HashSet::new();
    if collect_atoms(e, &mut seen, &mut out, limit) {
        Some(out)
    } else {
        None
    }
}

fn collect_atoms(
    e: &Expr,
    seen: &mut std::collections::HashSet<Key>,
    out: &mut BTreeSet<Atom>,
    limit: usize,
) -> bool {
    let mut stack = vec![e.clone()];
    while let Some(x) = stack.pop() {
        if !seen.insert(x.key()) {
            continue;
        }
        match x.node() {
            Node::Const(_) => {}
            Node::Atom(a) => {
                out.insert(a.clone());
                if out.len() > limit {
                    return false;
                }
            }
            Node::Not(y) => stack.push(y.clone()),
            Node::And(a, b) | Node::Or(a, b) => {
                stack.push(b.clone());
                stack.push(a.clone());
            }
        }
    }
    true
}

/// Names of monitors referenced by `e`.
pub fn dep(e: &Expr) -> BTreeSet<Name> {
    atoms_of(e)
        .into_iter()
        .filter_map(|a| match a {
            Atom::Monitor(n) | Atom::MonRef { id: n, .. } => Some(n),
            _ => None,
        })
        .collect()
}

/// Work done by the simplifier and evaluator; threaded through callers that
/// report metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Work {
    /// Invocations of the simplifier or the exact decision procedure on an
    /// expression that folding alone did not settle.
    pub simplifications: u64,
    /// Expressions evaluated against a memory.
    pub evaluations: u64,
}

impl Work {
    pub fn add(&mut self, other: Work) {
        self.simplifications += other.simplifications;
        self.evaluations += other.evaluations;
    }
}

/// Outcome of an exact decision on a non-constant expression.
enum Decision {
    Tautology,
    Contradiction,
    Contingent(Option<Expr>),
}

/// Exact decision; when the table route applies, also returns the two-level
/// cover (computed only if `want_cover`).
fn decide(e: &Expr, want_cover: bool) -> Decision {
    let limit = exact_threshold();
    if let Some(atoms) = atoms_within(e, limit) {
        let atoms: Vec<Atom> = atoms.into_iter().collect();
        let tt = table::truth_table(e, &atoms);
        if tt.is_ones() {
            return Decision::Tautology;
        }
        if tt.is_zero() {
            return Decision::Contradiction;
        }
        let cover = want_cover.then(|| table::isop_expr(&tt, &atoms));
        return Decision::Contingent(cover);
    }
    if !sat::satisfiable(e) {
        Decision::Contradiction
    } else if !sat::satisfiable(&Expr::not(e.clone())) {
        Decision::Tautology
    } else {
        Decision::Contingent(None)
    }
}

/// Returns an equivalent expression: `⊤` for tautologies, `⊥` for
/// contradictions, otherwise a constant-free reduced form.
pub fn simplify(e: &Expr) -> Expr {
    simplify_with(e, &mut Work::default())
}

pub fn simplify_with(e: &Expr, work: &mut Work) -> Expr {
    let folded = fold(e);
    settle(folded, work)
}

fn settle(folded: Expr, work: &mut Work) -> Expr {
    if folded.is_const() {
        return folded;
    }
    work.simplifications += 1;
    match decide(&folded, true) {
        Decision::Tautology => Expr::top(),
        Decision::Contradiction => Expr::bottom(),
        Decision::Contingent(Some(cover)) if cover.size() <= folded.size() => cover,
        Decision::Contingent(_) => folded,
    }
}

/// Folding only, then the table route when it applies. Used where exact
/// reduction of very large histories would dominate the cost.
pub fn simplify_bounded(e: &Expr, work: &mut Work) -> Expr {
    let folded = fold(e);
    if folded.is_const() || atoms_within(&folded, exact_threshold()).is_none() {
        return folded;
    }
    settle(folded, work)
}

/// Canonical two-level form: equal Boolean functions give structurally equal
/// results (for a fixed atom order).
pub fn canonical(e: &Expr) -> Result<Expr, ExprError> {
    let folded = fold(e);
    if folded.is_const() {
        return Ok(folded);
    }
    let atoms = atoms_of(&folded);
    let limit = exact_threshold();
    if atoms.len() > limit {
        return Err(ExprError::ThresholdExceeded { atoms: atoms.len(), limit });
    }
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    let tt = table::truth_table(&folded, &atoms);
    Ok(if tt.is_ones() {
        Expr::top()
    } else if tt.is_zero() {
        Expr::bottom()
    } else {
        table::isop_expr(&tt, &atoms)
    })
}

/// Evaluates `e` under `m`: `⊤`/`⊥` only when every completion of the
/// memory agrees.
pub fn eval(e: &Expr, m: &Memory) -> Verdict {
    eval_with(e, m, &mut Work::default())
}

pub fn eval_with(e: &Expr, m: &Memory, work: &mut Work) -> Verdict {
    work.evaluations += 1;
    let folded = rewrite_fold(e, m);
    if let Some(b) = folded.as_const() {
        return Verdict::from_bool(b);
    }
    work.simplifications += 1;
    match decide(&folded, false) {
        Decision::Tautology => Verdict::Top,
        Decision::Contradiction => Verdict::Bottom,
        Decision::Contingent(_) => Verdict::Unknown,
    }
}

/// Lookup-only evaluation: rewriting plus constant folding, no simplifier.
/// Sound but incomplete on partial memories; exact once every atom is known.
pub fn eval_lookup(e: &Expr, m: &Memory, work: &mut Work) -> Verdict {
    work.evaluations += 1;
    match rewrite_fold(e, m).as_const() {
        Some(b) => Verdict::from_bool(b),
        None => Verdict::Unknown,
    }
}

/// Boolean equivalence over the union of both atom sets.
pub fn equivalent(e1: &Expr, e2: &Expr) -> Result<bool, ExprError> {
    let mut atoms = atoms_of(e1);
    atoms.extend(atoms_of(e2));
    let limit = exact_threshold();
    if atoms.len() > limit {
        return Err(ExprError::ThresholdExceeded { atoms: atoms.len(), limit });
    }
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    Ok(table::truth_table(e1, &atoms) == table::truth_table(e2, &atoms))
}

/// Truth value under a total assignment; `None` if an atom is unassigned.
pub fn eval_total(e: &Expr, assign: &dyn Fn(&Atom) -> Option<bool>) -> Option<bool> {
    let mut memo: HashMap<Key, bool> = HashMap::new();
    eval_total_rec(e, assign, &mut memo)
}

fn eval_total_rec(
    e: &Expr,
    assign: &dyn Fn(&Atom) -> Option<bool>,
    memo: &mut HashMap<Key, bool>,
) -> Option<bool> {
    if let Some(v) = memo.get(&e.key()) {
        return Some(*v);
    }
    let v = match e.node() {
        Node::Const(b) => *b,
        Node::Atom(a) => assign(a)?,
        Node::Not(x) => !eval_total_rec(x, assign, memo)?,
        Node::And(a, b) => eval_total_rec(a, assign, memo)? & eval_total_rec(b, assign, memo)?,
        Node::Or(a, b) => eval_total_rec(a, assign, memo)? | eval_total_rec(b, assign, memo)?,
    };
    memo.insert(e.key(), v);
    Some(v)
}

/// Sum over the unfolded tree of `atom_cost` per atom, `const_cost` per
/// constant and `op_cost` per operator node (saturating).
pub fn tree_cost(e: &Expr, atom_cost: &dyn Fn(&Atom) -> u64, const_cost: u64, op_cost: u64) -> u64 {
    fn go(
        e: &Expr,
        atom_cost: &dyn Fn(&Atom) -> u64,
        c: u64,
        o: u64,
        memo: &mut HashMap<Key, u64>,
    ) -> u64 {
        if let Some(v) = memo.get(&e.key()) {
            return *v;
        }
        let v = match e.node() {
            Node::Const(_) => c,
            Node::Atom(a) => atom_cost(a),
            Node::Not(x) => go(x, atom_cost, c, o, memo).saturating_add(o),
            Node::And(a, b) | Node::Or(a, b) => go(a, atom_cost, c, o, memo)
                .saturating_add(go(b, atom_cost, c, o, memo))
                .saturating_add(o),
        };
        memo.insert(e.key(), v);
        v
    }
    go(e, atom_cost, const_cost, op_cost, &mut HashMap::new())
}
