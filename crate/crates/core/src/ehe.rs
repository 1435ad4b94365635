//! Execution history encodings: for each (round, state) the condition under
//! which the automaton is in that state at that round.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{
    encode, equivalent, eval_lookup, eval_with, fold, rewrite, simplify_bounded, simplify_with, Encoder, Expr,
    ExprError, Verdict, Work,
};
use crate::replicated::{Dict, Memory};
use crate::spec::{Specification, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EheError {
    #[error("round {0} is not encoded")]
    UndefinedRound(u32),
    #[error("encodings of different automata cannot be merged")]
    AutomatonMismatch,
}

/// How new or rewritten entries are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Exact decision and two-level cover at any width.
    Simplify,
    /// Exact reduction within the table threshold, folding above it.
    #[default]
    Bounded,
    /// Constant folding only; never counted as a simplification.
    Fold,
}

impl Reduction {
    pub fn apply(self, e: &Expr, work: &mut Work) -> Expr {
        match self {
            Reduction::Simplify => simplify_with(e, work),
            Reduction::Bounded => simplify_bounded(e, work),
            Reduction::Fold => fold(e),
        }
    }
}

/// How entries are evaluated against a memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resolution {
    #[default]
    Exact,
    /// Rewriting and folding only; sound, complete once all atoms are known.
    Lookup,
}

impl Resolution {
    pub fn eval(self, e: &Expr, m: &Memory, work: &mut Work) -> Verdict {
        match self {
            Resolution::Exact => eval_with(e, m, work),
            Resolution::Lookup => eval_lookup(e, m, work),
        }
    }
}

/// Result of scanning the encoded rounds against a memory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Scan {
    /// First round, ascending, whose reached state carries a final verdict.
    pub first_final: Option<(u32, StateId, Verdict)>,
    /// Latest round whose state is known, up to where the scan stopped.
    pub resolved: Option<(u32, StateId)>,
}

#[derive(Clone)]
pub struct Ehe {
    spec: Arc<Specification>,
    entries: Dict<(u32, StateId), Expr>,
}

impl Ehe {
    /// `[0 ↦ q0 ↦ ⊤]`.
    pub fn init(spec: Arc<Specification>) -> Ehe {
        let q0 = spec.initial();
        Ehe::anchored(spec, 0, q0)
    }

    /// `[t ↦ q ↦ ⊤]`.
    pub fn anchored(spec: Arc<Specification>, t: u32, q: StateId) -> Ehe {
        let mut entries = Dict::new();
        entries.insert((t, q), Expr::top());
        Ehe { spec, entries }
    }

    pub fn spec(&self) -> &Arc<Specification> {
        &self.spec
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, StateId, &Expr)> {
        self.entries.iter().map(|((t, q), e)| (*t, *q, e))
    }

    pub fn get(&self, t: u32, q: StateId) -> Option<&Expr> {
        self.entries.query(&(t, q))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest encoded round.
    pub fn bounds(&self) -> Option<(u32, u32)> {
        let lo = self.entries.keys().next()?.0;
        let hi = self.entries.keys().next_back()?.0;
        Some((lo, hi))
    }

    /// Last encoded round (`getEnd`).
    pub fn end(&self) -> Option<u32> {
        self.bounds().map(|(_, hi)| hi)
    }

    pub fn rounds(&self) -> BTreeSet<u32> {
        self.entries.keys().map(|(t, _)| *t).collect()
    }

    pub fn has_round(&self, t: u32) -> bool {
        self.at(t).next().is_some()
    }

    /// Entries of round `t`, by state.
    pub fn at(&self, t: u32) -> impl Iterator<Item = (StateId, &Expr)> {
        self.entries.iter().filter(move |((r, _), _)| *r == t).map(|((_, q), e)| (*q, e))
    }

    fn check(&self, t: u32) -> Result<(), EheError> {
        if self.has_round(t) {
            Ok(())
        } else {
            Err(EheError::UndefinedRound(t))
        }
    }

    /// Successors of every state present at round `t`.
    pub fn next(&self, t: u32) -> Result<BTreeSet<StateId>, EheError> {
        self.check(t)?;
        Ok(self.at(t).flat_map(|(q, _)| self.spec.successors(q)).collect())
    }

    /// Condition for being in `target` at round `t + 1`.
    pub fn to(&self, t: u32, target: StateId, enc: Encoder) -> Result<Expr, EheError> {
        self.check(t)?;
        let mut out = Expr::bottom();
        for (q, e) in self.at(t) {
            if e.as_const() == Some(false) {
                continue;
            }
            for tr in self.spec.outgoing(q).filter(|tr| tr.to == target) {
                out = Expr::disj(out, Expr::conj(e.clone(), encode(&tr.label, enc)));
            }
        }
        Ok(out)
    }

    pub fn mov(&self, ts: u32, te: u32) -> Result<Ehe, EheError> {
        self.mov_with(ts, te, Reduction::default(), &mut Work::default())
    }

    /// Extends the encoding one round at a time from `ts` to `te`.
    pub fn mov_with(&self, ts: u32, te: u32, reduce: Reduction, work: &mut Work) -> Result<Ehe, EheError> {
        self.check(ts)?;
        let mut p = self.clone();
        for t in ts..te {
            let enc = Encoder::Timestamp(t + 1);
            for target in p.next(t)? {
                let e = p.to(t, target, enc)?;
                let e = match p.entries.query(&(t + 1, target)) {
                    Some(old) => Expr::disj(old.clone(), e),
                    None => e,
                };
                p.entries.insert((t + 1, target), reduce.apply(&e, work));
            }
        }
        Ok(p)
    }

    /// Extends to `t` from the last encoded round; no-op if already there.
    pub fn extend_to(&mut self, t: u32, reduce: Reduction, work: &mut Work) {
        if let Some(end) = self.end() {
            if end < t {
                *self = self.mov_with(end, t, reduce, work).expect("end round is encoded");
            }
        }
    }

    /// Copies round `t` to `t + 1` unchanged: a round in which nothing was
    /// observed and the automaton does not move. `t` must be the last round.
    pub fn stutter(&mut self, t: u32) -> Result<(), EheError> {
        self.check(t)?;
        if self.end() != Some(t) {
            return Err(EheError::UndefinedRound(t + 1));
        }
        let row: Vec<(StateId, Expr)> = self.at(t).map(|(q, e)| (q, e.clone())).collect();
        for (q, e) in row {
            self.entries.insert((t + 1, q), e);
        }
        Ok(())
    }

    pub fn sreach(&self, m: &Memory, t: u32) -> Result<Option<StateId>, EheError> {
        self.sreach_with(m, t, Resolution::Exact, &mut Work::default())
    }

    pub fn sreach_with(
        &self,
        m: &Memory,
        t: u32,
        resolve: Resolution,
        work: &mut Work,
    ) -> Result<Option<StateId>, EheError> {
        self.check(t)?;
        Ok(self.at(t).find(|(_, e)| resolve.eval(e, m, work) == Verdict::Top).map(|(q, _)| q))
    }

    /// Every state whose entry at `t` evaluates to `⊤` (at most one for a
    /// well-formed encoding).
    pub fn reached(&self, m: &Memory, t: u32) -> Vec<StateId> {
        let mut w = Work::default();
        self.at(t).filter(|(_, e)| eval_with(e, m, &mut w) == Verdict::Top).map(|(q, _)| q).collect()
    }

    pub fn verdict_at(&self, m: &Memory, t: u32) -> Result<Verdict, EheError> {
        self.verdict_at_with(m, t, Resolution::Exact, &mut Work::default())
    }

    pub fn verdict_at_with(&self, m: &Memory, t: u32, resolve: Resolution, work: &mut Work) -> Result<Verdict, EheError> {
        Ok(self.sreach_with(m, t, resolve, work)?.map_or(Verdict::Unknown, |q| self.spec.verdict(q)))
    }

    /// Walks the rounds from `from` upwards, stopping at the first final
    /// verdict.
    pub fn scan(&self, m: &Memory, from: u32, resolve: Resolution, work: &mut Work) -> Scan {
        self.scan_rounds(m, from, resolve, work, false)
    }

    /// Like [`Ehe::scan`], but stops at the first round whose state is not
    /// known: later rounds are only trusted once every earlier one is.
    pub fn scan_contiguous(&self, m: &Memory, from: u32, resolve: Resolution, work: &mut Work) -> Scan {
        self.scan_rounds(m, from, resolve, work, true)
    }

    fn scan_rounds(&self, m: &Memory, from: u32, resolve: Resolution, work: &mut Work, contiguous: bool) -> Scan {
        let mut out = Scan::default();
        for t in self.rounds().into_iter().filter(|t| *t >= from) {
            let Some(q) = self.sreach_with(m, t, resolve, work).expect("round is encoded") else {
                if contiguous {
                    break;
                }
                continue;
            };
            out.resolved = Some((t, q));
            let v = self.spec.verdict(q);
            if v.is_final() {
                out.first_final = Some((t, q, v));
                break;
            }
        }
        out
    }

    /// `⊎∨`: disjunction on shared entries, union elsewhere.
    pub fn merge(&self, other: &Ehe) -> Result<Ehe, EheError> {
        if !Arc::ptr_eq(&self.spec, &other.spec) && *self.spec != *other.spec {
            return Err(EheError::AutomatonMismatch);
        }
        Ok(Ehe {
            spec: self.spec.clone(),
            entries: self.entries.merge_with(&other.entries, |a, b| Expr::disj(a.clone(), b.clone())),
        })
    }

    pub fn inc(&self, m: &Memory) -> Ehe {
        self.inc_with(m, Reduction::default(), &mut Work::default())
    }

    /// Embeds a memory into every entry.
    pub fn inc_with(&self, m: &Memory, reduce: Reduction, work: &mut Work) -> Ehe {
        if m.is_empty() {
            return self.clone();
        }
        Ehe {
            spec: self.spec.clone(),
            entries: self.entries.iter().map(|(k, e)| (*k, reduce.apply(&rewrite(e, m), work))).collect(),
        }
    }

    /// Forgets everything before round `t`, where the state is known to be
    /// `q`: rounds `< t` go, `(t, q)` becomes `⊤` and is the only entry of
    /// round `t`, and later rounds have `m` embedded.
    pub fn rebase(&mut self, t: u32, q: StateId, m: &Memory, reduce: Reduction, work: &mut Work) {
        let mut entries: Dict<(u32, StateId), Expr> = Dict::new();
        entries.insert((t, q), Expr::top());
        for ((r, s), e) in self.entries.iter() {
            if *r > t {
                entries.insert((*r, *s), reduce.apply(&rewrite(e, m), work));
            }
        }
        self.entries = entries;
    }

    /// Rebases on the latest resolvable round, if any. Returns that round.
    pub fn drop_resolved(&mut self, m: &Memory) -> Option<u32> {
        let mut w = Work::default();
        self.drop_resolved_with(m, Resolution::Exact, Reduction::default(), &mut w)
    }

    pub fn drop_resolved_with(
        &mut self,
        m: &Memory,
        resolve: Resolution,
        reduce: Reduction,
        work: &mut Work,
    ) -> Option<u32> {
        let mut last = None;
        for t in self.rounds().into_iter().rev() {
            if let Some(q) = self.sreach_with(m, t, resolve, work).expect("round is encoded") {
                last = Some((t, q));
                break;
            }
        }
        let (t, q) = last?;
        self.rebase(t, q, m, reduce, work);
        Some(t)
    }

    /// Entry-wise Boolean equivalence over the same key set.
    pub fn equivalent_to(&self, other: &Ehe) -> Result<bool, ExprError> {
        if self.entries.len() != other.entries.len() {
            return Ok(false);
        }
        for ((k, a), (l, b)) in self.entries.iter().zip(other.entries.iter()) {
            if k != l || !equivalent(a, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Table rows `(round, state name, expression text)`.
    pub fn dump(&self) -> Vec<(u32, String, String)> {
        self.entries().map(|(t, q, e)| (t, self.spec.name(q).to_string(), e.to_string())).collect()
    }
}

impl PartialEq for Ehe {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.spec, &other.spec) || *self.spec == *other.spec) && self.entries == other.entries
    }
}

impl fmt::Debug for Ehe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Ehe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, q, e) in self.dump() {
            writeln!(f, "{t}\t{q}\t{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
