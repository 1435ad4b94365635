//! Satisfiability for expressions too wide for truth tables: Tseitin
//! clausification followed by DPLL with two-watched-literal unit propagation.
//! Decisions are made on input atoms only, in atom order; gate variables are
//! always implied by propagation.

use std::collections::{BTreeMap, HashMap};

use super::{Atom, Expr, Key, Node};

/// Literal encoding: `2 * var + negated`.
type Lit = u32;

fn lit(var: u32, neg: bool) -> Lit {
    2 * var + neg as u32
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

struct Cnf {
    vars: u32,
    clauses: Vec<Vec<Lit>>,
    inputs: BTreeMap<Atom, u32>,
}

impl Cnf {
    fn fresh(&mut self) -> u32 {
        self.vars += 1;
        self.vars - 1
    }

    /// Literal equivalent to `e`; constants become a forced variable.
    fn encode(&mut self, e: &Expr, memo: &mut HashMap<Key, Lit>) -> Lit {
        if let Some(l) = memo.get(&e.key()) {
            return *l;
        }
        let l = match e.node() {
            Node::Const(b) => {
                let v = self.fresh();
                self.clauses.push(vec![lit(v, !*b)]);
                lit(v, false)
            }
            Node::Atom(a) => {
                let v = match self.inputs.get(a) {
                    Some(v) => *v,
                    None => {
                        let v = self.fresh();
                        self.inputs.insert(a.clone(), v);
                        v
                    }
                };
                lit(v, false)
            }
            Node::Not(x) => neg(self.encode(x, memo)),
            Node::And(a, b) => {
                let la = self.encode(a, memo);
                let lb = self.encode(b, memo);
                let g = lit(self.fresh(), false);
                self.clauses.push(vec![neg(g), la]);
                self.clauses.push(vec![neg(g), lb]);
                self.clauses.push(vec![g, neg(la), neg(lb)]);
                g
            }
            Node::Or(a, b) => {
                let la = self.encode(a, memo);
                let lb = self.encode(b, memo);
                let g = lit(self.fresh(), false);
                self.clauses.push(vec![g, neg(la)]);
                self.clauses.push(vec![g, neg(lb)]);
                self.clauses.push(vec![neg(g), la, lb]);
                g
            }
        };
        memo.insert(e.key(), l);
        l
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Val {
    Unset,
    True,
    False,
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    vals: Vec<Val>,
    trail: Vec<Lit>,
    head: usize,
}

impl Solver {
    fn value(&self, l: Lit) -> Val {
        match self.vals[(l >> 1) as usize] {
            Val::Unset => Val::Unset,
            v => {
                let pos = v == Val::True;
                if (l & 1 == 0) == pos {
                    Val::True
                } else {
                    Val::False
                }
            }
        }
    }

    fn assign(&mut self, l: Lit) {
        self.vals[(l >> 1) as usize] = if l & 1 == 0 { Val::True } else { Val::False };
        self.trail.push(l);
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.head < self.trail.len() {
            let falsified = neg(self.trail[self.head]);
            self.head += 1;
            let mut ws = std::mem::take(&mut self.watches[falsified as usize]);
            let mut i = 0;
            let mut ok = true;
            while i < ws.len() {
                let ci = ws[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                if self.value(other) == Val::True {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[ci].len() {
                    let cand = self.clauses[ci][k];
                    if self.value(cand) != Val::False {
                        self.clauses[ci].swap(1, k);
                        self.watches[cand as usize].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                match self.value(other) {
                    Val::False => {
                        ok = false;
                        break;
                    }
                    Val::Unset => self.assign(other),
                    Val::True => {}
                }
                i += 1;
            }
            self.watches[falsified as usize].extend(ws);
            if !ok {
                return false;
            }
        }
        true
    }

    fn backtrack(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            self.vals[(l >> 1) as usize] = Val::Unset;
        }
        self.head = len;
    }
}

/// Whether some assignment to the atoms of `e` makes it true.
pub(crate) fn satisfiable(e: &Expr) -> bool {
    let mut cnf = Cnf { vars: 0, clauses: Vec::new(), inputs: BTreeMap::new() };
    let root = cnf.encode(e, &mut HashMap::new());
    cnf.clauses.push(vec![root]);
    let order: Vec<u32> = cnf.inputs.values().copied().collect();
    let nlits = 2 * cnf.vars as usize;
    let mut s = Solver {
        clauses: Vec::new(),
        watches: vec![Vec::new(); nlits],
        vals: vec![Val::Unset; cnf.vars as usize],
        trail: Vec::new(),
        head: 0,
    };
    let mut units = Vec::new();
    for mut c in cnf.clauses {
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == neg(w[1])) {
            continue;
        }
        if c.len() == 1 {
            units.push(c[0]);
            continue;
        }
        let ci = s.clauses.len();
        s.watches[c[0] as usize].push(ci);
        s.watches[c[1] as usize].push(ci);
        s.clauses.push(c);
    }
    for u in units {
        match s.value(u) {
            Val::False => return false,
            Val::Unset => s.assign(u),
            Val::True => {}
        }
    }
    if !s.propagate() {
        return false;
    }
    dpll(&mut s, &order)
}

fn dpll(s: &mut Solver, order: &[u32]) -> bool {
    // Explicit stack of (trail length before decision, decision literal, flipped).
    let mut stack: Vec<(usize, Lit, bool)> = Vec::new();
    loop {
        let next = order.iter().find(|v| s.vals[**v as usize] == Val::Unset);
        let Some(&v) = next else {
            return true;
        };
        let l = lit(v, false);
        stack.push((s.trail.len(), l, false));
        s.assign(l);
        let mut ok = s.propagate();
        while !ok {
            // Flip the most recent unflipped decision.
            loop {
                let Some((len, l, flipped)) = stack.pop() else {
                    return false;
                };
                s.backtrack(len);
                if !flipped {
                    stack.push((len, neg(l), true));
                    s.assign(neg(l));
                    break;
                }
            }
            ok = s.propagate();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Expr {
        Expr::plain(n)
    }

    #[test]
    fn basic_decisions() {
        assert!(satisfiable(&a("x")));
        assert!(!satisfiable(&Expr::and(a("x"), Expr::not(a("x")))));
        assert!(satisfiable(&Expr::or(a("x"), Expr::not(a("x")))));
        assert!(!satisfiable(&Expr::bottom()));
        assert!(satisfiable(&Expr::top()));
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p_ij: pigeon i in hole j.
        let p = |i: usize, j: usize| a(&format!("p{i}{j}"));
        let mut parts = Vec::new();
        for i in 0..3 {
            parts.push(Expr::or(p(i, 0), p(i, 1)));
        }
        for j in 0..2 {
            for i in 0..3 {
                for k in (i + 1)..3 {
                    parts.push(Expr::not(Expr::and(p(i, j), p(k, j))));
                }
            }
        }
        assert!(!satisfiable(&Expr::and_all(parts)));
    }
}
