//! Bit-parallel truth tables and irredundant sum-of-products covers.

use std::collections::HashMap;

use super::{Atom, Expr, Key, Node};

/// Truth table over `vars` variables. Row `r` assigns variable `i` the value
/// of bit `i` of `r`. Tables under 64 rows use the low bits of one word.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Tt {
    vars: usize,
    words: Vec<u64>,
}

fn word_mask(vars: usize) -> u64 {
    if vars >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << vars)) - 1
    }
}

const PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

impl Tt {
    fn nwords(vars: usize) -> usize {
        if vars <= 6 {
            1
        } else {
            1 << (vars - 6)
        }
    }

    pub(crate) fn zero(vars: usize) -> Self {
        Tt { vars, words: vec![0; Tt::nwords(vars)] }
    }

    pub(crate) fn ones(vars: usize) -> Self {
        Tt { vars, words: vec![word_mask(vars); Tt::nwords(vars)] }
    }

    fn var(vars: usize, i: usize) -> Self {
        let mask = word_mask(vars);
        let words = (0..Tt::nwords(vars))
            .map(|w| {
                if i < 6 {
                    PATTERNS[i] & mask
                } else if (w >> (i - 6)) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                }
            })
            .collect();
        Tt { vars, words }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub(crate) fn is_ones(&self) -> bool {
        let m = word_mask(self.vars);
        self.words.iter().all(|w| *w == m)
    }

    fn zip(&self, o: &Tt, f: impl Fn(u64, u64) -> u64) -> Tt {
        let words = self.words.iter().zip(&o.words).map(|(a, b)| f(*a, *b)).collect();
        Tt { vars: self.vars, words }
    }

    fn and(&self, o: &Tt) -> Tt {
        self.zip(o, |a, b| a & b)
    }

    fn or(&self, o: &Tt) -> Tt {
        self.zip(o, |a, b| a | b)
    }

    fn and_not(&self, o: &Tt) -> Tt {
        self.zip(o, |a, b| a & !b)
    }

    fn not(&self) -> Tt {
        let m = word_mask(self.vars);
        Tt { vars: self.vars, words: self.words.iter().map(|w| !w & m).collect() }
    }

    /// Cofactors on the top variable: (x = 0, x = 1), each over `vars - 1`.
    fn halves(&self) -> (Tt, Tt) {
        let v = self.vars - 1;
        if self.vars <= 6 {
            let half = 1u32 << v;
            let m = word_mask(v);
            let w = self.words[0];
            (Tt { vars: v, words: vec![w & m] }, Tt { vars: v, words: vec![(w >> half) & m] })
        } else {
            let n = self.words.len() / 2;
            (
                Tt { vars: v, words: self.words[..n].to_vec() },
                Tt { vars: v, words: self.words[n..].to_vec() },
            )
        }
    }

    /// Inverse of [`Tt::halves`].
    fn join(lo: &Tt, hi: &Tt) -> Tt {
        let vars = lo.vars + 1;
        if vars <= 6 {
            let half = 1u32 << lo.vars;
            Tt { vars, words: vec![lo.words[0] | (hi.words[0] << half)] }
        } else {
            let mut words = lo.words.clone();
            words.extend_from_slice(&hi.words);
            Tt { vars, words }
        }
    }
}

/// Truth table of `e` with variable `i` bound to `atoms[i]`.
pub(crate) fn truth_table(e: &Expr, atoms: &[Atom]) -> Tt {
    let vars = atoms.len();
    let index: HashMap<&Atom, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut memo: HashMap<Key, Tt> = HashMap::new();
    tt_rec(e, vars, &index, &mut memo)
}

fn tt_rec(e: &Expr, vars: usize, index: &HashMap<&Atom, usize>, memo: &mut HashMap<Key, Tt>) -> Tt {
    if let Some(t) = memo.get(&e.key()) {
        return t.clone();
    }
    let t = match e.node() {
        Node::Const(true) => Tt::ones(vars),
        Node::Const(false) => Tt::zero(vars),
        Node::Atom(a) => Tt::var(vars, index[a]),
        Node::Not(x) => tt_rec(x, vars, index, memo).not(),
        Node::And(a, b) => {
            let ta = tt_rec(a, vars, index, memo);
            ta.and(&tt_rec(b, vars, index, memo))
        }
        Node::Or(a, b) => {
            let ta = tt_rec(a, vars, index, memo);
            ta.or(&tt_rec(b, vars, index, memo))
        }
    };
    memo.insert(e.key(), t.clone());
    t
}

/// A product term: (variable, polarity) literals.
type Cube = Vec<(usize, bool)>;

/// Minato-Morreale irredundant cover of any function between `lower` and
/// `upper`. Returns the cubes and the table of the cover.
fn isop(lower: &Tt, upper: &Tt) -> (Vec<Cube>, Tt) {
    if lower.is_zero() {
        return (Vec::new(), Tt::zero(lower.vars));
    }
    if upper.is_ones() {
        return (vec![Vec::new()], Tt::ones(lower.vars));
    }
    let x = lower.vars - 1;
    let (l0, l1) = lower.halves();
    let (u0, u1) = upper.halves();
    let (c0, r0) = isop(&l0.and_not(&u1), &u0);
    let (c1, r1) = isop(&l1.and_not(&u0), &u1);
    let rest = l0.and_not(&r0).or(&l1.and_not(&r1));
    let (cs, rs) = isop(&rest, &u0.and(&u1));
    let mut cubes = Vec::with_capacity(c0.len() + c1.len() + cs.len());
    for mut c in c0 {
        c.push((x, false));
        cubes.push(c);
    }
    for mut c in c1 {
        c.push((x, true));
        cubes.push(c);
    }
    cubes.extend(cs);
    let cover = Tt::join(&r0.or(&rs), &r1.or(&rs));
    (cubes, cover)
}

/// Two-level expression for `tt` (assumed neither constant).
pub(crate) fn isop_expr(tt: &Tt, atoms: &[Atom]) -> Expr {
    let (cubes, _) = isop(tt, tt);
    let terms = cubes.into_iter().map(|mut cube| {
        cube.sort_unstable();
        Expr::and_all(cube.into_iter().map(|(v, pos)| {
            let lit = Expr::atom(atoms[v].clone());
            if pos {
                lit
            } else {
                Expr::not(lit)
            }
        }))
    });
    Expr::or_all(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_patterns_match_row_bits() {
        for vars in 1..9 {
            for i in 0..vars {
                let t = Tt::var(vars, i);
                for row in 0..(1usize << vars) {
                    let bit = (t.words[row / 64] >> (row % 64)) & 1 == 1;
                    assert_eq!(bit, (row >> i) & 1 == 1, "vars={vars} i={i} row={row}");
                }
            }
        }
    }

    #[test]
    fn halves_and_join_round_trip() {
        for vars in 1..9 {
            let t = Tt::var(vars, 0).or(&Tt::var(vars, vars - 1).not());
            let (lo, hi) = t.halves();
            assert_eq!(Tt::join(&lo, &hi), t);
        }
    }

    #[test]
    fn isop_cover_equals_function() {
        let vars = 7;
        let f = Tt::var(vars, 0).and(&Tt::var(vars, 3)).or(&Tt::var(vars, 6).and_not(&Tt::var(vars, 1)));
        let (_, cover) = isop(&f, &f);
        assert_eq!(cover, f);
    }
}
