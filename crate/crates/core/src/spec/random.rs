//! Random deterministic, complete specifications for experiments and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Specification, Transition};
use crate::expr::{canonical, Atom, Expr, Verdict};

#[derive(Debug, Clone)]
pub struct RandomSpecConfig {
    pub states: usize,
    pub aps: Vec<String>,
    /// Probability that a non-initial state carries a final verdict.
    pub final_prob: f64,
    /// Final-verdict states only loop on themselves.
    pub absorbing_finals: bool,
    /// Upper bound on distinct successors per state.
    pub max_branching: usize,
}

impl RandomSpecConfig {
    pub fn new(states: usize, aps: &[&str]) -> Self {
        RandomSpecConfig {
            states,
            aps: aps.iter().map(|s| s.to_string()).collect(),
            final_prob: 0.3,
            absorbing_finals: false,
            max_branching: 3,
        }
    }
}

/// Each state splits the minterms over `aps` among a few random targets;
/// labels are the canonical covers of those minterm sets, so the result is
/// deterministic and complete by construction.
pub fn random_specification<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomSpecConfig) -> Specification {
    let n = cfg.states.max(1);
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let verdicts: Vec<Verdict> = (0..n)
        .map(|i| {
            if i > 0 && rng.random_bool(cfg.final_prob) {
                if rng.random_bool(0.5) {
                    Verdict::Top
                } else {
                    Verdict::Bottom
                }
            } else {
                Verdict::Unknown
            }
        })
        .collect();
    let k = cfg.aps.len();
    let rows = 1usize << k;
    let mut transitions = Vec::new();
    for q in 0..n {
        if cfg.absorbing_finals && verdicts[q].is_final() {
            transitions.push(Transition { from: q, to: q, label: Expr::top() });
            continue;
        }
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        let width = rng.random_range(1..=cfg.max_branching.max(1).min(n).min(rows));
        let targets = &all[..width];
        let mut minterms: Vec<Vec<usize>> = vec![Vec::new(); width];
        // Every chosen target gets at least one row.
        let mut order: Vec<usize> = (0..rows).collect();
        order.shuffle(rng);
        for (i, row) in order.into_iter().enumerate() {
            let slot = if i < width { i } else { rng.random_range(0..width) };
            minterms[slot].push(row);
        }
        let mut outs: Vec<(usize, Expr)> = targets
            .iter()
            .zip(minterms)
            .map(|(to, rows)| {
                let cover = Expr::or_all(rows.into_iter().map(|r| {
                    Expr::and_all((0..k).map(|v| {
                        let lit = Expr::atom(Atom::plain(&cfg.aps[v]));
                        if r >> v & 1 == 1 {
                            lit
                        } else {
                            Expr::not(lit)
                        }
                    }))
                }));
                (*to, canonical(&cover).expect("few propositions"))
            })
            .collect();
        outs.sort_by_key(|(to, _)| *to);
        for (to, label) in outs {
            transitions.push(Transition { from: q, to, label });
        }
    }
    Specification::new(names, 0, verdicts, transitions).expect("well-formed")
}

/// Samples until every state can reach a final verdict.
pub fn random_monitorable_specification<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomSpecConfig) -> Specification {
    assert!(cfg.final_prob > 0.0 && cfg.states > 1, "no final verdict can ever be sampled");
    loop {
        let s = random_specification(rng, cfg);
        if crate::analysis::ca_monitorable(&s, &crate::analysis::default_finals()).0 {
            return s;
        }
    }
}
