//! Run metrics: message sizes, per-round work counters, information delay
//! and load balance.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ehe::Ehe;
use crate::expr::{tree_cost, Atom, Expr, Verdict};
use crate::replicated::Memory;

/// Byte costs of the encoded primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeModel {
    pub char_bytes: u64,
    pub int_bytes: u64,
    pub verdict_bytes: u64,
}

impl Default for SizeModel {
    fn default() -> Self {
        SizeModel { char_bytes: 1, int_bytes: 4, verdict_bytes: 1 }
    }
}

/// What a message carries.
#[derive(Debug, Clone)]
pub enum Payload {
    Mem(Memory),
    Ehe(Ehe),
    /// A final verdict of the instance of `id` started at `round`.
    Verdict { id: String, round: u32, verdict: Verdict },
    Kill { id: String },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Mem(_) => "mem",
            Payload::Ehe(_) => "ehe",
            Payload::Verdict { .. } => "verdict",
            Payload::Kill { .. } => "kill",
        }
    }
}

impl SizeModel {
    pub fn text(&self, s: &str) -> u64 {
        self.char_bytes * s.chars().count() as u64
    }

    /// Timestamped atoms pay for the timestamp.
    pub fn atom(&self, a: &Atom) -> u64 {
        let stamp = if a.round().is_some() { self.int_bytes } else { 0 };
        stamp + self.text(a.name())
    }

    /// Atoms, plus one byte per operator node; constants cost a verdict.
    pub fn expr(&self, e: &Expr) -> u64 {
        tree_cost(e, &|a| self.atom(a), self.verdict_bytes, 1)
    }

    pub fn memory(&self, m: &Memory) -> u64 {
        m.iter().map(|(a, _)| self.atom(a) + self.verdict_bytes).sum()
    }

    /// Each entry: round and state as integers, then the expression.
    pub fn ehe(&self, p: &Ehe) -> u64 {
        p.entries().map(|(_, _, e)| 2 * self.int_bytes + self.expr(e)).sum()
    }

    pub fn payload(&self, p: &Payload) -> u64 {
        match p {
            Payload::Mem(m) => self.memory(m),
            Payload::Ehe(e) => self.ehe(e),
            Payload::Verdict { id, .. } => self.text(id) + self.int_bytes + self.verdict_bytes,
            Payload::Kill { id } => self.text(id),
        }
    }
}

/// Counters of one monitor in one round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub simplifications: u64,
    pub evaluations: u64,
    pub messages: u64,
    pub bytes: u64,
}

/// Entries left after a rebase, for the size bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RebaseSample {
    pub round: u32,
    /// Rounds between the resolved round and the current one.
    pub delay: u32,
    /// Entries after the resolved round.
    pub pending_entries: usize,
    pub states: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub components: Vec<String>,
    /// Monitor to component.
    pub placement: BTreeMap<String, String>,
    /// Index `t - 1`; keyed by monitor.
    pub rounds: Vec<BTreeMap<String, RoundStats>>,
    pub delays: Vec<u32>,
    pub rebases: Vec<RebaseSample>,
    /// Monitors holding an encoding at the end of each round.
    pub active: Vec<usize>,
    /// Distinct sizes seen per message kind.
    pub message_sizes: BTreeMap<String, BTreeSet<u64>>,
    pub run_length: u32,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Counter {
    Simplifications,
    Evaluations,
}

impl MetricsRecord {
    pub fn new(components: Vec<String>, placement: BTreeMap<String, String>) -> Self {
        MetricsRecord { components, placement, ..Default::default() }
    }

    pub fn round_mut(&mut self, t: u32) -> &mut BTreeMap<String, RoundStats> {
        while self.rounds.len() < t as usize {
            self.rounds.push(BTreeMap::new());
        }
        &mut self.rounds[t as usize - 1]
    }

    pub fn note_message(&mut self, t: u32, from: &str, kind: &str, bytes: u64) {
        let s = self.round_mut(t).entry(from.to_string()).or_default();
        s.messages += 1;
        s.bytes += bytes;
        self.message_sizes.entry(kind.to_string()).or_default().insert(bytes);
    }

    /// Per round, the counter summed per component, in `components` order.
    pub fn per_component(&self, counter: Counter) -> Vec<Vec<u64>> {
        self.rounds
            .iter()
            .map(|row| {
                self.components
                    .iter()
                    .map(|c| {
                        row.iter()
                            .filter(|(m, _)| self.placement.get(*m) == Some(c))
                            .map(|(_, s)| match counter {
                                Counter::Simplifications => s.simplifications,
                                Counter::Evaluations => s.evaluations,
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn messages_per_round(&self) -> Vec<u64> {
        self.rounds.iter().map(|r| r.values().map(|s| s.messages).sum()).collect()
    }

    pub fn total_messages(&self) -> u64 {
        self.messages_per_round().iter().sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.rounds.iter().flat_map(|r| r.values()).map(|s| s.bytes).sum()
    }
}

/// `(1/n) Σ_t Σ_c (s_t_c / s_t − 1/|C|)²`; rounds with `s_t = 0` add 0.
pub fn convergence_of(per_round: &[Vec<u64>], components: usize, n: u32) -> f64 {
    if n == 0 || components == 0 {
        return 0.0;
    }
    let share = 1.0 / components as f64;
    let total: f64 = per_round
        .iter()
        .map(|row| {
            let s: u64 = row.iter().sum();
            if s == 0 {
                return 0.0;
            }
            let mut acc: f64 = row.iter().map(|x| (*x as f64 / s as f64 - share).powi(2)).sum();
            // Components absent from the row did no work.
            acc += (components.saturating_sub(row.len())) as f64 * share * share;
            acc
        })
        .sum();
    total / n as f64
}

pub fn convergence(rec: &MetricsRecord, counter: Counter) -> f64 {
    convergence_of(&rec.per_component(counter), rec.components.len(), rec.run_length)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Sum of delay samples over their count (0 without samples).
    pub delay: f64,
    /// Messages per round of the run.
    pub msgs: f64,
    /// Bytes per round of the run.
    pub data: f64,
    /// Per round, the largest per-component simplification count; averaged
    /// over the run.
    pub s_crit: f64,
    /// Largest simplification count of one monitor in one round.
    pub s_max: u64,
    pub conv: f64,
}

pub fn summarize(rec: &MetricsRecord) -> Report {
    let n = rec.run_length.max(1) as f64;
    let delay = if rec.delays.is_empty() {
        0.0
    } else {
        rec.delays.iter().map(|d| *d as f64).sum::<f64>() / rec.delays.len() as f64
    };
    let simp = rec.per_component(Counter::Simplifications);
    let s_crit = simp.iter().map(|row| row.iter().copied().max().unwrap_or(0) as f64).sum::<f64>() / n;
    let s_max = rec.rounds.iter().flat_map(|r| r.values()).map(|s| s.simplifications).max().unwrap_or(0);
    Report {
        delay,
        msgs: rec.total_messages() as f64 / n,
        data: rec.total_bytes() as f64 / n,
        s_crit,
        s_max,
        conv: convergence(rec, Counter::Simplifications),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::fixtures;
    use std::sync::Arc;

    #[test]
    fn sizes() {
        let s = SizeModel::default();
        assert_eq!(s.memory(&Memory::new()), 0);
        let m: Memory = [(Atom::timed(1, "a"), Verdict::Top)].into_iter().collect();
        assert_eq!(s.memory(&m), 6);
        assert_eq!(s.payload(&Payload::Kill { id: "m01".into() }), 3);
        assert_eq!(s.payload(&Payload::Verdict { id: "m01".into(), round: 9, verdict: Verdict::Top }), 8);
        // `a && !b`: two plain atoms of one char, two operator nodes.
        assert_eq!(s.expr(&parse_expr("a && !b").unwrap()), 4);
        let p = Ehe::init(Arc::new(fixtures::eventually_or()));
        assert_eq!(s.ehe(&p), 8 + 1);
    }

    #[test]
    fn convergence_cases() {
        assert!((convergence_of(&[vec![3, 1]], 2, 1) - 0.125).abs() < 1e-12);
        assert_eq!(convergence_of(&[vec![2, 2, 2]], 3, 1), 0.0);
        assert_eq!(convergence_of(&[vec![0, 0]], 2, 1), 0.0);
        for c in 2..7usize {
            let mut row = vec![0u64; c];
            row[0] = 5;
            let k = c as f64;
            let closed = (1.0 - 1.0 / k).powi(2) + (k - 1.0) / (k * k);
            let rounds = vec![row; 4];
            assert!((convergence_of(&rounds, c, 4) - closed).abs() < 1e-12);
            // Idle rounds dilute the average.
            assert!((convergence_of(&rounds, c, 8) - closed / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn summary_of_a_record() {
        let mut rec = MetricsRecord::new(
            vec!["A".into(), "B".into()],
            [("x".to_string(), "A".to_string()), ("y".to_string(), "B".to_string())].into(),
        );
        rec.round_mut(1).insert("x".into(), RoundStats { simplifications: 3, ..Default::default() });
        rec.round_mut(1).insert("y".into(), RoundStats { simplifications: 1, ..Default::default() });
        rec.note_message(2, "y", "mem", 6);
        rec.note_message(2, "y", "mem", 6);
        rec.delays = vec![1, 0];
        rec.run_length = 2;
        let r = summarize(&rec);
        assert_eq!(r.delay, 0.5);
        assert_eq!(r.msgs, 1.0);
        assert_eq!(r.data, 6.0);
        assert_eq!(r.s_crit, 1.5);
        assert_eq!(r.s_max, 3);
        assert!((r.conv - 0.0625).abs() < 1e-12);
        assert_eq!(rec.message_sizes["mem"], [6].into());
    }
}
