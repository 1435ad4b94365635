//! Small reference instances used by tests, examples and the CLI docs.

use std::collections::BTreeMap;

use crate::analysis::{Assignment, Graph};
use crate::expr::Verdict;
use crate::replicated::Event;
use crate::spec::{DecentralizedSpec, DecentralizedSpecFile, DecentralizedTrace, SpecFile, Specification};

/// `F(a ∨ b)`: waits in `q0` until `a` or `b` holds, then stays in `q1` (⊤).
pub fn eventually_or() -> Specification {
    Specification::build(
        &[("q0", Verdict::Unknown), ("q1", Verdict::Top)],
        "q0",
        &[("q0", "q0", "!a && !b"), ("q0", "q1", "a || b"), ("q1", "q1", "true")],
    )
    .unwrap()
}

/// `F(a ∧ b)`.
pub fn eventually_and() -> Specification {
    Specification::build(
        &[("q0", Verdict::Unknown), ("q1", Verdict::Top)],
        "q0",
        &[("q0", "q0", "!a || !b"), ("q0", "q1", "a && b"), ("q1", "q1", "true")],
    )
    .unwrap()
}

/// No state carries a final verdict.
pub fn never_decides() -> Specification {
    Specification::build(
        &[("q0", Verdict::Unknown), ("q1", Verdict::Unknown)],
        "q0",
        &[("q0", "q1", "a"), ("q0", "q0", "!a"), ("q1", "q0", "true")],
    )
    .unwrap()
}

/// `F(a0 ∨ b0)` split over two components: `m0` on `c0` watches `a0` and
/// delegates `b0` to `m1` on `c1`.
pub fn delegated_eventually() -> DecentralizedSpec {
    let m0 = SpecFile {
        states: vec!["q0".into(), "q1".into()],
        initial: "q0".into(),
        verdicts: [("q0".to_string(), Verdict::Unknown), ("q1".to_string(), Verdict::Top)].into_iter().collect(),
        transitions: vec![
            tf("q0", "q0", "!m1 && !a0"),
            tf("q0", "q1", "a0"),
            tf("q0", "q1", "m1 && !a0"),
            tf("q1", "q1", "true"),
        ],
    };
    let m1 = SpecFile {
        states: vec!["q0".into(), "q1".into(), "q2".into()],
        initial: "q0".into(),
        verdicts: [
            ("q0".to_string(), Verdict::Unknown),
            ("q1".to_string(), Verdict::Top),
            ("q2".to_string(), Verdict::Bottom),
        ]
        .into_iter()
        .collect(),
        transitions: vec![tf("q0", "q1", "b0"), tf("q0", "q2", "!b0"), tf("q1", "q1", "true"), tf("q2", "q2", "true")],
    };
    let file = DecentralizedSpecFile {
        monitors: [("m0".to_string(), m0), ("m1".to_string(), m1)].into_iter().collect(),
        components: vec!["c0".into(), "c1".into()],
        attach: pairs(&[("m0", "c0"), ("m1", "c1")]),
        root: "m0".into(),
        ap_owner: pairs(&[("a0", "c0"), ("b0", "c1")]),
    };
    DecentralizedSpec::from_file(&file).unwrap()
}

/// Two rounds: `a0` stays false, `b0` turns true in round 2.
pub fn delegated_trace() -> DecentralizedTrace {
    trace(&[(1, "c0", "a0", false), (1, "c1", "b0", false), (2, "c0", "a0", false), (2, "c1", "b0", true)])
}

/// Components `A` (observes `a`) and `B` (observes `b`):
/// `{a⊤, b⊤} · {a⊤, b⊥}`.
pub fn two_round_trace() -> DecentralizedTrace {
    trace(&[(1, "A", "a", true), (1, "B", "b", true), (2, "A", "a", true), (2, "B", "b", false)])
}

/// Monitor network `m0 → m1 ← m2`, system chain `c0 → c1 → c2 → c3`, and the
/// placement constraint `m0 ↦ c0, m2 ↦ c2`.
pub fn chain_placement() -> (Graph, Graph, Assignment) {
    let mut net = Graph::with_nodes(["m0", "m1", "m2"]);
    net.add_edge("m0", "m1");
    net.add_edge("m2", "m1");
    let mut sys = Graph::with_nodes(["c0", "c1", "c2", "c3"]);
    sys.add_edge("c0", "c1");
    sys.add_edge("c1", "c2");
    sys.add_edge("c2", "c3");
    (net, sys, pairs(&[("m0", "c0"), ("m2", "c2")]))
}

/// Builds a trace from `(round, component, proposition, value)` rows.
pub fn trace(rows: &[(u32, &str, &str, bool)]) -> DecentralizedTrace {
    let mut events: BTreeMap<(u32, &str), Event> = BTreeMap::new();
    let mut len = 0;
    for (t, c, ap, v) in rows {
        events.entry((*t, c)).or_default().observe(*ap, *v).unwrap();
        len = len.max(*t);
    }
    let mut tr = DecentralizedTrace::new(len);
    for ((t, c), e) in events {
        tr.set(t, c, e);
    }
    tr
}

fn tf(from: &str, to: &str, label: &str) -> crate::spec::TransitionFile {
    crate::spec::TransitionFile { from: from.into(), to: to.into(), label: label.into() }
}

fn pairs(items: &[(&str, &str)]) -> BTreeMap<String, String> {
    items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}
