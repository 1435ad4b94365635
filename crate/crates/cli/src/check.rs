//! `check`: static checks on specifications and monitor networks.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, Context};
use clap::ValueEnum;

use demon_core::analysis::{
    assignment_from_json, ca_monitorable, compatible, compute_reach, default_finals, has_cycle, mdg,
    verify_compatible, Assignment, Graph,
};
use demon_core::spec::{DecentralizedSpec, Specification};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Determinism and completeness of every automaton.
    Validate,
    /// Every state can still reach a final verdict (and no dependency cycle).
    Monitorability,
    /// The monitor network can be placed on the system graph.
    Compatibility,
}

/// Whether the property holds, with witnesses one per line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub holds: bool,
    pub lines: Vec<String>,
}

pub enum SpecDoc {
    Central(Specification),
    Decentral(DecentralizedSpec),
}

/// A decentralized file is recognised by its `monitors` field.
pub fn load_spec(path: &Path) -> anyhow::Result<SpecDoc> {
    let text = crate::read_text(path)?;
    let v: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}: not valid JSON", path.display()))?;
    let doc = if v.get("monitors").is_some() {
        SpecDoc::Decentral(DecentralizedSpec::from_json(&text).with_context(|| path.display().to_string())?)
    } else {
        SpecDoc::Central(Specification::from_json(&text).with_context(|| path.display().to_string())?)
    };
    Ok(doc)
}

fn automata(doc: &SpecDoc) -> Vec<(String, &Specification)> {
    match doc {
        SpecDoc::Central(s) => vec![(String::new(), s)],
        SpecDoc::Decentral(d) => d.monitors().iter().map(|(n, s)| (format!("{n}: "), s)).collect(),
    }
}

pub fn validate(doc: &SpecDoc) -> anyhow::Result<CheckReport> {
    let mut lines = Vec::new();
    for (prefix, s) in automata(doc) {
        let r = s.validate()?;
        for (i, j) in r.determinism {
            let (a, b) = (&s.transitions()[i], &s.transitions()[j]);
            lines.push(format!(
                "{prefix}nondeterministic in {}: {} -> {} and {} -> {}",
                s.name(a.from),
                a.label,
                s.name(a.to),
                b.label,
                s.name(b.to)
            ));
        }
        for q in r.completeness {
            lines.push(format!("{prefix}incomplete state {}", s.name(q)));
        }
    }
    Ok(CheckReport { holds: lines.is_empty(), lines })
}

pub fn monitorability(doc: &SpecDoc) -> CheckReport {
    let finals = default_finals();
    let mut lines = Vec::new();
    for (prefix, s) in automata(doc) {
        let (_, good) = ca_monitorable(s, &finals);
        for q in s.states().filter(|q| !good.contains(q)) {
            lines.push(format!("{prefix}non-monitorable state {}", s.name(q)));
        }
    }
    if let SpecDoc::Decentral(d) = doc {
        if has_cycle(&mdg(d)) {
            lines.push("monitor dependency graph has a cycle".to_string());
        }
    }
    CheckReport { holds: lines.is_empty(), lines }
}

/// Messages flow from a referenced monitor to the one referencing it.
pub fn network_of(d: &DecentralizedSpec) -> Graph {
    let dep = mdg(d);
    let mut g = Graph::with_nodes(dep.nodes.iter().cloned());
    for (a, b) in &dep.edges {
        g.add_edge(b, a);
    }
    g
}

pub fn compatibility(net: &Graph, sys: &Graph, constraint: &Assignment) -> CheckReport {
    for (m, c) in constraint {
        if !net.nodes.contains(m) || !sys.nodes.contains(c) {
            return CheckReport { holds: false, lines: vec![format!("constraint {m} -> {c} names an unknown node")] };
        }
    }
    let (ok, a) = compatible(net, sys, constraint);
    if ok {
        return CheckReport { holds: true, lines: a.iter().map(|(m, c)| format!("{m} -> {c}")).collect() };
    }
    let rm = compute_reach(net);
    let rs = compute_reach(sys);
    let mut lines = Vec::new();
    let fixed: Vec<(&String, &String)> = constraint.iter().collect();
    for (i, (m1, c1)) in fixed.iter().enumerate() {
        for (m2, c2) in &fixed[i + 1..] {
            let pair: Assignment = [((*m1).clone(), (*c1).clone()), ((*m2).clone(), (*c2).clone())].into();
            if !verify_compatible(&pair, &rm, &rs) {
                lines.push(format!("incompatible monitors {m1} on {c1} and {m2} on {c2}"));
            }
        }
    }
    if lines.is_empty() {
        for m in net.nodes.iter().filter(|m| !constraint.contains_key(*m)) {
            let fits = sys.nodes.iter().any(|c| {
                let mut s = constraint.clone();
                s.insert(m.clone(), c.clone());
                verify_compatible(&s, &rm, &rs)
            });
            if !fits {
                lines.push(format!("incompatible monitor {m}: no component fits"));
            }
        }
    }
    if lines.is_empty() {
        let free: BTreeSet<&String> = net.nodes.iter().filter(|m| !constraint.contains_key(*m)).collect();
        lines.push(format!("no joint placement of {}", free.into_iter().cloned().collect::<Vec<_>>().join(", ")));
    }
    CheckReport { holds: false, lines }
}

/// `input` is a network graph or a decentralized specification; the latter
/// is checked with its own attachment as the constraint.
pub fn cmd_check(
    input: &Path,
    mode: Mode,
    system: Option<&Path>,
    constraint: Option<&Path>,
) -> anyhow::Result<CheckReport> {
    match mode {
        Mode::Validate => validate(&load_spec(input)?),
        Mode::Monitorability => Ok(monitorability(&load_spec(input)?)),
        Mode::Compatibility => {
            let sys_path = system.ok_or_else(|| anyhow!("compatibility needs --system"))?;
            let sys = Graph::from_json(&crate::read_text(sys_path)?)
                .with_context(|| format!("{}: invalid graph", sys_path.display()))?;
            let text = crate::read_text(input)?;
            let v: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("{}: not valid JSON", input.display()))?;
            let (net, mut fixed) = if v.get("monitors").is_some() {
                let d = DecentralizedSpec::from_json(&text).with_context(|| input.display().to_string())?;
                (network_of(&d), d.attach().clone())
            } else {
                let g = Graph::from_json(&text).with_context(|| format!("{}: invalid graph", input.display()))?;
                (g, Assignment::new())
            };
            if let Some(p) = constraint {
                let extra = assignment_from_json(&crate::read_text(p)?)
                    .with_context(|| format!("{}: invalid assignment", p.display()))?;
                fixed.extend(extra);
            }
            Ok(compatibility(&net, &sys, &fixed))
        }
    }
}
