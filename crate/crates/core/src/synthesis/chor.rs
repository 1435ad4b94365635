//! Splitting a formula into a tree of monitors hosted on the components that
//! observe most of each part.

use std::collections::{BTreeMap, BTreeSet};

use super::{synthesize, Ltl, SynthesisError};
use crate::spec::DecentralizedSpec;

/// Occurrences of propositions owned by `c`.
pub fn score(f: &Ltl, c: &str, owner: &BTreeMap<String, String>) -> usize {
    f.ap_leaves().into_iter().filter(|a| owner.get(*a).map(String::as_str) == Some(c)).count()
}

/// Highest-scoring component; ties go to the smallest name.
pub fn choose(f: &Ltl, owner: &BTreeMap<String, String>) -> Result<String, SynthesisError> {
    let leaves = f.ap_leaves();
    if leaves.is_empty() {
        return Err(SynthesisError::NoAtomicPropositions);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in leaves {
        let c = owner.get(a).ok_or_else(|| SynthesisError::UnknownProposition(a.to_string()))?;
        *counts.entry(c).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap();
    Ok(counts.into_iter().find(|(_, n)| *n == best).unwrap().0.to_string())
}

/// Hosts for the two operands of a binary operator; one stays on `base`.
pub fn split(
    f: &Ltl,
    g: &Ltl,
    base: &str,
    owner: &BTreeMap<String, String>,
) -> Result<(String, String), SynthesisError> {
    let c1 = choose(f, owner)?;
    let c2 = choose(g, owner)?;
    let s1 = score(f, base, owner);
    let s2 = score(g, base, owner);
    Ok(if c1 == base && c2 == base {
        (c1, c2)
    } else if c1 != base && (c2 == base || s2 > s1) {
        (c1, base.to_string())
    } else {
        (base.to_string(), c2)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorData {
    pub id: String,
    /// Subformula with delegated parts replaced by [`Ltl::Ref`].
    pub formula: Ltl,
    pub component: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorTree {
    pub root: MonitorData,
    pub extra: Vec<MonitorData>,
    /// `(child, parent)`.
    pub edges: BTreeSet<(String, String)>,
}

impl MonitorTree {
    pub fn monitors(&self) -> impl Iterator<Item = &MonitorData> {
        std::iter::once(&self.root).chain(self.extra.iter())
    }

    pub fn len(&self) -> usize {
        1 + self.extra.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Monitors to notify: the parent, if any.
    pub fn refs(&self, id: &str) -> BTreeSet<String> {
        self.edges.iter().filter(|(c, _)| c == id).map(|(_, p)| p.clone()).collect()
    }

    /// Monitors whose verdicts `id` waits for: its children.
    pub fn corefs(&self, id: &str) -> BTreeSet<String> {
        self.edges.iter().filter(|(_, p)| p == id).map(|(c, _)| c.clone()).collect()
    }

    pub fn network(&self) -> crate::analysis::Graph {
        let mut g = crate::analysis::Graph::with_nodes(self.monitors().map(|m| m.id.clone()));
        for (c, p) in &self.edges {
            g.add_edge(c, p);
        }
        g
    }

    pub fn placement(&self) -> crate::analysis::Assignment {
        self.monitors().map(|m| (m.id.clone(), m.component.clone())).collect()
    }
}

struct Builder<'a> {
    owner: &'a BTreeMap<String, String>,
    next: usize,
    nodes: Vec<(usize, Ltl, String)>,
    edges: Vec<(usize, usize)>,
}

impl Builder<'_> {
    fn fresh(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }

    fn delegate(&mut self, parent: usize, id: usize, f: Ltl, host: String) -> Ltl {
        self.nodes.push((id, f, host));
        self.edges.push((id, parent));
        Ltl::Ref(id.to_string())
    }

    fn netx(&mut self, f: &Ltl, id: usize, host: &str) -> Result<Ltl, SynthesisError> {
        Ok(match f {
            Ltl::True | Ltl::False | Ltl::Ref(_) => f.clone(),
            Ltl::Ap(a) => {
                let c = self.owner.get(a).ok_or_else(|| SynthesisError::UnknownProposition(a.clone()))?;
                if c == host {
                    f.clone()
                } else {
                    // Kept on a host that cannot observe it.
                    let n = self.fresh();
                    self.delegate(id, n, f.clone(), c.clone())
                }
            }
            Ltl::Not(a) => Ltl::not(self.netx(a, id, host)?),
            Ltl::Next(a) => Ltl::next(self.netx(a, id, host)?),
            Ltl::Finally(a) => Ltl::finally(self.netx(a, id, host)?),
            Ltl::Globally(a) => Ltl::globally(self.netx(a, id, host)?),
            Ltl::And(l, r) | Ltl::Or(l, r) | Ltl::Until(l, r) => {
                let rebuild = |a, b| match f {
                    Ltl::And(..) => Ltl::and(a, b),
                    Ltl::Or(..) => Ltl::or(a, b),
                    _ => Ltl::until(a, b),
                };
                let (c1, c2) = if l.ap_leaves().is_empty() || r.ap_leaves().is_empty() {
                    (host.to_string(), host.to_string())
                } else {
                    split(l, r, host, self.owner)?
                };
                if c1 == host && c2 == host {
                    let a = self.netx(l, id, host)?;
                    let b = self.netx(r, id, host)?;
                    rebuild(a, b)
                } else if c1 == host {
                    let n = self.fresh();
                    let a = self.netx(l, id, host)?;
                    let b = self.netx(r, n, &c2)?;
                    let b = self.delegate(id, n, b, c2);
                    rebuild(a, b)
                } else {
                    let n = self.fresh();
                    let a = self.netx(l, n, &c1)?;
                    let b = self.netx(r, id, host)?;
                    let a = self.delegate(id, n, a, c1);
                    rebuild(a, b)
                }
            }
        })
    }
}

/// Builds the monitor tree: the root is hosted by [`choose`]; ids are
/// allocated depth-first, left to right, and share one width so that every
/// id has the same length.
pub fn net_chor(f: &Ltl, owner: &BTreeMap<String, String>) -> Result<MonitorTree, SynthesisError> {
    let host = choose(f, owner)?;
    let mut b = Builder { owner, next: 1, nodes: Vec::new(), edges: Vec::new() };
    let root = b.netx(f, 0, &host)?;
    let width = (b.next - 1).to_string().len();
    let prefix = id_prefix(owner, width);
    let name = |i: usize| format!("{prefix}{i:0width$}");
    let rename = |f: &Ltl| {
        f.map_leaves(&|leaf| match leaf {
            Ltl::Ref(r) => Ltl::Ref(name(r.parse().unwrap())),
            other => other.clone(),
        })
    };
    let mut extra: Vec<MonitorData> = b
        .nodes
        .iter()
        .map(|(i, f, c)| MonitorData { id: name(*i), formula: rename(f), component: c.clone() })
        .collect();
    extra.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(MonitorTree {
        root: MonitorData { id: name(0), formula: rename(&root), component: host },
        extra,
        edges: b.edges.iter().map(|(c, p)| (name(*c), name(*p))).collect(),
    })
}

/// `m`, unless some proposition looks like a monitor id with that prefix.
fn id_prefix(owner: &BTreeMap<String, String>, width: usize) -> String {
    let mut prefix = "m".to_string();
    while owner.keys().any(|a| {
        a.strip_prefix(prefix.as_str()).is_some_and(|rest| rest.len() == width && rest.bytes().all(|b| b.is_ascii_digit()))
    }) {
        prefix.push('_');
    }
    prefix
}

/// One synthesized automaton per tree node.
pub fn decentralize(tree: &MonitorTree, owner: &BTreeMap<String, String>) -> Result<DecentralizedSpec, SynthesisError> {
    let mut monitors = BTreeMap::new();
    let mut attach = BTreeMap::new();
    for m in tree.monitors() {
        monitors.insert(m.id.clone(), synthesize(&m.formula)?);
        attach.insert(m.id.clone(), m.component.clone());
    }
    let mut components: BTreeSet<String> = owner.values().cloned().collect();
    components.extend(attach.values().cloned());
    Ok(DecentralizedSpec::new(monitors, components, attach, &tree.root.id, owner.clone())?)
}
