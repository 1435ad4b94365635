//! Monitorability and compatibility decision procedures.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::expr::{dep, Verdict};
use crate::spec::{DecentralizedSpec, Specification, StateId};

/// Directed graph over named nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn with_nodes<I: IntoIterator<Item = S>, S: Into<String>>(nodes: I) -> Self {
        Graph { nodes: nodes.into_iter().map(Into::into).collect(), edges: BTreeSet::new() }
    }

    /// Adds an edge, inserting missing endpoints.
    pub fn add_edge(&mut self, from: &str, to: &str) {
        self.nodes.insert(from.to_string());
        self.nodes.insert(to.to_string());
        self.edges.insert((from.to_string(), to.to_string()));
    }

    /// Every ordered pair of distinct nodes.
    pub fn complete<I: IntoIterator<Item = S>, S: Into<String>>(nodes: I) -> Self {
        let mut g = Graph::with_nodes(nodes);
        let ns: Vec<String> = g.nodes.iter().cloned().collect();
        for a in &ns {
            for b in &ns {
                if a != b {
                    g.edges.insert((a.clone(), b.clone()));
                }
            }
        }
        g
    }

    pub fn successors<'a>(&'a self, n: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter(move |(a, _)| a == n).map(|(_, b)| b.as_str())
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let file: GraphFile = serde_json::from_str(text)?;
        let mut g = Graph::with_nodes(file.nodes);
        for [a, b] in file.edges {
            g.add_edge(&a, &b);
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            nodes: self.nodes.iter().cloned().collect(),
            edges: self.edges.iter().map(|(a, b)| [a.clone(), b.clone()]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    #[serde(default)]
    edges: Vec<[String; 2]>,
}

/// Reflexive-transitive closure per node.
pub type ReachMap = BTreeMap<String, BTreeSet<String>>;

/// Partial map from monitors to components.
pub type Assignment = BTreeMap<String, String>;

pub fn default_finals() -> BTreeSet<Verdict> {
    [Verdict::Top, Verdict::Bottom].into_iter().collect()
}

/// Work-list co-reachability: the states from which some state whose verdict
/// is in `finals` is reachable. The flag tells whether that is every state.
pub fn ca_monitorable(a: &Specification, finals: &BTreeSet<Verdict>) -> (bool, BTreeSet<StateId>) {
    let mut preds: Vec<BTreeSet<StateId>> = vec![BTreeSet::new(); a.num_states()];
    for t in a.transitions() {
        preds[t.to].insert(t.from);
    }
    let mut mark: BTreeSet<StateId> = a.states().filter(|q| finals.contains(&a.verdict(*q))).collect();
    let mut work: VecDeque<StateId> = mark.iter().copied().collect();
    while let Some(q) = work.pop_front() {
        for p in &preds[q] {
            if mark.insert(*p) {
                work.push_back(*p);
            }
        }
    }
    (mark.len() == a.num_states(), mark)
}

/// Monitors referenced by any label of `a`.
pub fn mds(a: &Specification) -> BTreeSet<String> {
    a.transitions().iter().flat_map(|t| dep(&t.label)).map(|n| n.to_string()).collect()
}

/// Edge `l -> l'` whenever monitor `l` references `l'`.
pub fn mdg(d: &DecentralizedSpec) -> Graph {
    let mut g = Graph::with_nodes(d.monitors().keys().cloned());
    for (name, spec) in d.monitors() {
        for r in mds(spec) {
            g.add_edge(name, &r);
        }
    }
    g
}

/// Depth-first search with back-edge detection.
pub fn has_cycle(g: &Graph) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut color: BTreeMap<&str, Color> = g.nodes.iter().map(|n| (n.as_str(), Color::White)).collect();
    for start in &g.nodes {
        if color[start.as_str()] != Color::White {
            continue;
        }
        // Stack of (node, successor list, next index).
        let mut stack: Vec<(&str, Vec<&str>, usize)> = vec![(start, g.successors(start).collect(), 0)];
        color.insert(start, Color::Grey);
        while let Some((node, succ, i)) = stack.last_mut() {
            if *i < succ.len() {
                let next = succ[*i];
                *i += 1;
                match color.get(next).copied().unwrap_or(Color::White) {
                    Color::Grey => return true,
                    Color::White => {
                        color.insert(next, Color::Grey);
                        stack.push((next, g.successors(next).collect(), 0));
                    }
                    Color::Black => {}
                }
            } else {
                color.insert(node, Color::Black);
                stack.pop();
            }
        }
    }
    false
}

pub fn decentralized_monitorable(d: &DecentralizedSpec) -> bool {
    let finals = default_finals();
    !has_cycle(&mdg(d)) && d.monitors().values().all(|s| ca_monitorable(s, &finals).0)
}

pub fn compute_reach(g: &Graph) -> ReachMap {
    g.nodes
        .iter()
        .map(|n| {
            let mut seen: BTreeSet<String> = [n.clone()].into_iter().collect();
            let mut work = vec![n.as_str()];
            while let Some(x) = work.pop() {
                for y in g.successors(x) {
                    if seen.insert(y.to_string()) {
                        work.push(y);
                    }
                }
            }
            (n.clone(), seen)
        })
        .collect()
}

/// For each assigned monitor `m`, the components of the assigned monitors it
/// reaches must be reachable from its own component.
pub fn verify_compatible(s: &Assignment, rm: &ReachMap, rs: &ReachMap) -> bool {
    s.iter().all(|(m, c)| {
        let Some(reach_c) = rs.get(c) else {
            return false;
        };
        rm.get(m)
            .into_iter()
            .flatten()
            .filter_map(|m2| s.get(m2))
            .all(|c2| reach_c.contains(c2))
    })
}

/// Backtracking search, monitors and components in ascending name order.
/// Returns the first total compatible assignment extending `constraint`.
pub fn compatible(net: &Graph, sys: &Graph, constraint: &Assignment) -> (bool, Assignment) {
    let mut found = None;
    search(net, sys, constraint, &mut |a| {
        found = Some(a.clone());
        false
    });
    match found {
        Some(a) => (true, a),
        None => (false, Assignment::new()),
    }
}

/// Number of total compatible assignments extending `constraint` (debugging
/// aid; exponential).
pub fn count_compatible(net: &Graph, sys: &Graph, constraint: &Assignment) -> usize {
    let mut n = 0;
    search(net, sys, constraint, &mut |_| {
        n += 1;
        true
    });
    n
}

/// Calls `visit` on each solution until it returns false.
fn search(net: &Graph, sys: &Graph, constraint: &Assignment, visit: &mut dyn FnMut(&Assignment) -> bool) {
    let rm = compute_reach(net);
    let rs = compute_reach(sys);
    if !verify_compatible(constraint, &rm, &rs) {
        return;
    }
    let free: Vec<&String> = net.nodes.iter().filter(|m| !constraint.contains_key(*m)).collect();
    let comps: Vec<&String> = sys.nodes.iter().collect();
    let mut current = constraint.clone();
    fn go(
        i: usize,
        free: &[&String],
        comps: &[&String],
        current: &mut Assignment,
        rm: &ReachMap,
        rs: &ReachMap,
        visit: &mut dyn FnMut(&Assignment) -> bool,
    ) -> bool {
        if i == free.len() {
            return visit(current);
        }
        for c in comps {
            current.insert(free[i].clone(), (*c).clone());
            if verify_compatible(current, rm, rs) && !go(i + 1, free, comps, current, rm, rs, visit) {
                current.remove(free[i]);
                return false;
            }
            current.remove(free[i]);
        }
        true
    }
    go(0, &free, &comps, &mut current, &rm, &rs, visit);
}

pub fn assignment_from_json(text: &str) -> Result<Assignment, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn monitorability_examples() {
        let (ok, mark) = ca_monitorable(&fixtures::eventually_or(), &default_finals());
        assert!(ok);
        assert_eq!(mark.len(), 2);
        let (ok3, mark3) = ca_monitorable(&fixtures::never_decides(), &default_finals());
        assert!(!ok3);
        assert!(mark3.is_empty());
        let single = Specification::build(&[("q", Verdict::Top)], "q", &[("q", "q", "true")]).unwrap();
        assert_eq!(ca_monitorable(&single, &default_finals()), (true, [0].into_iter().collect()));
        // Generalized final set.
        let only_top: BTreeSet<Verdict> = [Verdict::Top].into_iter().collect();
        assert!(ca_monitorable(&fixtures::eventually_or(), &only_top).0);
    }

    #[test]
    fn dependency_examples() {
        let d = fixtures::delegated_eventually();
        assert_eq!(mds(d.monitor("m0").unwrap()), ["m1".to_string()].into_iter().collect());
        assert!(mds(d.monitor("m1").unwrap()).is_empty());
        let g = mdg(&d);
        assert_eq!(g.edges, [("m0".to_string(), "m1".to_string())].into_iter().collect());
        assert!(!has_cycle(&g));
        assert!(decentralized_monitorable(&d));
        let empty = Specification::build(&[("q", Verdict::Unknown)], "q", &[]).unwrap();
        assert!(mds(&empty).is_empty());
    }

    #[test]
    fn cycles() {
        let mut g = Graph::with_nodes(["m0", "m1"]);
        assert!(!has_cycle(&g));
        g.add_edge("m0", "m1");
        assert!(!has_cycle(&g));
        g.add_edge("m1", "m0");
        assert!(has_cycle(&g));
        let mut s = Graph::new();
        s.add_edge("x", "x");
        assert!(has_cycle(&s));
    }

    #[test]
    fn reachability_tables() {
        let (net, sys, _) = fixtures::chain_placement();
        let rs = compute_reach(&sys);
        assert_eq!(rs["c0"].len(), 4);
        assert_eq!(rs["c2"], ["c2", "c3"].iter().map(|s| s.to_string()).collect());
        let rm = compute_reach(&net);
        assert_eq!(rm["m0"], ["m0", "m1"].iter().map(|s| s.to_string()).collect());
        assert_eq!(rm["m1"], ["m1"].iter().map(|s| s.to_string()).collect());
        let edgeless = compute_reach(&Graph::with_nodes(["a", "b"]));
        assert_eq!(edgeless["a"].len(), 1);
    }

    #[test]
    fn compatibility_example() {
        let (net, sys, kappa) = fixtures::chain_placement();
        let (rm, rs) = (compute_reach(&net), compute_reach(&sys));
        assert!(verify_compatible(&kappa, &rm, &rs));
        let mut bad = kappa.clone();
        bad.insert("m1".into(), "c1".into());
        assert!(!verify_compatible(&bad, &rm, &rs));
        assert!(verify_compatible(&Assignment::new(), &rm, &rs));
        let (ok, a) = compatible(&net, &sys, &kappa);
        assert!(ok);
        assert_eq!(a["m1"], "c2");
        assert_eq!(a["m0"], "c0");
        assert_eq!(count_compatible(&net, &sys, &kappa), 2);
        let mut violating = Assignment::new();
        violating.insert("m0".into(), "c3".into());
        violating.insert("m1".into(), "c0".into());
        assert_eq!(compatible(&net, &sys, &violating), (false, Assignment::new()));
        let full: Assignment =
            [("m0", "c0"), ("m1", "c3"), ("m2", "c2")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(compatible(&net, &sys, &full), (true, full.clone()));
    }

    #[test]
    fn graph_json_round_trip() {
        let (net, _, _) = fixtures::chain_placement();
        assert_eq!(Graph::from_json(&net.to_json()).unwrap(), net);
    }
}
