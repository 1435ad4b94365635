//! Decentralized specifications, decentralized traces and the reference
//! recursive semantics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{SpecError, SpecFile, Specification, StateId};
use crate::expr::{dep, eval, Atom, Encoder, Verdict};
use crate::replicated::{mem_from_event, Event, ReplicatedError};

/// Monitors attached to components; one of them is the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DecentralizedSpec {
    monitors: BTreeMap<String, Specification>,
    components: BTreeSet<String>,
    attach: BTreeMap<String, String>,
    root: String,
    ap_owner: BTreeMap<String, String>,
}

impl DecentralizedSpec {
    /// Builds and checks a decentralized specification. Plain atoms in a
    /// monitor's labels must be owned by its component; monitor atoms must
    /// name another declared monitor.
    pub fn new(
        monitors: BTreeMap<String, Specification>,
        components: BTreeSet<String>,
        attach: BTreeMap<String, String>,
        root: &str,
        ap_owner: BTreeMap<String, String>,
    ) -> Result<Self, SpecError> {
        if !monitors.contains_key(root) {
            return Err(SpecError::UnknownMonitor(root.to_string()));
        }
        for name in monitors.keys() {
            if ap_owner.contains_key(name) {
                return Err(SpecError::NameCollision(name.clone()));
            }
        }
        for (name, spec) in &monitors {
            let invalid = |reason: String| SpecError::InvalidMonitor { monitor: name.clone(), reason };
            let comp = attach.get(name).ok_or_else(|| invalid("not attached to a component".into()))?;
            if !components.contains(comp) {
                return Err(invalid(format!("unknown component {comp:?}")));
            }
            for atom in spec.label_atoms() {
                match &atom {
                    Atom::Plain(ap) => match ap_owner.get(&**ap) {
                        Some(owner) if owner == comp => {}
                        Some(owner) => return Err(invalid(format!("proposition {ap} belongs to {owner}"))),
                        None => return Err(invalid(format!("proposition {ap} has no owner"))),
                    },
                    Atom::Monitor(id) => {
                        if &**id == name.as_str() || !monitors.contains_key(&**id) {
                            return Err(invalid(format!("bad monitor reference {id}")));
                        }
                    }
                    other => return Err(invalid(format!("encoded atom {other} in a label"))),
                }
            }
        }
        for owner in ap_owner.values() {
            if !components.contains(owner) {
                return Err(SpecError::InvalidMonitor {
                    monitor: root.to_string(),
                    reason: format!("unknown component {owner:?} in proposition table"),
                });
            }
        }
        Ok(DecentralizedSpec { monitors, components, attach, root: root.to_string(), ap_owner })
    }

    /// One monitor on one component observing every proposition of `spec`.
    pub fn centralized(spec: Specification, component: &str) -> Result<Self, SpecError> {
        let ap_owner = spec
            .label_atoms()
            .into_iter()
            .map(|a| (a.name().to_string(), component.to_string()))
            .collect();
        DecentralizedSpec::new(
            [("m0".to_string(), spec)].into_iter().collect(),
            [component.to_string()].into_iter().collect(),
            [("m0".to_string(), component.to_string())].into_iter().collect(),
            "m0",
            ap_owner,
        )
    }

    pub fn monitors(&self) -> &BTreeMap<String, Specification> {
        &self.monitors
    }

    pub fn monitor(&self, name: &str) -> Option<&Specification> {
        self.monitors.get(name)
    }

    pub fn components(&self) -> &BTreeSet<String> {
        &self.components
    }

    pub fn attach(&self) -> &BTreeMap<String, String> {
        &self.attach
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn ap_owner(&self) -> &BTreeMap<String, String> {
        &self.ap_owner
    }

    /// Monitors referenced from the labels of `name`.
    pub fn references(&self, name: &str) -> BTreeSet<String> {
        self.monitors
            .get(name)
            .map(|s| s.transitions().iter().flat_map(|t| dep(&t.label)).map(|n| n.to_string()).collect())
            .unwrap_or_default()
    }

    pub fn from_file(file: &DecentralizedSpecFile) -> Result<Self, SpecError> {
        let names: BTreeSet<&str> = file.monitors.keys().map(String::as_str).collect();
        for n in &names {
            if file.ap_owner.contains_key(*n) {
                return Err(SpecError::NameCollision(n.to_string()));
            }
        }
        let resolve = |n: &str| if names.contains(n) { Atom::monitor(n) } else { Atom::plain(n) };
        let mut monitors = BTreeMap::new();
        for (name, sf) in &file.monitors {
            monitors.insert(name.clone(), Specification::from_file(sf, &resolve)?);
        }
        let mut components: BTreeSet<String> = file.components.iter().cloned().collect();
        components.extend(file.attach.values().cloned());
        components.extend(file.ap_owner.values().cloned());
        DecentralizedSpec::new(monitors, components, file.attach.clone(), &file.root, file.ap_owner.clone())
    }

    pub fn to_file(&self) -> DecentralizedSpecFile {
        DecentralizedSpecFile {
            monitors: self.monitors.iter().map(|(n, s)| (n.clone(), s.to_file())).collect(),
            components: self.components.iter().cloned().collect(),
            attach: self.attach.clone(),
            root: self.root.clone(),
            ap_owner: self.ap_owner.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let file: DecentralizedSpecFile = serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        DecentralizedSpec::from_file(&file)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecentralizedSpecFile {
    pub monitors: BTreeMap<String, SpecFile>,
    #[serde(default)]
    pub components: Vec<String>,
    pub attach: BTreeMap<String, String>,
    pub root: String,
    #[serde(default)]
    pub ap_owner: BTreeMap<String, String>,
}

/// Per-round, per-component events. Empty events are not stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DecentralizedTrace {
    length: u32,
    events: BTreeMap<(u32, String), Event>,
}

impl DecentralizedTrace {
    pub fn new(length: u32) -> Self {
        DecentralizedTrace { length, events: BTreeMap::new() }
    }

    /// Sets the event of `component` at round `t` (1-based), growing the
    /// length if needed.
    pub fn set(&mut self, t: u32, component: &str, event: Event) {
        assert!(t >= 1, "rounds start at 1");
        self.length = self.length.max(t);
        if event.is_empty() {
            self.events.remove(&(t, component.to_string()));
        } else {
            self.events.insert((t, component.to_string()), event);
        }
    }

    pub fn len(&self) -> u32 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Event of `component` at round `t`; empty outside the trace.
    pub fn event(&self, t: u32, component: &str) -> Event {
        self.events.get(&(t, component.to_string())).cloned().unwrap_or_default()
    }

    pub fn events(&self) -> impl Iterator<Item = (u32, &str, &Event)> {
        self.events.iter().map(|((t, c), e)| (*t, c.as_str(), e))
    }

    pub fn components(&self) -> BTreeSet<String> {
        self.events.keys().map(|(_, c)| c.clone()).collect()
    }

    /// Prefix of the first `k` rounds.
    pub fn prefix(&self, k: u32) -> DecentralizedTrace {
        DecentralizedTrace {
            length: k.min(self.length),
            events: self.events.iter().filter(|((t, _), _)| *t <= k).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// Which component observes each proposition; fails if two do.
    pub fn ap_owner(&self) -> Result<BTreeMap<String, String>, ReplicatedError> {
        let mut owner: BTreeMap<String, String> = BTreeMap::new();
        for ((_, c), e) in &self.events {
            for (ap, _) in e.iter() {
                match owner.get(ap) {
                    Some(o) if o != c => {
                        return Err(ReplicatedError::ConflictingObservation { key: ap.to_string() })
                    }
                    Some(_) => {}
                    None => {
                        owner.insert(ap.to_string(), c.clone());
                    }
                }
            }
        }
        Ok(owner)
    }

    /// `ρ(tr)`: per round, the union of all components' events.
    pub fn reconstruct_global(&self) -> Result<Vec<Event>, ReplicatedError> {
        self.ap_owner()?;
        let mut out = vec![Event::new(); self.length as usize];
        for ((t, _), e) in &self.events {
            let slot = &mut out[*t as usize - 1];
            *slot = slot.union(e)?;
        }
        Ok(out)
    }
}

/// Verdict of the root monitor under the recursive decentralized semantics.
///
/// A monitor moves at round `i` only if its component observed something;
/// each referenced monitor contributes the verdict it reaches when started
/// from its initial state at round `i` and run to the end of the trace.
/// Results are memoized per (monitor, start round). A reference cycle that
/// would recurse forever is reported as `RoundBudgetExceeded`.
pub fn decentralized_run(d: &DecentralizedSpec, tr: &DecentralizedTrace) -> Result<Verdict, SpecError> {
    let mut ctx = Semantics { d, tr, memo: HashMap::new(), active: HashSet::new() };
    let q = ctx.run_from(d.root(), 1)?;
    Ok(d.monitor(d.root()).unwrap().verdict(q))
}

struct Semantics<'a> {
    d: &'a DecentralizedSpec,
    tr: &'a DecentralizedTrace,
    memo: HashMap<(String, u32), StateId>,
    active: HashSet<(String, u32)>,
}

impl Semantics<'_> {
    fn run_from(&mut self, mon: &str, start: u32) -> Result<StateId, SpecError> {
        let key = (mon.to_string(), start);
        if let Some(q) = self.memo.get(&key) {
            return Ok(*q);
        }
        if !self.active.insert(key.clone()) {
            return Err(SpecError::RoundBudgetExceeded(mon.to_string()));
        }
        let spec = self.d.monitor(mon).ok_or_else(|| SpecError::UnknownMonitor(mon.to_string()))?;
        let comp = &self.d.attach()[mon];
        let refs = self.d.references(mon);
        let mut q = spec.initial();
        for i in start..=self.tr.len() {
            let evt = self.tr.event(i, comp);
            if evt.is_empty() {
                continue;
            }
            let mut m = mem_from_event(&evt, Encoder::Identity);
            for r in &refs {
                let qr = self.run_from(r, i)?;
                let v = self.d.monitor(r).unwrap().verdict(qr);
                m.record(Atom::monitor(r), v);
            }
            if let Some(t) = spec.outgoing(q).find(|t| eval(&t.label, &m) == Verdict::Top) {
                q = t.to;
            }
        }
        self.active.remove(&key);
        self.memo.insert(key, q);
        Ok(q)
    }
}

/// Every trace of length `1..=max_len` in which each component observes all
/// of its propositions every round.
pub fn enumerate_traces(component_aps: &BTreeMap<String, Vec<String>>, max_len: u32) -> Vec<DecentralizedTrace> {
    let slots: Vec<(&String, &String)> =
        component_aps.iter().flat_map(|(c, aps)| aps.iter().map(move |a| (c, a))).collect();
    let per_round = 1u64 << slots.len();
    let mut out = Vec::new();
    for len in 1..=max_len {
        let total = per_round.pow(len);
        for code in 0..total {
            let mut tr = DecentralizedTrace::new(len);
            let mut rest = code;
            for t in 1..=len {
                let bits = rest % per_round;
                rest /= per_round;
                let mut evts: BTreeMap<&String, Event> = BTreeMap::new();
                for (i, (c, a)) in slots.iter().enumerate() {
                    evts.entry(c).or_default().observe(a.as_str(), bits >> i & 1 == 1).unwrap();
                }
                for (c, e) in evts {
                    tr.set(t, c, e);
                }
            }
            out.push(tr);
        }
    }
    out
}

/// First trace on which the two specifications' root verdicts differ.
pub fn first_disagreement<'a, I>(
    a: &DecentralizedSpec,
    b: &DecentralizedSpec,
    traces: I,
) -> Result<Option<DecentralizedTrace>, SpecError>
where
    I: IntoIterator<Item = &'a DecentralizedTrace>,
{
    for tr in traces {
        if decentralized_run(a, tr)? != decentralized_run(b, tr)? {
            return Ok(Some(tr.clone()));
        }
    }
    Ok(None)
}
