//! Partial maps with merge operators, memories and events.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;

use thiserror::Error;

use crate::expr::{Atom, Encoder, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplicatedError {
    #[error("conflicting observation for {key}: both ⊤ and ⊥")]
    ConflictingObservation { key: String },
    #[error("observation of {key} must carry a final verdict")]
    NonFinalObservation { key: String },
}

/// Finite partial function with value semantics.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dict<K: Ord, V> {
    entries: BTreeMap<K, V>,
}

impl<K: Ord, V> Default for Dict<K, V> {
    fn default() -> Self {
        Dict { entries: BTreeMap::new() }
    }
}

impl<K: Ord + Clone, V: Clone> Dict<K, V> {
    pub fn new() -> Self {
        Dict { entries: BTreeMap::new() }
    }

    pub fn query(&self, k: &K) -> Option<&V> {
        self.entries.get(k)
    }

    pub fn contains(&self, k: &K) -> bool {
        self.entries.contains_key(k)
    }

    pub fn insert(&mut self, k: K, v: V) -> Option<V> {
        self.entries.insert(k, v)
    }

    pub fn remove(&mut self, k: &K) -> Option<V> {
        self.entries.remove(k)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, K, V> {
        self.entries.iter()
    }

    pub fn keys(&self) -> btree_map::Keys<'_, K, V> {
        self.entries.keys()
    }

    pub fn retain(&mut self, f: impl FnMut(&K, &mut V) -> bool) {
        self.entries.retain(f)
    }

    /// `f †op g`: `op` on shared keys, pass-through elsewhere.
    pub fn merge_with(&self, other: &Dict<K, V>, op: impl Fn(&V, &V) -> V) -> Dict<K, V> {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            match out.entries.get_mut(k) {
                Some(mine) => *mine = op(mine, v),
                None => {
                    out.entries.insert(k.clone(), v.clone());
                }
            }
        }
        out
    }
}

impl<K: Ord + Clone, V: Clone> FromIterator<(K, V)> for Dict<K, V> {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Dict { entries: iter.into_iter().collect() }
    }
}

impl<'a, K: Ord, V> IntoIterator for &'a Dict<K, V> {
    type Item = (&'a K, &'a V);
    type IntoIter = btree_map::Iter<'a, K, V>;
    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

impl<K: Ord + fmt::Debug, V: fmt::Debug> fmt::Debug for Dict<K, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// Partial map from atoms to verdicts. `?` entries behave as absent.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Memory(Dict<Atom, Verdict>);

impl Memory {
    pub fn new() -> Self {
        Memory(Dict::new())
    }

    pub fn get(&self, a: &Atom) -> Option<Verdict> {
        self.0.query(a).copied()
    }

    /// Adds one entry using the replace order (a final verdict beats `?`).
    pub fn record(&mut self, a: Atom, v: Verdict) {
        match self.0.entries.get_mut(&a) {
            Some(old) => *old = (*old).max(v),
            None => {
                self.0.insert(a, v);
            }
        }
    }

    /// `m1 ⊎² m2` under `? ≺ ⊥ ≺ ⊤`.
    pub fn merge(&self, other: &Memory) -> Memory {
        Memory(self.0.merge_with(&other.0, |a, b| (*a).max(*b)))
    }

    /// In-place variant of [`Memory::merge`].
    pub fn absorb(&mut self, other: &Memory) {
        for (a, v) in other.iter() {
            self.record(a.clone(), *v);
        }
    }

    /// Like [`Memory::merge`], but ⊤/⊥ disagreements are errors.
    pub fn merge_strict(&self, other: &Memory) -> Result<Memory, ReplicatedError> {
        for (a, v) in other.iter() {
            if let Some(w) = self.get(a) {
                if v.is_final() && w.is_final() && *v != w {
                    return Err(ReplicatedError::ConflictingObservation { key: a.to_string() });
                }
            }
        }
        Ok(self.merge(other))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Atom, Verdict> {
        self.0.iter()
    }

    pub fn retain(&mut self, mut f: impl FnMut(&Atom, Verdict) -> bool) {
        self.0.retain(|a, v| f(a, *v))
    }

    pub fn as_dict(&self) -> &Dict<Atom, Verdict> {
        &self.0
    }
}

impl FromIterator<(Atom, Verdict)> for Memory {
    fn from_iter<I: IntoIterator<Item = (Atom, Verdict)>>(iter: I) -> Self {
        let mut m = Memory::new();
        for (a, v) in iter {
            m.record(a, v);
        }
        m
    }
}

impl fmt::Debug for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (a, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}↦{v}")?;
        }
        f.write_str("]")
    }
}

/// Observations made by one component in one round.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Event {
    obs: BTreeMap<String, bool>,
}

impl Event {
    pub fn new() -> Self {
        Event::default()
    }

    /// Builds an event, rejecting non-final values and contradictions.
    pub fn from_observations<I, S>(items: I) -> Result<Event, ReplicatedError>
    where
        I: IntoIterator<Item = (S, Verdict)>,
        S: Into<String>,
    {
        let mut e = Event::new();
        for (name, v) in items {
            let name = name.into();
            let Some(b) = v.as_bool() else {
                return Err(ReplicatedError::NonFinalObservation { key: name });
            };
            e.observe(name, b)?;
        }
        Ok(e)
    }

    pub fn observe(&mut self, ap: impl Into<String>, value: bool) -> Result<(), ReplicatedError> {
        let ap = ap.into();
        match self.obs.get(&ap) {
            Some(old) if *old != value => Err(ReplicatedError::ConflictingObservation { key: ap }),
            _ => {
                self.obs.insert(ap, value);
                Ok(())
            }
        }
    }

    pub fn get(&self, ap: &str) -> Option<bool> {
        self.obs.get(ap).copied()
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.obs.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Union of two events; fails if they disagree on a proposition.
    pub fn union(&self, other: &Event) -> Result<Event, ReplicatedError> {
        let mut out = self.clone();
        for (ap, v) in other.iter() {
            out.observe(ap, v)?;
        }
        Ok(out)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({a},{})", Verdict::from_bool(v))?;
        }
        f.write_str("}")
    }
}

/// `memc(evt, enc)`: one entry per observation, keyed by the encoded atom.
pub fn mem_from_event(evt: &Event, enc: Encoder) -> Memory {
    evt.iter()
        .map(|(ap, v)| (enc.atom(&Atom::plain(ap)), Verdict::from_bool(v)))
        .collect()
}
