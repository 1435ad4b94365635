//! Synthetic decentralized traces and their CSV form.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::distr::{Bernoulli, Distribution as _};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::replicated::{Event, ReplicatedError};
use crate::spec::DecentralizedTrace;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Conflict(#[from] ReplicatedError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    /// `⊤` iff a draw exceeds 0.5.
    Normal { mean: f64, variance: f64 },
    /// `⊤` with probability `p` per observation; `n` is recorded only.
    Binomial { n: u32, p: f64 },
    /// `⊤` iff a draw exceeds 0.5.
    Beta { alpha: f64, beta: f64 },
}

impl Distribution {
    /// normal(0.5, 1), binomial(100, 0.3), beta(2, 5), beta(5, 1).
    pub fn standard_set() -> Vec<(&'static str, Distribution)> {
        vec![
            ("normal", Distribution::Normal { mean: 0.5, variance: 1.0 }),
            ("binomial", Distribution::Binomial { n: 100, p: 0.3 }),
            ("beta-1", Distribution::Beta { alpha: 2.0, beta: 5.0 }),
            ("beta-2", Distribution::Beta { alpha: 5.0, beta: 1.0 }),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceGenConfig {
    pub components: usize,
    #[serde(default = "default_aps")]
    pub aps_per_component: usize,
    #[serde(default = "default_length")]
    pub length: u32,
    pub distribution: Distribution,
    #[serde(default)]
    pub seed: u64,
}

fn default_aps() -> usize {
    2
}

fn default_length() -> u32 {
    60
}

impl TraceGenConfig {
    pub fn new(components: usize, distribution: Distribution, seed: u64) -> Self {
        TraceGenConfig { components, aps_per_component: 2, length: 60, distribution, seed }
    }
}

/// `A`, `B`, … `Z`, then `C26`, `C27`, ….
pub fn component_name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("C{i}")
    }
}

/// Lower-case component letter followed by the index: `a0`, `a1`, `b0`, ….
pub fn ap_name(component: usize, k: usize) -> String {
    if component < 26 {
        format!("{}{k}", (b'a' + component as u8) as char)
    } else {
        format!("c{component}_{k}")
    }
}

/// Propositions of each component.
pub fn component_aps(components: usize, aps_per_component: usize) -> BTreeMap<String, Vec<String>> {
    (0..components).map(|c| (component_name(c), (0..aps_per_component).map(|k| ap_name(c, k)).collect())).collect()
}

/// Proposition owner table matching [`component_aps`].
pub fn ap_owner(components: usize, aps_per_component: usize) -> BTreeMap<String, String> {
    component_aps(components, aps_per_component)
        .into_iter()
        .flat_map(|(c, aps)| aps.into_iter().map(move |a| (a, c.clone())))
        .collect()
}

enum Sampler {
    Threshold(Box<dyn Fn(&mut ChaCha8Rng) -> f64>),
    Coin(Bernoulli),
}

fn sampler(d: Distribution) -> Result<Sampler, TraceError> {
    let bad = |e: &dyn std::fmt::Display| TraceError::InvalidParameters(format!("{d:?}: {e}"));
    Ok(match d {
        Distribution::Normal { mean, variance } => {
            if !(variance >= 0.0) {
                return Err(bad(&"variance must be non-negative"));
            }
            let n = Normal::new(mean, variance.sqrt()).map_err(|e| bad(&e))?;
            Sampler::Threshold(Box::new(move |r| n.sample(r)))
        }
        Distribution::Beta { alpha, beta } => {
            let b = Beta::new(alpha, beta).map_err(|e| bad(&e))?;
            Sampler::Threshold(Box::new(move |r| b.sample(r)))
        }
        Distribution::Binomial { p, .. } => Sampler::Coin(Bernoulli::new(p).map_err(|e| bad(&e))?),
    })
}

/// Draws rounds in order, components in order, propositions in order, all
/// from one ChaCha8 stream seeded with `cfg.seed`.
pub fn generate(cfg: &TraceGenConfig) -> Result<DecentralizedTrace, TraceError> {
    let s = sampler(cfg.distribution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let layout = component_aps(cfg.components, cfg.aps_per_component);
    let mut tr = DecentralizedTrace::new(cfg.length);
    for t in 1..=cfg.length {
        for (c, aps) in &layout {
            let mut e = Event::new();
            for a in aps {
                let v = match &s {
                    Sampler::Threshold(f) => f(&mut rng) > 0.5,
                    Sampler::Coin(b) => b.sample(&mut rng),
                };
                e.observe(a.as_str(), v)?;
            }
            tr.set(t, c, e);
        }
    }
    Ok(tr)
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t: u32,
    component: String,
    ap: String,
    value: String,
}

pub fn write_csv<W: Write>(tr: &DecentralizedTrace, out: W) -> Result<(), TraceError> {
    let mut w = csv::Writer::from_writer(out);
    if tr.events().next().is_none() {
        w.write_record(["t", "component", "ap", "value"]).map_err(csv_io)?;
    }
    for (t, c, e) in tr.events() {
        for (ap, v) in e.iter() {
            let row = Row { t, component: c.to_string(), ap: ap.to_string(), value: if v { "1" } else { "0" }.into() };
            w.serialize(row).map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_err(e: &csv::Error) -> TraceError {
    TraceError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() }
}

fn csv_io(e: csv::Error) -> TraceError {
    TraceError::Io(std::io::Error::other(e))
}

/// Parses the CSV form. The trace length is the largest round present.
pub fn read_csv<R: Read>(input: R) -> Result<DecentralizedTrace, TraceError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rd.headers().map_err(|e| parse_err(&e))?.clone();
    let mut events: BTreeMap<(u32, String), Event> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| parse_err(&e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: Row = rec
            .deserialize(Some(&headers))
            .map_err(|e| TraceError::Parse { line, message: e.to_string() })?;
        let v = match row.value.as_str() {
            "1" => true,
            "0" => false,
            other => return Err(TraceError::Parse { line, message: format!("bad value {other:?}, expected 0 or 1") }),
        };
        if row.t == 0 {
            return Err(TraceError::Parse { line, message: "rounds start at 1".into() });
        }
        events.entry((row.t, row.component)).or_default().observe(row.ap, v)?;
    }
    let mut tr = DecentralizedTrace::new(0);
    for ((t, c), e) in events {
        tr.set(t, &c, e);
    }
    tr.ap_owner()?;
    Ok(tr)
}

pub fn store(tr: &DecentralizedTrace, path: &Path) -> Result<(), TraceError> {
    write_csv(tr, std::fs::File::create(path)?)
}

pub fn load(path: &Path) -> Result<DecentralizedTrace, TraceError> {
    read_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cfg(d: Distribution, len: u32) -> TraceGenConfig {
        TraceGenConfig { components: 3, aps_per_component: 2, length: len, distribution: d, seed: 7 }
    }

    #[test]
    fn names() {
        assert_eq!(component_name(0), "A");
        assert_eq!(component_name(2), "C");
        assert_eq!(ap_name(1, 0), "b0");
        assert_eq!(ap_owner(2, 2)["b1"], "B");
    }

    #[test]
    fn empty_and_deterministic() {
        let d = Distribution::Normal { mean: 0.5, variance: 1.0 };
        assert!(generate(&cfg(d, 0)).unwrap().is_empty());
        assert_eq!(generate(&cfg(d, 20)).unwrap(), generate(&cfg(d, 20)).unwrap());
        let mut other = cfg(d, 20);
        other.seed = 8;
        assert_ne!(generate(&other).unwrap(), generate(&cfg(d, 20)).unwrap());
    }

    #[test]
    fn every_round_is_complete() {
        for (_, d) in Distribution::standard_set() {
            let tr = generate(&cfg(d, 15)).unwrap();
            let g = tr.reconstruct_global().unwrap();
            assert_eq!(g.len(), 15);
            assert!(g.iter().all(|e| e.len() == 6));
        }
    }

    #[test]
    fn skewed_beta() {
        let c = TraceGenConfig {
            components: 1,
            aps_per_component: 1,
            length: 10_000,
            distribution: Distribution::Beta { alpha: 5.0, beta: 1.0 },
            seed: 1,
        };
        let tr = generate(&c).unwrap();
        let tops = tr.events().filter(|(_, _, e)| e.get("a0") == Some(true)).count();
        // P(X > 0.5) = 1 - 0.5^5 for Beta(5, 1).
        let rate = tops as f64 / 10_000.0;
        assert!(rate > 0.9 && (rate - (1.0 - 0.5f64.powi(5))).abs() < 0.01, "{rate}");
    }

    #[test]
    fn invalid_parameters() {
        for d in [
            Distribution::Binomial { n: 100, p: 1.5 },
            Distribution::Beta { alpha: -1.0, beta: 1.0 },
            Distribution::Normal { mean: 0.0, variance: -1.0 },
        ] {
            assert!(matches!(generate(&cfg(d, 3)), Err(TraceError::InvalidParameters(_))));
        }
    }

    #[test]
    fn csv_round_trip() {
        let tr = fixtures::two_round_trace();
        let mut buf = Vec::new();
        write_csv(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,component,ap,value\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), tr);

        let mut buf = Vec::new();
        write_csv(&DecentralizedTrace::new(0), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "t,component,ap,value\n");
        assert!(read_csv(buf.as_slice()).unwrap().is_empty());

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let g = generate(&cfg(Distribution::Binomial { n: 100, p: 0.3 }, 12)).unwrap();
        store(&g, &p).unwrap();
        assert_eq!(load(&p).unwrap(), g);
    }

    #[test]
    fn csv_errors() {
        let bad = "t,component,ap,value\n1,A,a,1\n2,A,a,yes\n";
        match read_csv(bad.as_bytes()) {
            Err(TraceError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let clash = "t,component,ap,value\n1,A,a,1\n1,B,a,0\n";
        assert!(matches!(read_csv(clash.as_bytes()), Err(TraceError::Conflict(_))));
        let twice = "t,component,ap,value\n1,A,a,1\n1,A,a,0\n";
        assert!(matches!(read_csv(twice.as_bytes()), Err(TraceError::Conflict(_))));
    }
}
