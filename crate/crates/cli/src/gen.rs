//! `gen-traces`: batches of synthetic traces written as CSV files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::info;
use serde::{Deserialize, Serialize};

use demon_core::spec::DecentralizedTrace;
use demon_core::traces::{self, Distribution, TraceGenConfig};

/// `count` traces per distribution, all over the same component layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenBatch {
    pub components: usize,
    #[serde(default = "two")]
    pub aps_per_component: usize,
    #[serde(default = "sixty")]
    pub length: u32,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    /// The standard four when absent.
    #[serde(default)]
    pub distributions: Option<BTreeMap<String, Distribution>>,
}

fn two() -> usize {
    2
}

fn sixty() -> u32 {
    60
}

fn one() -> usize {
    1
}

impl GenBatch {
    pub fn distributions(&self) -> Vec<(String, Distribution)> {
        match &self.distributions {
            Some(d) => d.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            None => Distribution::standard_set().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// Trace `i` of the `k`-th distribution uses seed `seed + k * count + i`.
    pub fn configs(&self) -> Vec<(String, TraceGenConfig)> {
        let mut out = Vec::new();
        for (k, (name, d)) in self.distributions().into_iter().enumerate() {
            for i in 0..self.count {
                let cfg = TraceGenConfig {
                    components: self.components,
                    aps_per_component: self.aps_per_component,
                    length: self.length,
                    distribution: d,
                    seed: self.seed.wrapping_add((k * self.count + i) as u64),
                };
                out.push((format!("{name}-{}c-{i:03}", self.components), cfg));
            }
        }
        out
    }
}

/// A batch or a list of batches.
pub fn parse_config(text: &str) -> anyhow::Result<Vec<GenBatch>> {
    let v: serde_json::Value = serde_json::from_str(text).context("trace config is not valid JSON")?;
    let batches = if v.is_array() {
        serde_json::from_value(v).context("invalid trace config")?
    } else {
        vec![serde_json::from_value(v).context("invalid trace config")?]
    };
    Ok(batches)
}

/// Checks every batch before generating anything.
pub fn traces(batches: &[GenBatch], seed: Option<u64>) -> anyhow::Result<Vec<(String, DecentralizedTrace)>> {
    let mut all = Vec::new();
    let mut seen = BTreeSet::new();
    for b in batches {
        let mut b = b.clone();
        if let Some(s) = seed {
            b.seed = s;
        }
        if b.components == 0 {
            bail!("invalid parameters: a batch needs at least one component");
        }
        for (id, cfg) in b.configs() {
            if !seen.insert(id.clone()) {
                bail!("two batches produce the trace id {id:?}");
            }
            traces::generate(&TraceGenConfig { length: 0, ..cfg.clone() })?;
            all.push((id, cfg));
        }
    }
    all.into_iter().map(|(id, cfg)| Ok((id, traces::generate(&cfg)?))).collect()
}

pub fn cmd_gen_traces(config: &Path, out_dir: &Path, seed: Option<u64>) -> anyhow::Result<Vec<PathBuf>> {
    let batches = parse_config(&crate::read_text(config)?)?;
    let generated = traces(&batches, seed)?;
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut written = Vec::new();
    for (id, tr) in &generated {
        let path = out_dir.join(format!("{id}.csv"));
        traces::store(tr, &path).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    info!("wrote {} traces to {}", written.len(), out_dir.display());
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_and_ids() {
        let b: GenBatch = serde_json::from_str(r#"{"components": 3, "count": 2, "seed": 10}"#).unwrap();
        let cfgs = b.configs();
        assert_eq!(cfgs.len(), 8);
        assert_eq!(cfgs[0].0, "normal-3c-000");
        let seeds: Vec<u64> = cfgs.iter().map(|(_, c)| c.seed).collect();
        assert_eq!(seeds, (10..18).collect::<Vec<_>>());
    }

    #[test]
    fn bad_parameters_are_rejected_up_front() {
        let b = parse_config(r#"{"components": 2, "distributions": {"x": {"kind": "binomial", "n": 5, "p": 1.5}}}"#).unwrap();
        let e = traces(&b, None).unwrap_err();
        assert!(e.to_string().contains("invalid parameters"), "{e}");
        assert!(parse_config(r#"{"components": 2, "colour": 1}"#).is_err());
    }

    #[test]
    fn duplicate_ids() {
        let b = parse_config(r#"[{"components": 2}, {"components": 2, "seed": 4}]"#).unwrap();
        assert!(traces(&b, None).is_err());
    }
}
