//! `experiment`: every (algorithm, spec, trace) triple of a config, run in
//! parallel, one metrics row each.
//!
//! Paths in the config are relative to the config's directory, so a folder
//! holding the config, its specs and traces can be moved as a whole.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use demon_core::engine::{simulate, Algorithm, SpecInput};
use demon_core::spec::DecentralizedTrace;
use demon_core::traces;

use crate::gen::GenBatch;
use crate::run::{system_for, SpecSource};
use crate::{resolve, stem, write_rows, Format, Row, SimOverrides};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEntry {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub formula: Option<String>,
}

/// Any combination of a directory of `.csv` files, listed files and
/// generated batches.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSource {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub generate: Vec<GenBatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub specs: Vec<SpecEntry>,
    pub traces: TraceSource,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub sim: SimOverrides,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn check(&self) -> anyhow::Result<()> {
        if self.specs.is_empty() {
            bail!("experiment needs at least one spec");
        }
        let t = &self.traces;
        if t.dir.is_none() && t.files.is_empty() && t.generate.is_empty() {
            bail!("experiment needs a trace source");
        }
        if self.algorithms.is_empty() {
            bail!("experiment needs at least one algorithm");
        }
        for (i, s) in self.specs.iter().enumerate() {
            if s.file.is_some() == s.formula.is_some() {
                bail!("spec #{i} needs exactly one of `file` and `formula`");
            }
        }
        Ok(())
    }
}

/// Options that do not come from the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the config's list when non-empty.
    pub algorithms: Vec<Algorithm>,
    pub sim: SimOverrides,
    pub strict: bool,
    pub threads: Option<usize>,
}

struct Loaded {
    specs: Vec<(String, SpecInput)>,
    traces: Vec<(String, DecentralizedTrace)>,
}

/// Missing or unreadable trace files are skipped with a warning unless
/// `strict`.
fn load(cfg: &ExperimentConfig, base: &Path, strict: bool) -> anyhow::Result<Loaded> {
    let mut specs = Vec::new();
    for s in &cfg.specs {
        let src = match (&s.file, &s.formula) {
            (Some(f), _) => SpecSource::File(resolve(base, f)),
            (_, Some(f)) => SpecSource::Formula(f.clone()),
            _ => unreachable!("checked"),
        };
        specs.push((s.id.clone().unwrap_or_else(|| src.id()), src.load()?));
    }
    let mut files = Vec::new();
    if let Some(d) = &cfg.traces.dir {
        let d = resolve(base, d);
        let mut listed: Vec<PathBuf> = fs::read_dir(&d)
            .with_context(|| format!("cannot list {}", d.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        listed.sort();
        files.extend(listed);
    }
    files.extend(cfg.traces.files.iter().map(|f| resolve(base, f)));
    let mut traces = Vec::new();
    for f in files {
        match traces::load(&f) {
            Ok(tr) => traces.push((stem(&f), tr)),
            Err(e) if !strict => warn!("skipping trace {}: {e}", f.display()),
            Err(e) => return Err(anyhow::Error::new(e).context(format!("trace {}", f.display()))),
        }
    }
    traces.extend(crate::gen::traces(&cfg.traces.generate, None)?);
    Ok(Loaded { specs, traces })
}

/// Rows sorted by algorithm, component count, spec id and trace id.
pub fn execute(cfg: &ExperimentConfig, base: &Path, opts: &RunOptions) -> anyhow::Result<Vec<Row>> {
    cfg.check()?;
    let data = load(cfg, base, opts.strict)?;
    let sim = cfg.sim.or(&opts.sim);
    let mut jobs = Vec::new();
    for a in &cfg.algorithms {
        for (si, _) in data.specs.iter().enumerate() {
            for (ti, _) in data.traces.iter().enumerate() {
                jobs.push((*a, si, ti));
            }
        }
    }
    info!("{} runs", jobs.len());
    let work = || -> Vec<anyhow::Result<Option<Row>>> {
        jobs.par_iter()
            .map(|(a, si, ti)| {
                let (sid, input) = &data.specs[*si];
                let (tid, tr) = &data.traces[*ti];
                let attempt = system_for(tr, None).and_then(|sys| Ok(simulate(&sim.config(*a), input, &sys, tr)?));
                match attempt {
                    Ok(run) => Ok(Some(Row::new(&run, sid, tid))),
                    Err(e) if !opts.strict => {
                        warn!("skipping {a} {sid} {tid}: {e:#}");
                        Ok(None)
                    }
                    Err(e) => Err(e.context(format!("{a} {sid} {tid}"))),
                }
            })
            .collect()
    };
    let results = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(work),
        None => work(),
    };
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(rows)
}

/// Writes to `out`, else the config's `output`, else stdout. Returns the
/// rows written.
pub fn cmd_experiment(config: &Path, out: Option<&Path>, format: Format, opts: &RunOptions) -> anyhow::Result<Vec<Row>> {
    let text = crate::read_text(config)?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("{}: invalid experiment config", config.display()))?;
    if !opts.algorithms.is_empty() {
        cfg.algorithms = opts.algorithms.clone();
    }
    let base = config.parent().unwrap_or(Path::new("."));
    let rows = execute(&cfg, base, opts)?;
    let target = out.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(|p| resolve(base, p)));
    match target {
        Some(p) => {
            let f = File::create(&p).with_context(|| format!("cannot write {}", p.display()))?;
            write_rows(&rows, format, BufWriter::new(f))?;
            info!("wrote {} rows to {}", rows.len(), p.display());
        }
        None => write_rows(&rows, format, std::io::stdout().lock())?,
    }
    Ok(rows)
}
