//! `run`: one monitoring run over one trace.

use std::path::Path;

use anyhow::{bail, Context};
use log::info;

use demon_core::analysis::Graph;
use demon_core::engine::{simulate, SimConfig, SimRun, SpecInput, System};
use demon_core::spec::{DecentralizedTrace, Specification};
use demon_core::synthesis::parse_ltl;
use demon_core::traces;

/// An automaton file or LTL text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecSource {
    File(std::path::PathBuf),
    Formula(String),
}

impl SpecSource {
    pub fn load(&self) -> anyhow::Result<SpecInput> {
        Ok(match self {
            SpecSource::File(p) => SpecInput::Automaton(
                Specification::from_json(&crate::read_text(p)?).with_context(|| p.display().to_string())?,
            ),
            SpecSource::Formula(f) => SpecInput::Formula(parse_ltl(f).with_context(|| format!("formula {f:?}"))?),
        })
    }

    pub fn id(&self) -> String {
        match self {
            SpecSource::File(p) => crate::stem(p),
            SpecSource::Formula(f) => f.clone(),
        }
    }
}

/// Components and owners come from the trace; the graph is complete unless
/// one is given.
pub fn system_for(tr: &DecentralizedTrace, graph: Option<&Graph>) -> anyhow::Result<System> {
    let mut sys = System::from_trace(tr)?;
    if let Some(g) = graph {
        if let Some(c) = sys.graph.nodes.iter().find(|c| !g.nodes.contains(*c)) {
            bail!("component {c:?} of the trace is missing from the system graph");
        }
        sys.graph = g.clone();
    }
    Ok(sys)
}

pub fn cmd_run(
    cfg: &SimConfig,
    spec: &SpecSource,
    trace: &Path,
    graph: Option<&Path>,
) -> anyhow::Result<SimRun> {
    let input = spec.load()?;
    let tr = traces::load(trace).with_context(|| trace.display().to_string())?;
    let g = match graph {
        Some(p) => Some(Graph::from_json(&crate::read_text(p)?).with_context(|| format!("{}: invalid graph", p.display()))?),
        None => None,
    };
    let sys = system_for(&tr, g.as_ref())?;
    let run = simulate(cfg, &input, &sys, &tr)?;
    info!("{} {}: verdict {} at round {}", run.algorithm, spec.id(), run.verdict, run.stop_round);
    Ok(run)
}
