use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use demon_cli::check::{cmd_check, Mode};
use demon_cli::experiment::{cmd_experiment, RunOptions};
use demon_cli::gen::cmd_gen_traces;
use demon_cli::run::{cmd_run, SpecSource};
use demon_cli::{write_rows, Format, Row, SimOverrides, EXIT_FAILS, EXIT_INPUT, EXIT_OK};
use demon_core::engine::Algorithm;
use demon_core::expr::set_exact_threshold;

/// Decentralized monitoring: trace generation, static checks and simulated
/// runs.
///
/// DEMON_EXACT_ATOMS sets how many distinct atoms an expression may have
/// before exact simplification gives way to constant folding.
#[derive(Parser)]
#[command(name = "demon", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write synthetic traces described by a JSON config as CSV files.
    GenTraces {
        config: PathBuf,
        out_dir: PathBuf,
        /// Base seed, replacing the config's.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exit 0 when the property holds, 1 when it does not, 2 on bad input.
    Check {
        /// Specification, decentralized specification or network graph.
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// System graph (compatibility).
        #[arg(long)]
        system: Option<PathBuf>,
        /// Fixed placements (compatibility).
        #[arg(long)]
        constraint: Option<PathBuf>,
    },
    /// Monitor one trace and print the metrics row.
    #[command(group(ArgGroup::new("what").required(true).args(["spec", "formula"])))]
    Run {
        /// Automaton file.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// LTL formula.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "ORCH")]
        algorithm: Algorithm,
        /// Communication graph; complete when omitted.
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[command(flatten)]
        sim: SimOverrides,
    },
    /// Run every (algorithm, spec, trace) triple of a config.
    Experiment {
        config: PathBuf,
        /// Output file; the config's `output` or stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Fail on missing traces and failed runs instead of skipping them.
        #[arg(long)]
        strict: bool,
        /// Replaces the config's algorithms; repeatable.
        #[arg(long)]
        algorithm: Vec<Algorithm>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        sim: SimOverrides,
    },
}

fn exact_atoms_from_env() -> Result<(), String> {
    match std::env::var("DEMON_EXACT_ATOMS") {
        Ok(v) => {
            let n = v.trim().parse().map_err(|_| format!("DEMON_EXACT_ATOMS: not a number: {v:?}"))?;
            set_exact_threshold(n);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn dispatch(cmd: Cmd) -> anyhow::Result<u8> {
    let mut out = io::stdout().lock();
    match cmd {
        Cmd::GenTraces { config, out_dir, seed } => {
            for p in cmd_gen_traces(&config, &out_dir, seed)? {
                writeln!(out, "{}", p.display())?;
            }
            Ok(EXIT_OK)
        }
        Cmd::Check { input, mode, system, constraint } => {
            let r = cmd_check(&input, mode, system.as_deref(), constraint.as_deref())?;
            writeln!(out, "{}", if r.holds { "holds" } else { "fails" })?;
            for l in &r.lines {
                writeln!(out, "  {l}")?;
            }
            Ok(if r.holds { EXIT_OK } else { EXIT_FAILS })
        }
        Cmd::Run { spec, formula, trace, algorithm, system, format, sim } => {
            let src = match (spec, formula) {
                (Some(p), _) => SpecSource::File(p),
                (_, Some(f)) => SpecSource::Formula(f),
                _ => unreachable!("clap requires one"),
            };
            let run = cmd_run(&sim.config(algorithm), &src, &trace, system.as_deref())?;
            match format {
                Format::Csv => {
                    let row = Row::new(&run, &src.id(), &demon_cli::stem(&trace));
                    write_rows(&[row], format, &mut out)?;
                }
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&run)?)?,
            }
            Ok(EXIT_OK)
        }
        Cmd::Experiment { config, out, format, strict, algorithm, threads, sim } => {
            let opts = RunOptions { algorithms: algorithm, sim, strict, threads };
            cmd_experiment(&config, out.as_deref(), format, &opts)?;
            Ok(EXIT_OK)
        }
    }
}

/// A closed stdout (`demon ... | head`) is not an error.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = exact_atoms_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) if is_broken_pipe(&e) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
