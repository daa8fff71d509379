//! Command line entry points and the HTTP service over a result store.

pub mod server;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use archrecon_core::harness::{
    descriptive_stats, indicator_report, make_synthetic_system, run_matrix, slice_test, stats_csv, SyntheticSpec,
};
use archrecon_core::objectives::objective_index;
use archrecon_core::{
    parse_graph, parse_model, ExperimentMatrix, LayerStyle, ModelDocument, Outcome, ResultSet, RunConfig,
    RunDefinition, RunStatus, SliceKey, Store, OBJECTIVE_NAMES,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const PORT_VAR: &str = "ARCHRECON_PORT";

#[derive(Debug, Parser)]
#[command(name = "archrecon", version, about = "Layered architecture reconstruction by multi-objective search")]
pub struct Cli {
    /// Result store root.
    #[arg(long, global = true, default_value = "results")]
    pub store: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a dependency graph and conceptual model.
    Ingest {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Execute a single run described by a run file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Execute every run of an experiment matrix, skipping completed ones.
    Matrix {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Indicator report (JSON lines) over completed runs.
    Indicators {
        /// Comma-separated run ids; every completed run when omitted.
        #[arg(long, value_delimiter = ',')]
        runs: Vec<String>,
        /// Report every n-th snapshot plus the last.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Min/max/median per slice as CSV, with a Kruskal-Wallis test on stderr.
    Stats {
        /// Comma-separated slice keys: algorithm, system, scenario.
        #[arg(long, value_delimiter = ',', required = true)]
        by: Vec<SliceKey>,
        #[arg(long, default_value = "violations")]
        objective: String,
        #[arg(long, value_delimiter = ',')]
        runs: Vec<String>,
    },
    /// Write the final front of a run.
    Export {
        #[arg(long)]
        run: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = PORT_VAR, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Runs executed at the same time.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Write a synthetic system with a planted layering.
    Synth {
        #[arg(long, default_value_t = 120)]
        units: usize,
        #[arg(long, default_value_t = 12)]
        packages: usize,
        #[arg(long, default_value_t = 4)]
        layers: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        transient: bool,
        /// Writes `<name>.graph.json` and `<name>.model.json` here.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value = "synthetic")]
        name: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A single run: graph and model paths (relative to this file) plus settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub system: String,
    pub graph: PathBuf,
    pub model: PathBuf,
    #[serde(default)]
    pub config: RunConfig,
}

impl RunFile {
    pub fn load(path: &Path) -> anyhow::Result<RunDefinition> {
        let text = read(path)?;
        let file: RunFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let graph = parse_graph(&read(&dir.join(&file.graph))?)?;
        let (model, pins) = parse_model(&read(&dir.join(&file.model))?)?;
        file.config.validate()?;
        Ok(RunDefinition {
            system: file.system,
            graph: graph.to_document(),
            model: ModelDocument::from_model(&model, &pins),
            config: file.config,
        })
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parses `args` and runs the command: 0 on success, 1 on usage errors, 2 on data errors.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn selected_runs(store: &Store, runs: Vec<String>) -> anyhow::Result<Vec<String>> {
    if !runs.is_empty() {
        return Ok(runs);
    }
    let ids: Vec<String> = store
        .list()?
        .into_iter()
        .filter(|r| r.status == RunStatus::Done)
        .map(|r| r.id)
        .collect();
    if ids.is_empty() {
        bail!("no completed runs in {}", store.root().display());
    }
    Ok(ids)
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Ingest { graph, model } => {
            let g = parse_graph(&read(&graph)?)?;
            let (m, pins) = parse_model(&read(&model)?)?;
            archrecon_core::bind_pins(&pins, &g, &m)?;
            writeln!(
                out,
                "nodes: {}\nedges: {}\nlayers: {}\npackage slots: {}\npins: {}",
                g.unit_count(),
                g.edges().len(),
                m.layer_count(),
                m.slots_for(&g),
                pins.len()
            )?;
        }
        Command::Run { config } => {
            let definition = RunFile::load(&config)?;
            let store = Store::open(&cli.store)?;
            match store.execute(&definition)? {
                Outcome::AlreadyComplete(r) => writeln!(out, "run {} already complete", r.id)?,
                Outcome::Executed(r) => writeln!(
                    out,
                    "run {} done: {} evaluations in {:.1}s",
                    r.id,
                    r.latest_eval_count,
                    r.wall_time.unwrap_or_default()
                )?,
            }
        }
        Command::Matrix { matrix, workers } => {
            let matrix = ExperimentMatrix::load(&matrix)?;
            let store = Store::open(&cli.store)?;
            let outcome = run_matrix(&matrix, &store, workers)?;
            writeln!(
                out,
                "{} runs: {} executed, {} already complete, {} failed",
                outcome.run_ids.len(),
                outcome.executed,
                outcome.skipped,
                outcome.failed.len()
            )?;
            for (id, error) in &outcome.failed {
                writeln!(out, "failed {id}: {error}")?;
            }
            if !outcome.failed.is_empty() {
                bail!("{} runs failed", outcome.failed.len());
            }
        }
        Command::Indicators { runs, stride } => {
            let store = Store::open(&cli.store)?;
            let ids = selected_runs(&store, runs)?;
            for record in indicator_report(&store, &ids, stride)? {
                serde_json::to_writer(&mut out, &record)?;
                writeln!(out)?;
            }
        }
        Command::Stats { by, objective, runs } => {
            let index = objective_index(&objective)
                .with_context(|| format!("unknown objective `{objective}`; expected one of {}", OBJECTIVE_NAMES.join(", ")))?;
            let store = Store::open(&cli.store)?;
            let ids = selected_runs(&store, runs)?;
            let results = ResultSet::load_runs(&store, &ids)?;
            write!(out, "{}", stats_csv(&descriptive_stats(&results, &by, index)))?;
            match slice_test(&results, &by, index) {
                Ok(kw) => eprintln!("kruskal-wallis: H={:.4} df={} p={:.4e}", kw.h, kw.df, kw.p),
                Err(e) => eprintln!("kruskal-wallis: not computed ({e})"),
            }
        }
        Command::Export { run, format, output } => {
            let store = Store::open(&cli.store)?;
            let front = store.front(&run)?;
            let body = match format {
                Format::Json => serde_json::to_string_pretty(&front)? + "\n",
                Format::Csv => {
                    let mut s = format!("index,{},unit_to_package,package_to_layer\n", OBJECTIVE_NAMES.join(","));
                    for (i, m) in front.iter().enumerate() {
                        let values: Vec<String> = m.objectives.0.iter().map(f64::to_string).collect();
                        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
                        s.push_str(&format!(
                            "{i},{},{},{}\n",
                            values.join(","),
                            join(&m.solution.unit_to_package),
                            join(&m.solution.package_to_layer)
                        ));
                    }
                    s
                }
            };
            match output {
                Some(path) => fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?,
                None => out.write_all(body.as_bytes())?,
            }
        }
        Command::Serve { port, host, workers } => {
            let store = Store::open(&cli.store)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(store, &host, port, workers))?;
        }
        Command::Synth {
            units,
            packages,
            layers,
            noise,
            seed,
            transient,
            out_dir,
            name,
        } => {
            let mut spec = SyntheticSpec::new(units, packages, layers, noise, seed);
            if transient {
                spec.style = LayerStyle::Transient;
            }
            let sys = make_synthetic_system(&spec)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let graph = out_dir.join(format!("{name}.graph.json"));
            let model = out_dir.join(format!("{name}.model.json"));
            fs::write(&graph, serde_json::to_string_pretty(&sys.graph.to_document())?)?;
            fs::write(&model, serde_json::to_string_pretty(&ModelDocument::from_model(&sys.model, &[]))?)?;
            writeln!(out, "wrote {} and {}", graph.display(), model.display())?;
        }
    }
    Ok(())
}
