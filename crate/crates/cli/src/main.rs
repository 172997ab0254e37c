//! `sca`: validate, compose, solve, simulate and explore soft constraint
//! automata models.
//!
//! Exit codes: 0 on success, 1 when the model has diagnostics or a command
//! fails, 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sca_core::automata::Automaton;
use sca_core::dsl::{self, Diagnostic, Document, Elaborator};
use sca_core::execution::{self, Policy, Tiebreak};
use sca_core::patrol::{self, PatrolParams, PreferenceConfig};
use sca_core::scsp::Valuation;
use sca_core::{solve, Symbol};
use serde_json::json;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", render(.file, .diags))]
    Diagnostics { file: String, diags: Vec<Diagnostic> },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Patrol(#[from] patrol::PatrolError),
    #[error(transparent)]
    Exec(#[from] execution::ExecError),
    #[error(transparent)]
    Scsp(#[from] sca_core::ScspError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn render(file: &str, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{file}:{d}")).collect::<Vec<_>>().join("\n")
}

#[derive(Parser)]
#[command(name = "sca", version, about = "Soft constraint automata toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a model.
    Validate { file: PathBuf },
    /// Build a named automaton and write it out.
    Compose {
        file: PathBuf,
        #[arg(long)]
        target: String,
        /// Output path; the format follows the extension (.sca, .dot or .json).
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the solutions of a named problem.
    Solve {
        file: PathBuf,
        #[arg(long)]
        scsp: String,
    },
    /// Run an automaton under a policy and print the trace.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
        policy: PolicyArg,
        /// How the greedy policy breaks ties.
        #[arg(long, value_enum, default_value_t = TiebreakArg::Order)]
        tiebreak: TiebreakArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the trace here as well; `.json` selects JSON.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Only print the summary line.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Explore the reachable states of an automaton.
    Reach {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Emit the patrolling-agent model as a document.
    PatrolGen {
        #[command(flatten)]
        params: ParamArgs,
        /// Output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Where the automaton comes from: a model file or the built-in patrol model.
#[derive(Args)]
struct Source {
    #[arg(required_unless_present = "patrol", conflicts_with = "patrol")]
    file: Option<PathBuf>,
    /// Use the built-in patrolling agent.
    #[arg(long)]
    patrol: bool,
    /// The automaton to use; defaults to `Agent` or the only one declared.
    #[arg(long)]
    target: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// Path length.
    #[arg(long = "K", default_value_t = 3)]
    k: i64,
    /// Maximal deviation from the path.
    #[arg(long = "L", default_value_t = 1)]
    l: i64,
    /// Battery capacity.
    #[arg(long = "M", default_value_t = 4)]
    m: i64,
    /// Energy level below which the agent heads for the charger.
    #[arg(long = "ell", default_value_t = 2)]
    ell: i64,
    /// Charger position along the path.
    #[arg(long = "cx", default_value_t = 2)]
    cx: i64,
    /// Charger offset from the path.
    #[arg(long = "cy", default_value_t = 1)]
    cy: i64,
    /// Allow turning only while on the path.
    #[arg(long)]
    turn_on_path: bool,
}

impl ParamArgs {
    fn params(self) -> Result<PatrolParams, CliError> {
        let mut p = PatrolParams::new(self.k, self.l, self.m, self.ell, self.cx, self.cy)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        p.turn_on_path = self.turn_on_path;
        Ok(p)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Nondet,
    Pareto,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum TiebreakArg {
    Order,
    Assignment,
    Random,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn load(path: &Path) -> Result<Document, CliError> {
    dsl::parse(&read(path)?).map_err(|diags| CliError::Diagnostics { file: path.display().to_string(), diags })
}

fn elaborate(path: &Path, doc: &Document, target: &str) -> Result<Arc<Automaton>, CliError> {
    let name = Symbol::new(target);
    if !doc.automata.contains_key(&name) && !doc.compositions.contains_key(&name) {
        return Err(CliError::Usage(format!("no automaton named `{target}` in {}", path.display())));
    }
    Elaborator::new(doc)
        .automaton(&name)
        .map_err(|d| CliError::Diagnostics { file: path.display().to_string(), diags: vec![d] })
}

fn default_target(doc: &Document) -> Result<String, CliError> {
    let names: Vec<&Symbol> = doc.automata.keys().chain(doc.compositions.keys()).collect();
    if let Some(agent) = names.iter().find(|n| n.as_str() == "Agent") {
        return Ok(agent.to_string());
    }
    match names.as_slice() {
        [only] => Ok(only.to_string()),
        [] => Err(CliError::Usage("the model declares no automata".into())),
        _ => Err(CliError::Usage("the model declares several automata; pick one with --target".into())),
    }
}

fn source_automaton(src: &Source) -> Result<Arc<Automaton>, CliError> {
    match &src.file {
        Some(path) => {
            let doc = load(path)?;
            let target = match &src.target {
                Some(t) => t.clone(),
                None => default_target(&doc)?,
            };
            elaborate(path, &doc, &target)
        }
        None => {
            let params = src.params.params()?;
            let cfg = PreferenceConfig::default();
            let a = match src.target.as_deref() {
                None | Some("Agent") => patrol::build_agent(&params, &cfg)?,
                Some(name) => {
                    let model = patrol::PatrolModel::build(&params, &cfg)?;
                    if !model.automata.contains_key(name) {
                        return Err(CliError::Usage(format!("the patrol model has no automaton named `{name}`")));
                    }
                    model.get(name).clone()
                }
            };
            Ok(Arc::new(a))
        }
    }
}

fn automaton_json(name: &str, a: &Automaton) -> serde_json::Value {
    let transitions: Vec<_> = a
        .transitions()
        .iter()
        .map(|t| {
            let constraints: Vec<_> = t
                .label
                .constraints()
                .iter()
                .map(|c| {
                    let scope: Vec<&str> = c.scope().iter().map(|p| p.as_str()).collect();
                    match c.valuation() {
                        Valuation::Binary { predicate, value } => {
                            json!({ "scope": scope, "where": predicate.to_string(), "pref": value.to_string() })
                        }
                        Valuation::Table(entries) => {
                            let rows: Vec<_> =
                                entries.iter().map(|(k, v)| json!({ "assignment": k, "pref": v.to_string() })).collect();
                            json!({ "scope": scope, "table": rows })
                        }
                    }
                })
                .collect();
            json!({
                "source": t.source,
                "target": t.target,
                "fired": t.fired().iter().map(|p| p.as_str()).collect::<Vec<_>>(),
                "constraints": constraints,
            })
        })
        .collect();
    json!({
        "name": name,
        "semiring": a.semiring().to_string(),
        "states": a.states(),
        "initial": a.initial(),
        "ports": a.ports().iter().map(|p| p.as_str()).collect::<Vec<_>>(),
        "transitions": transitions,
    })
}

fn compose(file: &Path, target: &str, out: &Path) -> Result<(), CliError> {
    let doc = load(file)?;
    let a = elaborate(file, &doc, target)?;
    let text = match out.extension().and_then(|e| e.to_str()) {
        Some("sca") => {
            let decl = dsl::automaton_decl(target, &a)
                .map_err(|d| CliError::Diagnostics { file: file.display().to_string(), diags: vec![d] })?;
            let mut single = Document::default();
            single.automata.insert(Symbol::new(target), decl);
            dsl::serialize(&single)
        }
        Some("dot") => {
            let edges = a.transitions().iter().map(|t| (t.source.clone(), t.fired().clone(), t.target.clone())).collect();
            execution::to_dot(&execution::Reach { states: a.states().to_vec(), edges })
        }
        Some("json") => serde_json::to_string_pretty(&automaton_json(target, &a)).expect("plain JSON values"),
        _ => return Err(CliError::Usage(format!("{}: expected a .sca, .dot or .json output", out.display()))),
    };
    write(out, &text)?;
    println!("{target}: {} states, {} transitions -> {}", a.states().len(), a.transitions().len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { file } => {
            let doc = load(&file)?;
            println!(
                "{}: ok ({} semirings, {} automata, {} compositions, {} problems)",
                file.display(),
                doc.semirings.len(),
                doc.automata.len(),
                doc.compositions.len(),
                doc.problems.len()
            );
        }
        Command::Compose { file, target, out } => compose(&file, &target, &out)?,
        Command::Solve { file, scsp } => {
            let doc = load(&file)?;
            let name = Symbol::new(&scsp);
            if !doc.problems.contains_key(&name) {
                return Err(CliError::Usage(format!("no problem named `{scsp}` in {}", file.display())));
            }
            let p = Elaborator::new(&doc)
                .problem(&name)
                .map_err(|d| CliError::Diagnostics { file: file.display().to_string(), diags: vec![d] })?;
            let sols = solve(&p)?;
            for s in &sols {
                println!("{}  {}", s.assignment, s.preference);
            }
            println!("# {} solutions", sols.len());
        }
        Command::Simulate { source, steps, policy, tiebreak, seed, trace_out, quiet } => {
            let a = source_automaton(&source)?;
            let tiebreak = match tiebreak {
                TiebreakArg::Order => Tiebreak::TransitionOrder,
                TiebreakArg::Assignment => Tiebreak::AssignmentLex,
                TiebreakArg::Random => Tiebreak::SeededRandom,
            };
            let policy = match policy {
                PolicyArg::Nondet => Policy::Nondet { seed },
                PolicyArg::Pareto => Policy::Pareto { seed },
                PolicyArg::Greedy => Policy::GreedyGlobal { tiebreak, seed },
            };
            let trace = execution::run(&a, policy, steps)?;
            let lines = trace.to_lines();
            if !quiet {
                print!("{lines}");
            }
            if let Some(path) = trace_out {
                let text = if path.extension().is_some_and(|e| e == "json") {
                    serde_json::to_string_pretty(&trace).expect("traces serialize")
                } else {
                    lines
                };
                write(&path, &text)?;
            }
            let end = if trace.deadlocked { "deadlock" } else { "no deadlock" };
            eprintln!("{} steps, {end}, final state {}", trace.steps.len(), trace.last_state());
        }
        Command::Reach { source, dot } => {
            let a = source_automaton(&source)?;
            let reach = execution::reachable(&a)?;
            println!("{} of {} states reachable, {} edges", reach.states.len(), a.states().len(), reach.edges.len());
            if let Some(path) = dot {
                write(&path, &execution::to_dot(&reach))?;
            }
        }
        Command::PatrolGen { params, out } => {
            let doc = patrol::patrol_document(&params.params()?, &PreferenceConfig::default())?;
            let text = dsl::serialize(&doc);
            match out {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
