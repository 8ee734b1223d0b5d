//! `unitmcts` command-line driver.
//!
//! Exit codes: 0 on success, 2 on a configuration or usage error, 1 when a
//! run fails at runtime (unreadable start file, unwritable report).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use unitmcts_core::harness::{
    emit_report, run_baseline, run_constrained_task, run_property_task, to_csv, to_json,
    BaselinePolicy, HarnessError, ReportFormat, RunRecord, TaskSpec,
};
use unitmcts_core::mcts::SearchConfig;
use unitmcts_core::properties::{ObjectiveKind, SENTINEL};
use unitmcts_core::smiles::{parse, write_canonical};

#[derive(Parser, Debug)]
#[command(name = "unitmcts", version, about = "Molecular optimization by MCTS over unit graph edits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a property from the empty molecule.
    Prop {
        #[arg(long, value_enum)]
        objective: Objective,
        #[arg(long, default_value_t = 38)]
        steps: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Improve penalized logP of each start molecule under a similarity floor.
    Constrained {
        #[arg(long)]
        start_file: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a reference searcher on either task. Passing --start-file selects
    /// the constrained task.
    Baseline {
        #[arg(long, value_enum)]
        policy: Policy,
        #[arg(long, value_enum, default_value_t = Objective::Plogp)]
        objective: Objective,
        /// Defaults to 38, or 20 with --start-file.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, requires = "delta")]
        start_file: Option<PathBuf>,
        #[arg(long, requires = "start_file")]
        delta: Option<f64>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Score one molecule.
    Score {
        #[arg(long)]
        smiles: String,
        #[arg(long, value_enum)]
        objective: Objective,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Objective {
    Qed,
    Plogp,
}

impl From<Objective> for ObjectiveKind {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Qed => ObjectiveKind::Qed,
            Objective::Plogp => ObjectiveKind::Plogp,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Random,
    Greedy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Expansion width: a positive count or `all`.
#[derive(Clone, Copy, Debug)]
struct Width(Option<usize>);

impl FromStr for Width {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(Width(None));
        }
        s.parse()
            .map(|k| Width(Some(k)))
            .map_err(|_| format!("expected a count or 'all', got '{s}'"))
    }
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    /// First seed; episode i uses seed + i.
    #[arg(long, env = "UNITMCTS_SEED", default_value_t = 0)]
    seed: u64,
    /// MCTS iterations per committed move.
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value = "10")]
    k: Width,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    rollout_depth: usize,
    /// Objective evaluations allowed per episode.
    #[arg(long)]
    max_evals: Option<u64>,
    /// Record wall-clock time (makes reports differ between runs).
    #[arg(long)]
    timing: bool,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            c: self.c,
            k: self.k.0,
            epsilon: self.epsilon,
            rollout_depth: self.rollout_depth,
            alpha: self.alpha,
            num_iterations: self.iters,
            max_evals: self.max_evals,
            timing: self.timing,
            ..SearchConfig::default()
        }
    }

    fn apply(&self, spec: &mut TaskSpec) {
        spec.num_seeds = self.seeds;
        spec.base_seed = self.seed;
        spec.search = self.config();
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure {
            code: if e.is_config() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Prop {
            objective,
            steps,
            search,
            output,
        } => {
            let mut spec = TaskSpec::property(objective.into(), steps);
            search.apply(&mut spec);
            write(&run_property_task(&spec)?, &output)
        }
        Command::Constrained {
            start_file,
            delta,
            steps,
            search,
            output,
        } => {
            let mut spec = TaskSpec::constrained(start_file, delta);
            spec.max_steps = steps;
            search.apply(&mut spec);
            write(&run_constrained_task(&spec)?, &output)
        }
        Command::Baseline {
            policy,
            objective,
            steps,
            start_file,
            delta,
            search,
            output,
        } => {
            let mut spec = match (start_file, delta) {
                (Some(path), Some(delta)) => {
                    let mut spec = TaskSpec::constrained(path, delta);
                    spec.objective = objective.into();
                    spec
                }
                _ => TaskSpec::property(objective.into(), 38),
            };
            if let Some(steps) = steps {
                spec.max_steps = steps;
            }
            search.apply(&mut spec);
            let policy = match policy {
                Policy::Random => BaselinePolicy::RandomWalk,
                Policy::Greedy => BaselinePolicy::Greedy,
            };
            write(&run_baseline(&spec, policy)?, &output)
        }
        Command::Score { smiles, objective } => {
            let mol = parse(&smiles).map_err(|e| usage(format!("cannot parse '{smiles}': {e}")))?;
            let kind = ObjectiveKind::from(objective);
            let score = kind.build().score(&mol);
            if score == SENTINEL {
                return Err(usage(format!("'{smiles}' has no {kind} score")));
            }
            println!("{}\t{score}", write_canonical(&mol));
            Ok(())
        }
    }
}

fn write(record: &RunRecord, output: &OutputArgs) -> Result<(), Failure> {
    let format = match output.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    if let Some(path) = &output.out {
        emit_report(record, format, path)?;
        info!("wrote {}", path.display());
        return Ok(());
    }
    let text = match format {
        ReportFormat::Csv => to_csv(record)?,
        ReportFormat::Json => to_json(record)?,
    };
    std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })
}
