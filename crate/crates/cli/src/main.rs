use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use logex_cli::{
    analyze, check, policy_from_toml, prove, solve, validate_exercises, CheckArgs, Failure, Metric, EXIT_USAGE,
};
use logex_core::policy::FeedbackPolicy;
use logex_core::state::ChainDirection;
use logex_core::strategy::NormalForm;

const EXIT_CODES: &str = "Exit codes: 0 ok, 1 usage, 2 parse error, 3 semantic error (not equivalent, unsolvable), 4 malformed log.";

const ANALYZE_HELP: &str = "\
Columns per metric (empty cells print as `-` in tables, empty in CSV):
  errors      session, exercise, kind, accepted, errors, error_fraction
  time        session, exercise, kind, accepted, minutes_per_step, partial
  efficiency  session, exercise, kind, accepted, required, completed, efficiency
  completion  session, kind, exercises, completion_ratio, error_count

accepted counts accepted steps that changed the formula, including undone
ones. error_fraction is errors per accepted step. minutes_per_step runs to
completion, or to the last event when partial. efficiency is accepted steps
over the worked-solution length to the student's final formula. required is
the length of the full worked solution; completion_ratio is completed steps
over required steps of the set. Sessions appear in id order.";

#[derive(Parser)]
#[command(name = "logex", version, about = "Propositional rewriting tutor: solve, prove, check steps, analyze logs", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Dnf,
    Cnf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Errors,
    Time,
    Efficiency,
    Completion,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a formula to a normal form; one line per step: rule id, formula.
    Solve {
        #[arg(long = "to", value_enum)]
        to: Target,
        formula: String,
    },
    /// Prove two formulas equivalent; lines are direction, rule id, formula.
    Prove { lhs: String, rhs: String },
    /// Diagnose one step and print its diagnosis record as JSON.
    Check {
        #[arg(long)]
        before: String,
        #[arg(long)]
        after: String,
        /// Rule id or family name motivating the step.
        #[arg(long)]
        rule: Option<String>,
        /// Require a correct rule name.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value = "forward")]
        direction: Direction,
        /// Feedback-policy file (TOML); the enhanced policy by default.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Exercise files.
    Exercises {
        #[command(subcommand)]
        command: ExercisesCommand,
    },
    /// Tabulate a learning metric from an event log.
    #[command(after_help = ANALYZE_HELP)]
    Analyze {
        log: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Comma-separated output with a header row.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Subcommand)]
enum ExercisesCommand {
    /// Check an exercise file: records, formulas, ids, ordinals, solvability.
    Validate { file: PathBuf },
}

fn read(path: &PathBuf, code: u8) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code,
        message: format!("{}: {e}", path.display()),
    })
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Solve { to, formula } => solve(
            &formula,
            match to {
                Target::Dnf => NormalForm::Dnf,
                Target::Cnf => NormalForm::Cnf,
            },
        ),
        Command::Prove { lhs, rhs } => prove(&lhs, &rhs),
        Command::Check {
            before,
            after,
            rule,
            strict,
            direction,
            policy,
        } => {
            let policy = match policy {
                Some(p) => policy_from_toml(&read(&p, EXIT_USAGE)?)?,
                None => FeedbackPolicy::default(),
            };
            check(&CheckArgs {
                before,
                after,
                rule,
                strict,
                direction: match direction {
                    Direction::Forward => ChainDirection::Forward,
                    Direction::Backward => ChainDirection::Backward,
                },
                policy,
            })
        }
        Command::Exercises {
            command: ExercisesCommand::Validate { file },
        } => validate_exercises(&read(&file, logex_cli::EXIT_PARSE)?),
        Command::Analyze { log, metric, csv } => {
            let metric = match metric {
                MetricArg::Errors => Metric::Errors,
                MetricArg::Time => Metric::Time,
                MetricArg::Efficiency => Metric::Efficiency,
                MetricArg::Completion => Metric::Completion,
            };
            analyze(&read(&log, logex_cli::EXIT_MALFORMED_LOG)?, metric, csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("logex: {f}");
            ExitCode::from(f.code)
        }
    }
}
