//! Command line front end: argument parsing, the generation pipeline and
//! the statistics files.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::builder::PossibleValuesParser;
use clap::{ArgAction, Parser, ValueEnum};
use log::{info, LevelFilter};

use testgen_core::analysis::{build_test_cluster, LoadError, Project};
use testgen_core::assertgen::{generate_mutants, synthesize_assertions, AssertionConfig, KillReport};
use testgen_core::export::{prepare_suite, render_prepared, write_module, ExportError};
use testgen_core::fitness::{coverage, Criterion, GoalSet};
use testgen_core::interp::{execute_test, Program, TraceMode};
use testgen_core::search::{
    run_strategy, Clock, IterationStats, SearchConfig, SearchContext, StoppingCondition, StrategyRegistry,
    BUILTIN_ALGORITHMS,
};

/// Environment variable that must be set before any code under test runs.
pub const DANGER_ENV: &str = "TESTGEN_DANGER_AWARE";
pub const DEFAULT_ALGORITHM: &str = "DYNAMOSA";
pub const DEFAULT_SEARCH_TIME: f64 = 60.0;

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DANGER: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum CoverageArg {
    #[default]
    Branch,
    Line,
    Both,
}

impl From<CoverageArg> for Criterion {
    fn from(c: CoverageArg) -> Criterion {
        match c {
            CoverageArg::Branch => Criterion::Branch,
            CoverageArg::Line => Criterion::Line,
            CoverageArg::Both => Criterion::Both,
        }
    }
}

/// Generates unit tests for a MiniDyn module.
#[derive(Debug, Parser)]
#[command(name = "testgen", version)]
struct Cli {
    /// Directory holding the module under test and the modules it uses.
    #[arg(long, value_name = "DIR")]
    project_path: PathBuf,
    /// Module to generate tests for, without the file extension.
    #[arg(long, value_name = "NAME")]
    module_name: String,
    /// Directory the test module is written to.
    #[arg(long, value_name = "DIR")]
    output_path: PathBuf,
    #[arg(long, default_value = DEFAULT_ALGORITHM, value_parser = PossibleValuesParser::new(BUILTIN_ALGORITHMS))]
    algorithm: String,
    /// Random seed; taken from the system clock when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Search budget in seconds.
    #[arg(long, default_value_t = DEFAULT_SEARCH_TIME, value_name = "SECONDS")]
    maximum_search_time: f64,
    #[arg(long, value_name = "N")]
    maximum_iterations: Option<u64>,
    #[arg(long, value_enum, default_value_t = CoverageArg::Branch)]
    coverage: CoverageArg,
    /// Ignore parameter annotations and draw arguments of any type.
    #[arg(long)]
    no_type_annotations: bool,
    #[arg(long)]
    no_assertions: bool,
    /// CSV file receiving coverage over time.
    #[arg(long, value_name = "FILE")]
    stats_path: Option<PathBuf>,
    /// Keep searching after every goal is covered.
    #[arg(long)]
    no_stop_at_full_coverage: bool,
    /// Measure time in test executions (10 000 per second) so that
    /// time-limited runs are reproducible.
    #[arg(long)]
    logical_clock: bool,
    /// -v for iteration summaries, -vv for every execution.
    #[arg(short, action = ArgAction::Count)]
    verbose: u8,
}

/// Everything one generation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub project_path: PathBuf,
    pub module_name: String,
    pub output_path: PathBuf,
    pub algorithm: String,
    pub seed: u64,
    pub max_seconds: f64,
    pub max_iterations: Option<u64>,
    pub stop_at_full_coverage: bool,
    pub coverage: Criterion,
    pub use_annotations: bool,
    pub assertions: bool,
    pub stats_path: Option<PathBuf>,
    pub logical_clock: bool,
    pub verbosity: u8,
}

impl RunConfig {
    /// Defaults for everything but the three mandatory settings.
    pub fn new(project_path: impl Into<PathBuf>, module_name: impl Into<String>, output_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            project_path: project_path.into(),
            module_name: module_name.into(),
            output_path: output_path.into(),
            algorithm: DEFAULT_ALGORITHM.to_string(),
            seed: 0,
            max_seconds: DEFAULT_SEARCH_TIME,
            max_iterations: None,
            stop_at_full_coverage: true,
            coverage: Criterion::Branch,
            use_annotations: true,
            assertions: true,
            stats_path: None,
            logical_clock: false,
            verbosity: 0,
        }
    }

    fn stopping(&self) -> Vec<StoppingCondition> {
        let mut s = vec![StoppingCondition::MaxTime(self.max_seconds)];
        if let Some(n) = self.max_iterations {
            s.push(StoppingCondition::MaxIterations(n));
        }
        if self.stop_at_full_coverage {
            s.push(StoppingCondition::FullCoverage);
        }
        s
    }
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> RunConfig {
        let seed = c.seed.unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or_default()
        });
        RunConfig {
            project_path: c.project_path,
            module_name: c.module_name,
            output_path: c.output_path,
            algorithm: c.algorithm,
            seed,
            max_seconds: c.maximum_search_time,
            max_iterations: c.maximum_iterations,
            stop_at_full_coverage: !c.no_stop_at_full_coverage,
            coverage: c.coverage.into(),
            use_annotations: !c.no_type_annotations,
            assertions: !c.no_assertions,
            stats_path: c.stats_path,
            logical_clock: c.logical_clock,
            verbosity: c.verbose,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("unknown algorithm {name}; valid algorithms: {}", valid.join(", "))]
    UnknownAlgorithm { name: String, valid: Vec<String> },
    #[error("{0}")]
    Load(#[from] LoadError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("cannot write {path}: {source}")]
    Stats {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::UnknownAlgorithm { .. } => exit::USAGE,
            RunError::Load(LoadError::Syntax { .. }) => exit::PARSE,
            RunError::Load(LoadError::Io { .. }) | RunError::Export(_) | RunError::Stats { .. } => exit::IO,
        }
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub test_file: PathBuf,
    pub tests: usize,
    pub branch_coverage: f64,
    pub line_coverage: f64,
    pub iterations: u64,
    pub elapsed: f64,
    pub history: Vec<IterationStats>,
    pub kill_report: Option<KillReport>,
}

/// Where the kill report goes when statistics are requested:
/// `stats.csv` becomes `stats.kills.csv`.
pub fn kill_report_path(stats_path: &Path) -> PathBuf {
    stats_path.with_extension("kills.csv")
}

fn stats_error(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Stats {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> RunError + '_ {
    move |e| RunError::Stats {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// Writes one row per iteration followed by a `final` row holding the
/// coverage of the emitted suite.
pub fn emit_statistics(history: &[IterationStats], summary: &RunSummary, out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["elapsed_s", "iteration", "branch_coverage", "line_coverage"])?;
    for s in history {
        w.write_record([
            format!("{:.3}", s.elapsed),
            s.iteration.to_string(),
            format!("{:.6}", s.branch_coverage),
            format!("{:.6}", s.line_coverage),
        ])?;
    }
    w.write_record([
        format!("{:.3}", summary.elapsed),
        "final".to_string(),
        format!("{:.6}", summary.branch_coverage),
        format!("{:.6}", summary.line_coverage),
    ])?;
    w.flush()?;
    Ok(())
}

fn write_statistics(config: &RunConfig, summary: &RunSummary) -> Result<(), RunError> {
    let Some(path) = &config.stats_path else {
        return Ok(());
    };
    let file = File::create(path).map_err(stats_error(path))?;
    emit_statistics(&summary.history, summary, file).map_err(csv_error(path))?;
    if let Some(report) = &summary.kill_report {
        let kills = kill_report_path(path);
        let file = File::create(&kills).map_err(stats_error(&kills))?;
        report.write_csv(file).map_err(csv_error(&kills))?;
    }
    Ok(())
}

/// Parse, analyse, search, add assertions, export and write statistics.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let registry = StrategyRegistry::with_builtins();
    let mut strategy = registry
        .create(&config.algorithm)
        .map_err(|_| RunError::UnknownAlgorithm {
            name: config.algorithm.clone(),
            valid: registry.names(),
        })?;
    let project = Project::load(&config.project_path, &config.module_name)?;
    let cluster = build_test_cluster(&project, config.use_annotations);
    let program = Program::new(&project);
    let goals = GoalSet::for_module(project.main_module());
    let search_config = SearchConfig::default();
    let budget = search_config.budget;
    let clock = if config.logical_clock { Clock::Logical } else { Clock::Wall };
    info!(
        "{} on {} with seed {}, {} callables",
        config.algorithm,
        config.module_name,
        config.seed,
        cluster.accessible_callables.len()
    );

    let mut ctx = SearchContext::new(
        &cluster,
        &program,
        &goals,
        config.coverage,
        config.seed,
        config.stopping(),
        search_config,
    )
    .with_clock(clock);
    let suite = run_strategy(strategy.as_mut(), &mut ctx);
    let history = ctx.history().to_vec();
    let iterations = ctx.iteration();
    let elapsed = ctx.elapsed();
    drop(ctx);

    let mut prepared = prepare_suite(&suite, &program, budget);
    let kill_report = if config.assertions {
        let mutants = generate_mutants(project.main_module());
        let assertion_config = AssertionConfig {
            budget,
            ..AssertionConfig::default()
        };
        let (with_assertions, report) = synthesize_assertions(&prepared.suite, &project, &mutants, assertion_config);
        info!(
            "{} of {} mutants killed{}",
            report.killed(),
            report.mutants.len(),
            if report.incomplete { " (incomplete)" } else { "" }
        );
        prepared.suite = with_assertions;
        Some(report)
    } else {
        None
    };

    let traces: Vec<_> = prepared
        .suite
        .test_cases()
        .iter()
        .map(|t| execute_test(t, &program, budget, false, TraceMode::Instrumented).trace)
        .collect();
    let branch_coverage = coverage(&goals.branch_goals(), &traces);
    let line_coverage = coverage(&goals.line_goals(), &traces);

    let rendered = render_prepared(&prepared, &config.module_name);
    let test_file = write_module(&rendered, &config.output_path)?;
    info!(
        "wrote {} tests to {}: branch coverage {:.3}, line coverage {:.3}",
        prepared.suite.len(),
        test_file.display(),
        branch_coverage,
        line_coverage
    );
    let summary = RunSummary {
        test_file,
        tests: prepared.suite.len(),
        branch_coverage,
        line_coverage,
        iterations,
        elapsed,
        history,
        kill_report,
    };
    write_statistics(config, &summary)?;
    Ok(summary)
}

fn level(verbosity: u8) -> LevelFilter {
    match verbosity {
        0 => LevelFilter::Off,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    }
}

/// The whole program behind `testgen`: returns the exit code. `env` looks
/// up environment variables so tests can run without touching the process
/// environment.
pub fn main_with<I, T>(args: I, env: impl Fn(&str) -> Option<String>, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return exit::OK;
            }
            let _ = write!(stderr, "{}", e.render());
            return exit::USAGE;
        }
    };
    if env(DANGER_ENV).is_none() {
        let _ = writeln!(
            stderr,
            "refusing to run: testgen executes the module under test with random inputs, \
             which may harm your system. Set {DANGER_ENV} to any value to proceed."
        );
        return exit::DANGER;
    }
    let config = RunConfig::from(cli);
    let _ = env_logger::Builder::new()
        .filter_level(level(config.verbosity))
        .format_timestamp(None)
        .try_init();
    match run(&config) {
        Ok(_) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
