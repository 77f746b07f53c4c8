use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::archive::Archive;
use crate::analysis::{GenericCallable, TestCluster};
use crate::fitness::{is_covered, CoverageGoal, Criterion, GoalSet};
use crate::interp::{execute_test, Budget, ExecutionResult, ExecutionTrace, Program, TraceMode};
use crate::testcase::{FactoryConfig, TestCase, TestFactory, TestSuiteChromosome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingCondition {
    /// Seconds on the search clock.
    MaxTime(f64),
    MaxIterations(u64),
    /// Every objective is covered.
    FullCoverage,
}

/// Source of elapsed time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    #[default]
    Wall,
    /// Test executions divided by [`LOGICAL_EXECUTIONS_PER_SECOND`]; makes
    /// time-limited runs reproducible.
    Logical,
}

/// Conservative: the interpreter manages roughly ten times this on one core.
pub const LOGICAL_EXECUTIONS_PER_SECOND: f64 = 10_000.0;

/// Tuning knobs of the built-in algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub population: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Executions grouped into one iteration by the sampling algorithms.
    pub batch_size: usize,
    pub mio_bucket_size: usize,
    pub mio_random_probability: f64,
    /// Share of the budget after which MIO enters its focused phase.
    pub mio_focus: f64,
    pub ws_rank_bias: f64,
    pub ws_initial_tests: usize,
    pub ws_max_tests: usize,
    /// Chance that a test added to a suite by the archive variant is a
    /// mutated copy of an archived test rather than a fresh one.
    pub ws_archive_reuse: f64,
    /// Largest pool of sequences kept by the feedback-directed generator.
    pub random_pool_size: usize,
    pub factory: FactoryConfig,
    pub budget: Budget,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population: 50,
            tournament_size: 5,
            crossover_rate: 0.75,
            batch_size: 50,
            mio_bucket_size: 10,
            mio_random_probability: 0.5,
            mio_focus: 0.5,
            ws_rank_bias: 1.7,
            ws_initial_tests: 10,
            ws_max_tests: 50,
            ws_archive_reuse: 0.5,
            random_pool_size: 5000,
            factory: FactoryConfig::default(),
            budget: Budget::default(),
        }
    }
}

/// One observer row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iteration: u64,
    pub elapsed: f64,
    pub branch_coverage: f64,
    pub line_coverage: f64,
}

/// Read-only view of search progress.
pub trait SearchObserver {
    fn on_iteration(&mut self, stats: &IterationStats);
}

impl<F: FnMut(&IterationStats)> SearchObserver for F {
    fn on_iteration(&mut self, stats: &IterationStats) {
        self(stats)
    }
}

/// Everything a strategy may use: the test factory, the module, its goals,
/// the seeded random source, the archive and the stopping conditions.
pub struct SearchContext<'a> {
    factory: TestFactory<'a>,
    program: &'a Program,
    goals: &'a GoalSet,
    objectives: Vec<CoverageGoal>,
    branch_goals: Vec<CoverageGoal>,
    line_goals: Vec<CoverageGoal>,
    rng: ChaCha8Rng,
    stopping: Vec<StoppingCondition>,
    clock: Clock,
    start: Instant,
    iteration: u64,
    executions: u64,
    archive: Archive,
    solution: Option<(f64, f64, bool)>,
    observers: Vec<Box<dyn SearchObserver + 'a>>,
    history: Vec<IterationStats>,
    pub config: SearchConfig,
}

impl<'a> SearchContext<'a> {
    pub fn new(
        cluster: &'a TestCluster,
        program: &'a Program,
        goals: &'a GoalSet,
        criterion: Criterion,
        seed: u64,
        stopping: Vec<StoppingCondition>,
        config: SearchConfig,
    ) -> Self {
        SearchContext {
            factory: TestFactory::new(cluster, config.factory.clone()),
            program,
            goals,
            objectives: goals.objectives(criterion),
            branch_goals: goals.branch_goals(),
            line_goals: goals.line_goals(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            stopping,
            clock: Clock::Wall,
            start: Instant::now(),
            iteration: 0,
            executions: 0,
            archive: Archive::new(),
            solution: None,
            observers: Vec::new(),
            history: Vec::new(),
            config,
        }
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn add_observer(&mut self, o: impl SearchObserver + 'a) {
        self.observers.push(Box::new(o));
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn factory(&self) -> &TestFactory<'a> {
        &self.factory
    }

    pub fn cluster(&self) -> &'a TestCluster {
        self.factory.cluster
    }

    pub fn goals(&self) -> &'a GoalSet {
        self.goals
    }

    pub fn objectives(&self) -> &[CoverageGoal] {
        &self.objectives
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn executions(&self) -> u64 {
        self.executions
    }

    pub fn history(&self) -> &[IterationStats] {
        &self.history
    }

    pub fn sample_test(&mut self) -> TestCase {
        self.factory.sample_random_test_case(&mut self.rng)
    }

    /// Appends a call with freshly built or reused arguments; `false` when
    /// the test would grow too long.
    pub fn append_call(&mut self, test: &mut TestCase, callable: &Arc<GenericCallable>) -> bool {
        self.factory.append_call(test, callable, &mut self.rng)
    }

    pub fn mutate_test(&mut self, test: &TestCase) -> TestCase {
        self.factory.mutate(test, &mut self.rng)
    }

    /// Runs `test`, then stores the part of it that ran in the archive for
    /// every goal it covers.
    pub fn evaluate(&mut self, test: &TestCase) -> ExecutionResult {
        self.executions += 1;
        let result = execute_test(test, self.program, self.config.budget, false, TraceMode::Instrumented);
        let covered: Vec<CoverageGoal> = self
            .goals
            .all()
            .iter()
            .filter(|g| is_covered(g, &result.trace))
            .cloned()
            .collect();
        log::debug!(
            "execution {}: {} statements, {} steps, {} goals covered{}",
            self.executions,
            test.len(),
            result.steps,
            covered.len(),
            if result.has_error() { ", failed" } else { "" }
        );
        if !covered.is_empty() {
            if result.outcomes.len() < test.len() {
                let mut ran = test.clone();
                ran.truncate(result.outcomes.len());
                self.archive.update(&ran, &covered);
            } else {
                self.archive.update(test, &covered);
            }
        }
        result
    }

    pub fn fitness(&self, goal: &CoverageGoal, trace: &ExecutionTrace) -> f64 {
        self.goals.fitness(goal, trace)
    }

    /// Uncovered objectives.
    pub fn uncovered(&self) -> Vec<CoverageGoal> {
        self.objectives.iter().filter(|g| !self.archive.covers(g)).cloned().collect()
    }

    pub fn archive_covers_all(&self) -> bool {
        self.objectives.iter().all(|g| self.archive.covers(g))
    }

    pub fn elapsed(&self) -> f64 {
        match self.clock {
            Clock::Wall => self.start.elapsed().as_secs_f64(),
            Clock::Logical => self.executions as f64 / LOGICAL_EXECUTIONS_PER_SECOND,
        }
    }

    /// Share of the time or iteration budget used so far (the larger one).
    pub fn progress(&self) -> f64 {
        let mut p: f64 = 0.0;
        for s in &self.stopping {
            match *s {
                StoppingCondition::MaxTime(t) if t > 0.0 => p = p.max(self.elapsed() / t),
                StoppingCondition::MaxIterations(n) if n > 0 => p = p.max(self.iteration as f64 / n as f64),
                _ => {}
            }
        }
        p.min(1.0)
    }

    /// Replaces archive-based progress reporting with the coverage of the
    /// strategy's current best solution.
    pub fn report_solution<'t>(&mut self, traces: impl IntoIterator<Item = &'t ExecutionTrace> + Clone) {
        let b = crate::fitness::coverage(&self.branch_goals, traces.clone());
        let l = crate::fitness::coverage(&self.line_goals, traces.clone());
        let full = crate::fitness::coverage(&self.objectives, traces) >= 1.0;
        self.solution = Some((b, l, full));
    }

    fn current_coverage(&self) -> (f64, f64) {
        match self.solution {
            Some((b, l, _)) => (b, l),
            None => (
                self.archive.coverage(&self.branch_goals),
                self.archive.coverage(&self.line_goals),
            ),
        }
    }

    pub fn is_finished(&self) -> bool {
        self.stopping.iter().any(|s| match *s {
            StoppingCondition::MaxTime(t) => self.elapsed() >= t,
            StoppingCondition::MaxIterations(n) => self.iteration >= n,
            StoppingCondition::FullCoverage => match self.solution {
                Some((_, _, full)) => full,
                None => self.archive_covers_all(),
            },
        })
    }

    /// Closes an iteration: counts it and notifies observers.
    pub fn end_iteration(&mut self) {
        self.iteration += 1;
        let (branch_coverage, line_coverage) = self.current_coverage();
        let stats = IterationStats {
            iteration: self.iteration,
            elapsed: self.elapsed(),
            branch_coverage,
            line_coverage,
        };
        log::info!(
            "iteration {} at {:.2}s: branch coverage {:.3}, line coverage {:.3}",
            stats.iteration,
            stats.elapsed,
            branch_coverage,
            line_coverage
        );
        self.history.push(stats);
        for o in &mut self.observers {
            o.on_iteration(&stats);
        }
    }

    /// The archive's tests as a suite, a shared test per goal group.
    pub fn archive_suite(&self) -> TestSuiteChromosome {
        let tests = self.archive.minimal_suite();
        #[cfg(debug_assertions)]
        for t in &tests {
            let r = execute_test(t, self.program, self.config.budget, false, TraceMode::Instrumented);
            debug_assert!(
                self.archive.covered().any(|g| is_covered(g, &r.trace)),
                "archived test no longer covers any goal"
            );
        }
        TestSuiteChromosome::new(tests)
    }
}
