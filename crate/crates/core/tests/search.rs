use testgen_core::analysis::{build_test_cluster, Project};
use testgen_core::corpus::default_corpus_dir;
use testgen_core::fitness::{coverage, Criterion, GoalSet};
use testgen_core::interp::{execute_test, Budget, Program, TraceMode};
use testgen_core::search::{run_strategy, SearchConfig, SearchContext, StoppingCondition, StrategyRegistry};

fn suite_branch_coverage(module: &str, algorithm: &str, seed: u64, iterations: u64) -> (f64, Vec<f64>) {
    let project = Project::load(&default_corpus_dir(), module).unwrap();
    let cluster = build_test_cluster(&project, true);
    let program = Program::new(&project);
    let goals = GoalSet::for_module(project.main_module());
    let mut ctx = SearchContext::new(
        &cluster,
        &program,
        &goals,
        Criterion::Branch,
        seed,
        vec![StoppingCondition::MaxIterations(iterations), StoppingCondition::FullCoverage],
        SearchConfig::default(),
    );
    let mut strategy = StrategyRegistry::with_builtins().create(algorithm).unwrap();
    let suite = run_strategy(strategy.as_mut(), &mut ctx);
    let traces: Vec<_> = suite
        .test_cases()
        .iter()
        .map(|t| execute_test(t, &program, Budget::default(), false, TraceMode::Instrumented).trace)
        .collect();
    let history = ctx.history().iter().map(|s| s.branch_coverage).collect();
    (coverage(&goals.branch_goals(), &traces), history)
}

#[test]
fn every_algorithm_covers_triangle() {
    for name in StrategyRegistry::with_builtins().names() {
        let (cov, _) = suite_branch_coverage("triangle", &name, 1, 300);
        assert_eq!(cov, 1.0, "{name}");
    }
}

#[test]
fn archive_coverage_never_drops() {
    for name in ["RANDOM", "MOSA", "DYNAMOSA", "MIO", "WHOLE_SUITE_ARCHIVE"] {
        let (_, history) = suite_branch_coverage("nested", name, 7, 20);
        assert!(history.windows(2).all(|w| w[0] <= w[1]), "{name}: {history:?}");
    }
}

#[test]
fn unreachable_branch_stays_uncovered() {
    let (cov, _) = suite_branch_coverage("unreachable", "DYNAMOSA", 3, 40);
    assert!((cov - 5.0 / 6.0).abs() < 1e-9, "{cov}");
}

#[test]
fn same_seed_same_suite() {
    let a = suite_branch_coverage("stack", "MOSA", 11, 5);
    let b = suite_branch_coverage("stack", "MOSA", 11, 5);
    assert_eq!(a, b);
}
