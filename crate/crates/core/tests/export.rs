use testgen_core::analysis::{build_test_cluster, Project};
use testgen_core::assertgen::{generate_mutants, synthesize_assertions, AssertionConfig};
use testgen_core::corpus::default_corpus_dir;
use testgen_core::export::{prepare_suite, render, render_prepared, replay_module, write_module};
use testgen_core::fitness::{coverage, Criterion, GoalSet};
use testgen_core::interp::{execute_test, Budget, Program, TraceMode};
use testgen_core::lang::{parse_str, render_source, SourceModule};
use testgen_core::search::{run_strategy, SearchConfig, SearchContext, StoppingCondition, StrategyRegistry};
use testgen_core::analysis::TypeInfo;
use testgen_core::testcase::{Primitive, Statement, TestCase, TestSuiteChromosome};

fn inline(name: &str, text: &str) -> Project {
    Project::from_sources(SourceModule::from_text(name, text), []).unwrap()
}

fn corpus(module: &str) -> Project {
    Project::load(&default_corpus_dir(), module).unwrap()
}

fn call(project: &Project, args: &[Primitive]) -> TestCase {
    let cluster = build_test_cluster(project, true);
    let f = cluster.accessible_callables[0].clone();
    let mut t = TestCase::new();
    let refs = args.iter().map(|p| t.push(Statement::Primitive(p.clone()))).collect();
    t.push(Statement::Function { callable: f, args: refs });
    t
}

#[test]
fn untyped_triangle_with_lists_matches_the_listing_shape() {
    let p = corpus("triangle_untyped");
    let cluster = build_test_cluster(&p, true);
    let f = cluster.accessible_callables[0].clone();
    let mut t = TestCase::new();
    let a = t.push(Statement::Primitive(Primitive::Str("foo".into())));
    let b = t.push(Statement::Primitive(Primitive::Str("bar".into())));
    let l = t.push(Statement::List {
        element_type: Some(TypeInfo::Str),
        elements: vec![a, b],
    });
    t.push(Statement::Function {
        callable: f,
        args: vec![l, l, l],
    });
    let suite = TestSuiteChromosome::new(vec![t]);
    let (suite, _) = synthesize_assertions(&suite, &p, &generate_mutants(p.main_module()), AssertionConfig::default());
    let program = Program::new(&p);
    let rendered = render_prepared(&prepare_suite(&suite, &program, Budget::default()), "triangle_untyped");
    let expected = "use triangle_untyped as module0\n\n\
                    def test_case_0():\n    \
                    str_0 = \"foo\"\n    \
                    str_1 = \"bar\"\n    \
                    list_0 = [str_0, str_1]\n    \
                    str_2 = module0.triangle(list_0, list_0, list_0)\n    \
                    assert str_2 == \"Equilateral triangle\"\n";
    assert_eq!(rendered.text, expected);
    assert_eq!(rendered.test_names, ["test_case_0"]);
}

#[test]
fn empty_suite_renders_header_only() {
    let r = render(&TestSuiteChromosome::default(), "triangle");
    assert_eq!(r.text, "use triangle as module0\n");
    assert!(r.test_names.is_empty());
    parse_str(&r.text).unwrap();
}

#[test]
fn raising_call_becomes_expect_error_and_replays() {
    let p = inline("div", "def f(a: int) -> int:\n    return 10 / a\n");
    let suite = TestSuiteChromosome::new(vec![call(&p, &[Primitive::Int(0)]), call(&p, &[Primitive::Int(5)])]);
    let prepared = prepare_suite(&suite, &Program::new(&p), Budget::default());
    let rendered = render_prepared(&prepared, "div");
    assert!(rendered.text.contains("expect_error(\"ZeroDivisionError\", module0.f, int_0)"), "{}", rendered.text);
    let results = replay_module(&rendered, &p, Budget::default()).unwrap();
    assert!(results.iter().all(|r| r.passed()), "{results:?}");
}

#[test]
fn budget_exhausting_statement_is_dropped() {
    let p = inline("spin", "def spin(a: int):\n    while True:\n        a = a + 1\n");
    let suite = TestSuiteChromosome::new(vec![call(&p, &[Primitive::Int(1)])]);
    let prepared = prepare_suite(&suite, &Program::new(&p), Budget { max_steps: 1000 });
    assert_eq!(prepared.suite.test_cases()[0].len(), 1);
    let rendered = render_prepared(&prepared, "spin");
    assert!(!rendered.text.contains("spin("));
    let results = replay_module(&rendered, &p, Budget::default()).unwrap();
    assert!(results[0].passed());
}

fn generated(module: &str, seed: u64) -> (Project, TestSuiteChromosome) {
    let p = corpus(module);
    let cluster = build_test_cluster(&p, true);
    let program = Program::new(&p);
    let goals = GoalSet::for_module(p.main_module());
    let mut ctx = SearchContext::new(
        &cluster,
        &program,
        &goals,
        Criterion::Branch,
        seed,
        vec![StoppingCondition::MaxIterations(10), StoppingCondition::FullCoverage],
        SearchConfig::default(),
    );
    let mut s = StrategyRegistry::with_builtins().create("DYNAMOSA").unwrap();
    let suite = run_strategy(s.as_mut(), &mut ctx);
    drop(ctx);
    (p, suite)
}

#[test]
fn exported_suites_replay_green_with_the_same_coverage() {
    for module in ["triangle", "stack", "point", "shapes", "bank", "listops", "mathutils"] {
        let (p, suite) = generated(module, 5);
        let program = Program::new(&p);
        let (suite, _) = synthesize_assertions(&suite, &p, &generate_mutants(p.main_module()), AssertionConfig::default());
        let prepared = prepare_suite(&suite, &program, Budget::default());
        let rendered = render_prepared(&prepared, module);

        assert_eq!(render_source(&parse_str(&rendered.text).unwrap()), rendered.text, "{module}");

        let replayed = replay_module(&rendered, &p, Budget::default()).unwrap();
        for r in &replayed {
            assert!(r.passed(), "{module} {}: {:?}\n{}", r.name, r.result.outcomes, rendered.text);
        }
        let goals = GoalSet::for_module(p.main_module());
        let internal: Vec<_> = prepared
            .suite
            .test_cases()
            .iter()
            .map(|t| execute_test(t, &program, Budget::default(), false, TraceMode::Instrumented).trace)
            .collect();
        let external: Vec<_> = replayed.iter().map(|r| r.result.trace.clone()).collect();
        assert_eq!(
            coverage(goals.all(), &internal),
            coverage(goals.all(), &external),
            "{module}"
        );
    }
}

#[test]
fn rendering_is_byte_stable() {
    let (p, a) = generated("strings", 9);
    let (_, b) = generated("strings", 9);
    let program = Program::new(&p);
    let ra = render_prepared(&prepare_suite(&a, &program, Budget::default()), "strings");
    let rb = render_prepared(&prepare_suite(&b, &program, Budget::default()), "strings");
    assert_eq!(ra, rb);
}

#[test]
fn writing_overwrites_previous_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = render(&TestSuiteChromosome::default(), "m");
    let path = write_module(&first, dir.path()).unwrap();
    assert!(path.ends_with("test_m.mdyn"));
    let p = inline("m", "def f(a: int) -> int:\n    return a\n");
    let second = render(&TestSuiteChromosome::new(vec![call(&p, &[Primitive::Int(2)])]), "m");
    write_module(&second, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(path).unwrap(), second.text);
}
