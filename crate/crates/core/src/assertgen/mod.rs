//! Regression assertions chosen by mutation analysis.
//!
//! Each test runs on the original module and on every mutant with value
//! observation switched on. Where a mutant's observations part from the
//! original ones, the original value becomes an assertion, so the finished
//! test fails on that mutant and passes on the original.

mod mutants;

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

pub use mutants::{generate_mutants, Mutant, MutationOperator};

use crate::analysis::Project;
use crate::interp::{execute_test, Budget, ExecutionResult, Observation, Outcome, Program, TraceMode};
use crate::testcase::{Assertion, ObservationPath, TestCase, TestSuiteChromosome};

/// Where in a test a value was observed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservationPoint {
    pub statement: usize,
    pub path: ObservationPath,
}

/// Points of `original` whose value `mutant` does not reproduce. When the
/// mutant run stopped early at `mutant_stop` (an error or an exhausted
/// budget the original did not hit), every original point from that
/// statement on counts as differing. Floats are compared with
/// [`Assertion::FLOAT_TOLERANCE`].
pub fn diff_observations(
    original: &[Observation],
    mutant: &[Observation],
    mutant_stop: Option<usize>,
) -> Vec<ObservationPoint> {
    let seen: HashMap<(usize, &ObservationPath), &Observation> =
        mutant.iter().map(|o| ((o.statement, &o.path), o)).collect();
    original
        .iter()
        .filter(|o| {
            if mutant_stop.is_some_and(|s| o.statement >= s) {
                return true;
            }
            match seen.get(&(o.statement, &o.path)) {
                Some(m) => !o.value.approx_eq(&m.value, Assertion::FLOAT_TOLERANCE),
                None => true,
            }
        })
        .map(|o| ObservationPoint {
            statement: o.statement,
            path: o.path.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssertionConfig {
    /// Step budget of every single execution.
    pub budget: Budget,
    /// Total test executions (original and mutant runs) allowed.
    pub max_executions: u64,
}

impl Default for AssertionConfig {
    fn default() -> Self {
        AssertionConfig {
            budget: Budget::default(),
            max_executions: 200_000,
        }
    }
}

/// An assertion added to test `test` after statement `statement`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedAssertion {
    pub test: usize,
    pub statement: usize,
    pub assertion: Assertion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutantStatus {
    pub mutant_id: usize,
    pub operator: MutationOperator,
    pub description: String,
    /// Index of the first test that kills the mutant.
    pub killed_by: Option<usize>,
    /// Assertions synthesized from this mutant; each fails on it.
    pub assertions: Vec<PlacedAssertion>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KillReport {
    pub mutants: Vec<MutantStatus>,
    /// Set when the execution budget ran out before every test met every
    /// mutant; unexamined mutants are reported as surviving.
    pub incomplete: bool,
}

impl KillReport {
    pub fn killed(&self) -> usize {
        self.mutants.iter().filter(|m| m.killed_by.is_some()).count()
    }

    /// Killed share of all mutants; 1.0 with no mutants.
    pub fn score(&self) -> f64 {
        if self.mutants.is_empty() {
            1.0
        } else {
            self.killed() as f64 / self.mutants.len() as f64
        }
    }

    /// CSV with columns `mutant_id,operator,killed_by`; `killed_by` names the
    /// exported test function or is empty.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["mutant_id", "operator", "killed_by"])?;
        for m in &self.mutants {
            let by = m.killed_by.map(|t| format!("test_case_{t}")).unwrap_or_default();
            w.write_record([m.mutant_id.to_string(), m.operator.to_string(), by])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Test `test` tells the mutant apart, by an assertion or because the
/// mutant raises where the original does not.
#[derive(Debug, Clone)]
struct Kill {
    test: usize,
    assertion: Option<(usize, Assertion)>,
}

fn completed(r: &ExecutionResult, test: &TestCase) -> bool {
    r.outcomes.len() == test.len() && r.outcomes.iter().all(|o| *o == Outcome::Ok)
}

/// The assertion placed for one killed mutant, if an observation allows it.
fn killing_assertion(original: &[Observation], mutant: &ExecutionResult, points: &[ObservationPoint]) -> Option<(usize, Assertion)> {
    let stop = mutant.failure().map(|(i, _)| i);
    for p in points {
        let expected = original.iter().find(|o| o.statement == p.statement && o.path == p.path)?;
        let Some(a) = Assertion::for_value(p.path.clone(), &expected.value) else {
            continue;
        };
        let fails_on_mutant = stop.is_some_and(|s| p.statement >= s)
            || match mutant
                .trace
                .observations
                .iter()
                .find(|o| o.statement == p.statement && o.path == p.path)
            {
                Some(m) => !a.holds(&m.value),
                None => true,
            };
        if fails_on_mutant {
            return Some((p.statement, a));
        }
    }
    None
}

/// Adds assertions to every test of `suite` that runs cleanly on the
/// original module: per test and per mutant it distinguishes, one
/// assertion at the first distinguishing observation. Tests that raise or
/// exhaust their budget are returned unchanged.
pub fn synthesize_assertions(
    suite: &TestSuiteChromosome,
    project: &Project,
    mutants: &[Mutant],
    config: AssertionConfig,
) -> (TestSuiteChromosome, KillReport) {
    let original_program = Program::with_traced(project, None);
    let mut executions = 0u64;
    let mut incomplete = false;

    let mut originals: Vec<Option<Vec<Observation>>> = Vec::with_capacity(suite.len());
    for t in suite.test_cases() {
        if executions >= config.max_executions {
            incomplete = true;
            originals.push(None);
            continue;
        }
        executions += 1;
        let r = execute_test(t, &original_program, config.budget, true, TraceMode::Instrumented);
        originals.push(completed(&r, t).then_some(r.trace.observations));
    }

    let mut found: Vec<Vec<Kill>> = vec![Vec::new(); mutants.len()];
    'mutants: for (m, mutant) in mutants.iter().enumerate() {
        let overrides = HashMap::from([(project.main.clone(), Arc::clone(&mutant.module))]);
        let program = Program::with_overrides(project, None, &overrides);
        for (t, test) in suite.test_cases().iter().enumerate() {
            let Some(obs) = &originals[t] else { continue };
            if executions >= config.max_executions {
                incomplete = true;
                break 'mutants;
            }
            executions += 1;
            let r = execute_test(test, &program, config.budget, true, TraceMode::Instrumented);
            let stop = r.failure().map(|(i, _)| i);
            let points = diff_observations(obs, &r.trace.observations, stop);
            let assertion = killing_assertion(obs, &r, &points);
            if stop.is_some() || assertion.is_some() {
                found[m].push(Kill { test: t, assertion });
            }
        }
    }

    let mut tests: Vec<TestCase> = suite.test_cases().to_vec();
    let mut report = KillReport {
        mutants: Vec::with_capacity(mutants.len()),
        incomplete,
    };
    for (mutant, kills) in mutants.iter().zip(&found) {
        let mut killed_by = None;
        let mut placed = Vec::new();
        for kill in kills {
            if let Some((at, a)) = &kill.assertion {
                let test = &mut tests[kill.test];
                if !test.assertions.iter().any(|(i, b)| i == at && b == a) {
                    test.assertions.push((*at, a.clone()));
                }
                placed.push(PlacedAssertion {
                    test: kill.test,
                    statement: *at,
                    assertion: a.clone(),
                });
            }
            killed_by.get_or_insert(kill.test);
        }
        report.mutants.push(MutantStatus {
            mutant_id: mutant.id,
            operator: mutant.operator,
            description: mutant.description.clone(),
            killed_by,
            assertions: placed,
        });
    }
    for t in &mut tests {
        t.assertions.sort_by_key(|(i, _)| *i);
    }
    (TestSuiteChromosome::new(tests), report)
}

/// Why a replayed test did not pass.
#[derive(Debug, Clone, PartialEq)]
pub enum ReplayFailure {
    /// Statement `index` raised or ran out of budget.
    Stopped { index: usize, outcome: Outcome },
    /// Assertion `index` (into `test.assertions`) does not hold.
    Assertion { index: usize },
}

/// Runs `test` and checks its assertions and expected error.
pub fn replay(test: &TestCase, program: &Program, budget: Budget) -> Result<(), ReplayFailure> {
    let r = execute_test(test, program, budget, true, TraceMode::Instrumented);
    let stop = r.failure().map(|(i, o)| (i, o.clone()));
    for (k, (at, a)) in test.assertions.iter().enumerate() {
        if stop.as_ref().is_some_and(|(i, _)| i <= at) {
            break;
        }
        let path = a.path();
        let actual = r.trace.observations.iter().find(|o| o.statement == *at && o.path == path);
        if !actual.is_some_and(|o| a.holds(&o.value)) {
            return Err(ReplayFailure::Assertion { index: k });
        }
    }
    match (stop, &test.expected_error) {
        (None, None) => Ok(()),
        (Some((i, Outcome::Error(e))), Some(kind)) if i + 1 == test.len() && e.kind.name() == kind => Ok(()),
        (Some((index, outcome)), _) => Err(ReplayFailure::Stopped { index, outcome }),
        (None, Some(_)) => Err(ReplayFailure::Stopped {
            index: test.len(),
            outcome: Outcome::Ok,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_test_cluster;
    use crate::lang::{parse_str, render_source, SourceModule};
    use crate::testcase::{Primitive, Snapshot, Statement};
    use crate::interp::ObservationKind;

    fn project(text: &str) -> Project {
        Project::from_sources(SourceModule::from_text("m", text), []).unwrap()
    }

    fn triangle() -> Project {
        project(&std::fs::read_to_string(crate::corpus::default_corpus_dir().join("triangle.mdyn")).unwrap())
    }

    fn call_with_ints(project: &Project, ints: &[i64]) -> TestCase {
        let cluster = build_test_cluster(project, true);
        let f = cluster.accessible_callables[0].clone();
        let mut t = TestCase::new();
        let args = ints.iter().map(|&i| t.push(Statement::Primitive(Primitive::Int(i)))).collect();
        t.push(Statement::Function { callable: f, args });
        t
    }

    fn obs(statement: usize, var: usize, value: Snapshot) -> Observation {
        Observation {
            statement,
            kind: ObservationKind::ReturnValue,
            path: ObservationPath { var, attr: None },
            value,
        }
    }

    #[test]
    fn triangle_has_27_mutants() {
        // two `==` in the chain and three in the elif, five swaps each,
        // plus two `or`
        let p = triangle();
        let ms = generate_mutants(p.main_module());
        assert_eq!(ms.len(), 27);
        assert_eq!(ms.iter().filter(|m| m.operator == MutationOperator::Cor).count(), 2);
        assert!(ms.iter().enumerate().all(|(i, m)| m.id == i));
    }

    #[test]
    fn operator_tables() {
        let m = parse_str("def f(a, b):\n    return a + b\n").unwrap();
        let ms = generate_mutants(&m);
        let d: Vec<_> = ms.iter().map(|m| m.description.as_str()).collect();
        assert_eq!(d, ["+ -> -", "+ -> *", "+ -> /", "+ -> %"]);

        let m = parse_str("def f(a):\n    return not a == 3\n").unwrap();
        let tags: Vec<_> = generate_mutants(&m).iter().map(|m| m.operator.tag()).collect();
        assert_eq!(tags, ["NOT", "ROR", "ROR", "ROR", "ROR", "ROR", "CRP", "CRP", "CRP", "CRP"]);

        let m = parse_str("def f():\n    return 0\n").unwrap();
        let d: Vec<_> = generate_mutants(&m).iter().map(|m| m.description.clone()).collect();
        assert_eq!(d, ["0 -> 1"]);

        assert!(generate_mutants(&parse_str("def f():\n    pass\n").unwrap()).is_empty());
    }

    #[test]
    fn mutants_reparse_and_differ_from_the_original() {
        let p = triangle();
        let original = render_source(p.main_module());
        for m in generate_mutants(p.main_module()) {
            let text = render_source(&m.module);
            assert_ne!(text, original);
            parse_str(&text).unwrap();
        }
    }

    #[test]
    fn diff_examples() {
        let a = vec![obs(3, 3, Snapshot::Str("Equilateral triangle".into()))];
        assert!(diff_observations(&a, &a, None).is_empty());
        let b = vec![obs(3, 3, Snapshot::Str("Isosceles triangle".into()))];
        assert_eq!(
            diff_observations(&a, &b, None),
            [ObservationPoint {
                statement: 3,
                path: ObservationPath { var: 3, attr: None }
            }]
        );

        let four: Vec<_> = (0..4).map(|i| obs(i, i, Snapshot::Int(i as i64))).collect();
        let points = diff_observations(&four, &four[..1], Some(1));
        assert_eq!(points.iter().map(|p| p.statement).collect::<Vec<_>>(), [1, 2, 3]);

        let f = vec![obs(0, 0, Snapshot::Float(1.0))];
        assert!(diff_observations(&f, &[obs(0, 0, Snapshot::Float(1.0 + 1e-7))], None).is_empty());
        assert_eq!(diff_observations(&f, &[obs(0, 0, Snapshot::Float(1.0 + 1e-5))], None).len(), 1);
    }

    #[test]
    fn equilateral_call_gains_return_assertion() {
        let p = triangle();
        let suite = TestSuiteChromosome::new(vec![call_with_ints(&p, &[3, 3, 3])]);
        let ms = generate_mutants(p.main_module());
        let (out, report) = synthesize_assertions(&suite, &p, &ms, AssertionConfig::default());
        let t = &out.test_cases()[0];
        assert!(t.assertions.contains(&(
            3,
            Assertion::PrimitiveEquals {
                path: ObservationPath { var: 3, attr: None },
                expected: Snapshot::Str("Equilateral triangle".into())
            }
        )));
        assert!(report.killed() > 0 && !report.incomplete);
        // identical assertions are merged
        assert_eq!(t.assertions.len(), 1);
    }

    #[test]
    fn assertions_pass_on_original_and_fail_on_their_mutant() {
        let p = triangle();
        let suite = TestSuiteChromosome::new(vec![
            call_with_ints(&p, &[3, 3, 3]),
            call_with_ints(&p, &[3, 4, 3]),
            call_with_ints(&p, &[3, 4, 5]),
        ]);
        let ms = generate_mutants(p.main_module());
        let (out, report) = synthesize_assertions(&suite, &p, &ms, AssertionConfig::default());
        let original = Program::with_traced(&p, None);
        for t in out.test_cases() {
            assert_eq!(replay(t, &original, Budget::default()), Ok(()));
        }
        for status in &report.mutants {
            let Some(k) = status.killed_by else { continue };
            let m = &ms[status.mutant_id];
            let program = Program::with_overrides(&p, None, &HashMap::from([(p.main.clone(), m.module.clone())]));
            assert!(replay(&out.test_cases()[k], &program, Budget::default()).is_err(), "{}", m.description);
            for placed in &status.assertions {
                let mut single = out.test_cases()[placed.test].clone();
                assert!(single.assertions.contains(&(placed.statement, placed.assertion.clone())));
                single.assertions = vec![(placed.statement, placed.assertion.clone())];
                assert_eq!(replay(&single, &original, Budget::default()), Ok(()));
                assert!(replay(&single, &program, Budget::default()).is_err());
            }
        }
        let placed: usize = report.mutants.iter().map(|m| m.assertions.len()).sum();
        assert!(placed >= out.test_cases().iter().map(|t| t.assertions.len()).sum::<usize>());
    }

    #[test]
    fn no_observable_change_means_no_assertions() {
        let p = project("def f(a: int):\n    b = a + 1\n    return None\n");
        let suite = TestSuiteChromosome::new(vec![call_with_ints(&p, &[2])]);
        let ms = generate_mutants(p.main_module());
        let (out, report) = synthesize_assertions(&suite, &p, &ms, AssertionConfig::default());
        assert_eq!(report.killed(), 0);
        assert_eq!(report.mutants.len(), ms.len());
        assert!(out.test_cases()[0].assertions.is_empty());
    }

    #[test]
    fn exhausted_budget_marks_report_incomplete() {
        let p = triangle();
        let suite = TestSuiteChromosome::new(vec![call_with_ints(&p, &[3, 3, 3])]);
        let ms = generate_mutants(p.main_module());
        let config = AssertionConfig {
            max_executions: 5,
            ..AssertionConfig::default()
        };
        let (_, report) = synthesize_assertions(&suite, &p, &ms, config);
        assert!(report.incomplete);
        assert_eq!(report.mutants.len(), 27);
    }

    #[test]
    fn kill_report_csv() {
        let report = KillReport {
            mutants: vec![
                MutantStatus {
                    mutant_id: 0,
                    operator: MutationOperator::Ror,
                    description: String::new(),
                    killed_by: Some(2),
                    assertions: Vec::new(),
                },
                MutantStatus {
                    mutant_id: 1,
                    operator: MutationOperator::Crp,
                    description: String::new(),
                    killed_by: None,
                    assertions: Vec::new(),
                },
            ],
            incomplete: false,
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "mutant_id,operator,killed_by\n0,ROR,test_case_2\n1,CRP,\n");
    }
}
