//! Turns a finished suite into a MiniDyn test module of flat `test_case_k`
//! functions and replays such modules.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{LoadError, Project};
use crate::interp::{execute_test, run_function, Budget, ExecutionResult, Outcome, Program, TraceMode};
use crate::lang::{
    render_source, AstModule, BinOp, CmpOp, Expr, ExprKind, FunctionDef, Item, NodeId, SourceModule, Span, Stmt, StmtKind,
    UseDecl,
};
use crate::testcase::{Assertion, ObservationPath, Primitive, Snapshot, Statement, TestCase, TestSuiteChromosome, VarRef};

/// Name under which the module under test is bound in exported tests.
pub const MODULE_ALIAS: &str = "module0";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedTestModule {
    /// `test_<module>`.
    pub name: String,
    pub text: String,
    pub test_names: Vec<String>,
}

/// Suite ready for rendering plus the runtime type of every variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PreparedSuite {
    pub suite: TestSuiteChromosome,
    pub runtime_types: Vec<Vec<String>>,
}

/// Executes every test once and cuts it where it stopped: a call that
/// raised is kept and marked with its error kind, a statement that ran out
/// of budget (or raised outside a call) is dropped along with everything
/// after it.
pub fn prepare_suite(suite: &TestSuiteChromosome, program: &Program, budget: Budget) -> PreparedSuite {
    let mut tests = Vec::with_capacity(suite.len());
    let mut types = Vec::with_capacity(suite.len());
    for t in suite.test_cases() {
        let r = execute_test(t, program, budget, false, TraceMode::Instrumented);
        let mut t = t.clone();
        let mut ty = r.runtime_types.clone();
        t.expected_error = None;
        if let Some((i, outcome)) = r.failure() {
            match outcome {
                Outcome::Error(e) if t.statements[i].is_call() => {
                    t.truncate(i + 1);
                    t.expected_error = Some(e.kind.name().to_string());
                    ty.push("NoneType".to_string());
                }
                _ => t.truncate(i),
            }
            t.assertions.retain(|(at, _)| *at < i);
        }
        tests.push(t);
        types.push(ty);
    }
    PreparedSuite {
        suite: TestSuiteChromosome::new(tests),
        runtime_types: types,
    }
}

fn snake_case(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 && !out.ends_with('_') {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else if c.is_alphanumeric() {
            out.push(c);
        } else {
            out.push('_');
        }
    }
    if out.is_empty() {
        "var".to_string()
    } else {
        out
    }
}

fn static_type_name(s: &Statement) -> Option<String> {
    s.output_type().map(|t| t.to_string())
}

/// `<type>_<k>` names for the statements of one test.
fn variable_names(test: &TestCase, runtime: Option<&Vec<String>>) -> Vec<String> {
    let mut counters: BTreeMap<String, usize> = BTreeMap::new();
    test.statements
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let ty = runtime
                .and_then(|r| r.get(i).cloned())
                .or_else(|| static_type_name(s))
                .unwrap_or_else(|| "var".to_string());
            let base = match ty.as_str() {
                "NoneType" | "None" => "none_type".to_string(),
                t if t.starts_with("list") => "list".to_string(),
                "object" => "var".to_string(),
                t => snake_case(t),
            };
            let k = counters.entry(base.clone()).or_insert(0);
            let name = format!("{base}_{k}");
            *k += 1;
            name
        })
        .collect()
}

fn expr(kind: ExprKind) -> Expr {
    Expr {
        id: NodeId::default(),
        span: Span::default(),
        kind,
    }
}

fn stmt(kind: StmtKind) -> Stmt {
    Stmt {
        id: NodeId::default(),
        span: Span::default(),
        kind,
    }
}

fn name(n: &str) -> Expr {
    expr(ExprKind::Name(n.to_string()))
}

fn attribute(value: Expr, attr: &str) -> Expr {
    expr(ExprKind::Attribute {
        value: Box::new(value),
        attr: attr.to_string(),
    })
}

fn literal(v: &Snapshot) -> Expr {
    expr(match v {
        Snapshot::None => ExprKind::None,
        Snapshot::Bool(b) => ExprKind::Bool(*b),
        Snapshot::Int(i) => ExprKind::Int(*i),
        Snapshot::Float(f) => ExprKind::Float(*f),
        Snapshot::Str(s) => ExprKind::Str(s.clone()),
        Snapshot::List(items) => ExprKind::List(items.iter().map(literal).collect()),
        Snapshot::Object(_) | Snapshot::Opaque(_) => unreachable!("assertions hold literal values only"),
    })
}

fn primitive(p: &Primitive) -> Expr {
    expr(match p {
        Primitive::None => ExprKind::None,
        Primitive::Bool(b) => ExprKind::Bool(*b),
        Primitive::Int(i) => ExprKind::Int(*i),
        Primitive::Float(f) => ExprKind::Float(*f),
        Primitive::Str(s) => ExprKind::Str(s.clone()),
    })
}

fn compare(lhs: Expr, op: CmpOp, rhs: Expr) -> Expr {
    expr(ExprKind::Compare {
        first: Box::new(lhs),
        rest: vec![(op, rhs)],
    })
}

fn call(func: Expr, args: Vec<Expr>) -> Expr {
    expr(ExprKind::Call {
        func: Box::new(func),
        args,
    })
}

fn observed(path: &ObservationPath, names: &[String]) -> Expr {
    let var = name(&names[path.var]);
    match &path.attr {
        Some(a) => attribute(var, a),
        None => var,
    }
}

fn assertion_expr(a: &Assertion, names: &[String]) -> Expr {
    match a {
        Assertion::PrimitiveEquals { path, expected } => compare(observed(path, names), CmpOp::Eq, literal(expected)),
        Assertion::AttributeEquals { var, attr, expected } => {
            compare(attribute(name(&names[*var]), attr), CmpOp::Eq, literal(expected))
        }
        Assertion::IsNone { path } => compare(observed(path, names), CmpOp::Eq, expr(ExprKind::None)),
        Assertion::FloatApprox { path, expected } => {
            let diff = expr(ExprKind::Binary {
                op: BinOp::Sub,
                lhs: Box::new(observed(path, names)),
                rhs: Box::new(literal(&Snapshot::Float(*expected))),
            });
            compare(
                call(name("abs"), vec![diff]),
                CmpOp::LtE,
                expr(ExprKind::Float(Assertion::FLOAT_TOLERANCE)),
            )
        }
    }
}

/// Callee expression and argument references of a call statement.
fn callee(s: &Statement, names: &[String]) -> Option<(Expr, Vec<VarRef>)> {
    match s {
        Statement::Constructor { callable, args } | Statement::Function { callable, args } => {
            let mut e = name(MODULE_ALIAS);
            let path: Vec<String> = if callable.access_path.is_empty() {
                vec![callable.name.clone()]
            } else {
                callable.access_path.clone()
            };
            for part in &path {
                e = attribute(e, part);
            }
            Some((e, args.clone()))
        }
        Statement::Method {
            callable,
            receiver,
            args,
        } => Some((attribute(name(&names[*receiver]), &callable.name), args.clone())),
        _ => None,
    }
}

fn test_function(index: usize, test: &TestCase, runtime: Option<&Vec<String>>) -> FunctionDef {
    let names = variable_names(test, runtime);
    let arg_exprs = |refs: &[VarRef]| refs.iter().map(|&r| name(&names[r])).collect::<Vec<_>>();
    let mut body = Vec::new();
    for (i, s) in test.statements.iter().enumerate() {
        let last = i + 1 == test.len();
        if let (true, Some(kind)) = (last, &test.expected_error) {
            if let Some((f, args)) = callee(s, &names) {
                let mut all = vec![expr(ExprKind::Str(kind.clone())), f];
                all.extend(arg_exprs(&args));
                body.push(stmt(StmtKind::Expr(call(name("expect_error"), all))));
                continue;
            }
        }
        let value = match s {
            Statement::Primitive(p) => primitive(p),
            Statement::List { elements, .. } => expr(ExprKind::List(arg_exprs(elements))),
            _ => {
                let (f, args) = callee(s, &names).expect("call statement");
                call(f, arg_exprs(&args))
            }
        };
        body.push(stmt(StmtKind::Assign {
            target: name(&names[i]),
            value,
        }));
        for (_, a) in test.assertions.iter().filter(|(at, _)| *at == i) {
            body.push(stmt(StmtKind::Assert(assertion_expr(a, &names))));
        }
    }
    if body.is_empty() {
        body.push(stmt(StmtKind::Pass));
    }
    FunctionDef {
        id: NodeId::default(),
        name: format!("test_case_{index}"),
        params: Vec::new(),
        return_annotation: None,
        body,
        span: Span::default(),
    }
}

/// Renders `suite` with variables named after their static types.
pub fn render(suite: &TestSuiteChromosome, module_name: &str) -> RenderedTestModule {
    render_tests(suite, module_name, &[])
}

/// Renders a prepared suite with variables named after runtime types.
pub fn render_prepared(prepared: &PreparedSuite, module_name: &str) -> RenderedTestModule {
    render_tests(&prepared.suite, module_name, &prepared.runtime_types)
}

fn render_tests(suite: &TestSuiteChromosome, module_name: &str, runtime_types: &[Vec<String>]) -> RenderedTestModule {
    let mut items = vec![Item::Use(UseDecl {
        module: module_name.to_string(),
        alias: Some(MODULE_ALIAS.to_string()),
        span: Span::default(),
    })];
    let mut test_names = Vec::new();
    for (k, t) in suite.test_cases().iter().enumerate() {
        let f = test_function(k, t, runtime_types.get(k));
        test_names.push(f.name.clone());
        items.push(Item::Function(f));
    }
    RenderedTestModule {
        name: format!("test_{module_name}"),
        text: render_source(&AstModule { items }),
        test_names,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Writes `test_<module>.mdyn` into `dir`, replacing an existing file.
pub fn write_module(rendered: &RenderedTestModule, dir: &Path) -> Result<PathBuf, ExportError> {
    let path = dir.join(format!("{}.{}", rendered.name, crate::lang::EXTENSION));
    let io = |source| ExportError::Io {
        path: path.clone(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(&path, &rendered.text).map_err(io)?;
    Ok(path)
}

/// Result of running one exported test function.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayedTest {
    pub name: String,
    pub result: ExecutionResult,
}

impl ReplayedTest {
    pub fn passed(&self) -> bool {
        self.result.outcomes == [Outcome::Ok]
    }
}

/// Loads the rendered module next to the project it tests and runs every
/// test function, tracing the module under test.
pub fn replay_module(rendered: &RenderedTestModule, project: &Project, budget: Budget) -> Result<Vec<ReplayedTest>, LoadError> {
    let src = SourceModule::from_text(rendered.name.clone(), rendered.text.clone());
    let context = project.sources.values().cloned();
    let combined = Project::from_sources(src, context)?;
    let program = Program::with_traced(&combined, Some(&project.main));
    Ok(rendered
        .test_names
        .iter()
        .map(|n| ReplayedTest {
            name: n.clone(),
            result: run_function(&program, &rendered.name, n, budget, TraceMode::Instrumented),
        })
        .collect())
}
