use super::eval::{Interpreter, Interrupt};
use super::program::Program;
use super::trace::{Budget, ExecutionResult, Observation, ObservationKind, Outcome, TraceMode};
use super::value::{ErrorKind, RuntimeError, Value};
use crate::testcase::{ObservationPath, Primitive, Statement, TestCase};

fn to_outcome(r: Result<(), Interrupt>) -> Outcome {
    match r {
        Ok(()) => Outcome::Ok,
        Err(Interrupt::Error(e)) => Outcome::Error(e),
        Err(Interrupt::Budget) => Outcome::BudgetExhausted,
    }
}

fn observable(v: &Value) -> bool {
    matches!(
        v,
        Value::None | Value::Bool(_) | Value::Int(_) | Value::Float(_) | Value::Str(_) | Value::List(_)
    )
}

/// Runs `test` against `program`, statement by statement, until the first
/// statement that raises or runs out of budget.
///
/// With `observe`, return values and the attributes of every object alive
/// after each successful call are captured in the trace.
pub fn execute_test(test: &TestCase, program: &Program, budget: Budget, observe: bool, mode: TraceMode) -> ExecutionResult {
    let mut interp = Interpreter::new(program, budget, mode);
    let mut values: Vec<Value> = Vec::with_capacity(test.len());
    let mut outcomes = Vec::with_capacity(test.len());
    let mut runtime_types = Vec::with_capacity(test.len());
    let mut observations = Vec::new();

    for (i, stmt) in test.statements.iter().enumerate() {
        let result = run_statement(&mut interp, program, stmt, &values);
        let (outcome, value) = match result {
            Ok(v) => (Outcome::Ok, v),
            Err(e) => (to_outcome(Err(e)), Value::None),
        };
        let ok = outcome == Outcome::Ok;
        outcomes.push(outcome);
        if !ok {
            break;
        }
        runtime_types.push(value.type_name());
        if observe && stmt.is_call() {
            if observable(&value) {
                observations.push(Observation {
                    statement: i,
                    kind: ObservationKind::ReturnValue,
                    path: ObservationPath { var: i, attr: None },
                    value: value.snapshot(),
                });
            }
            for (j, v) in values.iter().chain(std::iter::once(&value)).enumerate() {
                if let Value::Object(o) = v {
                    for (attr, a) in &o.borrow().attrs {
                        if observable(a) {
                            observations.push(Observation {
                                statement: i,
                                kind: ObservationKind::ObjectAttribute,
                                path: ObservationPath {
                                    var: j,
                                    attr: Some(attr.clone()),
                                },
                                value: a.snapshot(),
                            });
                        }
                    }
                }
            }
        }
        values.push(value);
    }

    let mut trace = std::mem::take(&mut interp.trace);
    trace.observations = observations;
    ExecutionResult {
        trace,
        outcomes,
        steps: interp.steps,
        runtime_types,
        events: std::mem::take(&mut interp.events),
    }
}

fn run_statement(interp: &mut Interpreter<'_>, program: &Program, stmt: &Statement, values: &[Value]) -> Result<Value, Interrupt> {
    interp.tick()?;
    let args = |refs: &[usize]| refs.iter().map(|&r| values[r].clone()).collect::<Vec<_>>();
    match stmt {
        Statement::Primitive(p) => Ok(match p {
            Primitive::None => Value::None,
            Primitive::Bool(b) => Value::Bool(*b),
            Primitive::Int(i) => Value::Int(*i),
            Primitive::Float(f) => Value::Float(*f),
            Primitive::Str(s) => interp.alloc_str(s)?,
        }),
        Statement::List { elements, .. } => interp.alloc_list(args(elements)),
        Statement::Constructor { callable, args: a } => {
            let class = callable.owner.as_deref().unwrap_or(&callable.name);
            let Some(c) = program.class_id(&callable.module, class) else {
                return Err(missing(&callable.qualified_name()));
            };
            interp.call_value(Value::Class(c), args(a))
        }
        Statement::Function { callable, args: a } => {
            let Some(f) = program.function(&callable.module, &callable.name) else {
                return Err(missing(&callable.qualified_name()));
            };
            interp.call_value(Value::Function(f), args(a))
        }
        Statement::Method {
            callable,
            receiver,
            args: a,
        } => {
            let m = interp.get_attr(&values[*receiver], &callable.name)?;
            interp.call_value(m, args(a))
        }
    }
}

fn missing(name: &str) -> Interrupt {
    Interrupt::Error(RuntimeError::new(ErrorKind::NameError, format!("name '{name}' is not defined")))
}

/// Calls the zero-argument top-level function `name` of `module`. The
/// result has a single outcome.
pub fn run_function(program: &Program, module: &str, name: &str, budget: Budget, mode: TraceMode) -> ExecutionResult {
    let mut interp = Interpreter::new(program, budget, mode);
    let r = match program.function(module, name) {
        Some(f) => interp.call_value(Value::Function(f), Vec::new()).map(drop),
        None => Err(missing(name)),
    };
    ExecutionResult {
        trace: std::mem::take(&mut interp.trace),
        outcomes: vec![to_outcome(r)],
        steps: interp.steps,
        runtime_types: Vec::new(),
        events: std::mem::take(&mut interp.events),
    }
}
