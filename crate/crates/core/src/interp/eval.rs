use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use super::distance::{compare, compare_distance, ordering, truthiness_distance, BranchEval, K};
use super::program::{ClassId, FuncId, Global, Program};
use super::trace::{Budget, BranchDistances, ExecutionTrace, TraceEvent, TraceMode};
use super::value::{type_error, Builtin, BuiltinMethod, ErrorKind, Instance, RuntimeError, Value};
use crate::lang::{BinOp, CmpOp, Expr, ExprKind, LineNo, LogicOp, PredicateId, Stmt, StmtKind, UnaryOp};

/// Nested calls beyond this raise `RecursionError`.
pub const MAX_CALL_DEPTH: usize = 100;
/// Longest string or list a single operation may build.
pub const MAX_SEQUENCE_LENGTH: usize = 100_000;
/// Total string characters and list slots one execution may allocate.
pub const MAX_ALLOCATION: u64 = 10_000_000;

#[derive(Debug)]
pub(crate) enum Interrupt {
    Error(RuntimeError),
    Budget,
}

impl From<RuntimeError> for Interrupt {
    fn from(e: RuntimeError) -> Self {
        Interrupt::Error(e)
    }
}

pub(crate) type Res<T> = Result<T, Interrupt>;

fn err<T>(kind: ErrorKind, msg: impl Into<String>) -> Res<T> {
    Err(Interrupt::Error(RuntimeError::new(kind, msg)))
}

enum Flow {
    Normal,
    Return(Value),
}

struct Frame<'p> {
    module: usize,
    traced: bool,
    locals: Vec<(&'p str, Value)>,
}

impl<'p> Frame<'p> {
    fn get(&self, name: &str) -> Option<&Value> {
        self.locals.iter().rev().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    fn set(&mut self, name: &'p str, v: Value) {
        match self.locals.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = v,
            None => self.locals.push((name, v)),
        }
    }
}

pub(crate) struct Interpreter<'p> {
    program: &'p Program,
    budget: Budget,
    mode: TraceMode,
    pub steps: u64,
    depth: usize,
    allocated: u64,
    pub trace: ExecutionTrace,
    pub events: Vec<TraceEvent>,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p Program, budget: Budget, mode: TraceMode) -> Self {
        Interpreter {
            program,
            budget,
            mode,
            steps: 0,
            depth: 0,
            allocated: 0,
            trace: ExecutionTrace::default(),
            events: Vec::new(),
        }
    }

    pub fn tick(&mut self) -> Res<()> {
        self.steps += 1;
        if self.steps > self.budget.max_steps {
            Err(Interrupt::Budget)
        } else {
            Ok(())
        }
    }

    fn alloc(&mut self, n: usize) -> Res<()> {
        self.allocated += n as u64;
        if n > MAX_SEQUENCE_LENGTH || self.allocated > MAX_ALLOCATION {
            return err(ErrorKind::MemoryError, "allocation limit exceeded");
        }
        Ok(())
    }

    pub fn alloc_str(&mut self, s: &str) -> Res<Value> {
        self.alloc(s.len())?;
        Ok(Value::str(s))
    }

    pub fn alloc_list(&mut self, items: Vec<Value>) -> Res<Value> {
        self.alloc(items.len())?;
        Ok(Value::list(items))
    }

    // ---- statements ----

    fn exec_block(&mut self, frame: &mut Frame<'p>, body: &'p [Stmt]) -> Res<Flow> {
        for s in body {
            if let Flow::Return(v) = self.exec_stmt(frame, s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn hit_line(&mut self, frame: &Frame<'p>, line: LineNo) {
        if !frame.traced {
            return;
        }
        match self.mode {
            TraceMode::Instrumented => {
                self.trace.lines_hit.insert(line);
            }
            TraceMode::PlainLogging => self.events.push(TraceEvent::Line(line)),
        }
    }

    fn exec_stmt(&mut self, frame: &mut Frame<'p>, s: &'p Stmt) -> Res<Flow> {
        self.tick()?;
        self.hit_line(frame, s.span.line);
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let v = self.eval(frame, value)?;
                self.assign(frame, target, v)?;
            }
            StmtKind::If {
                predicate,
                cond,
                then_body,
                elifs,
                else_body,
            } => {
                if self.condition(frame, cond, *predicate)? {
                    return self.exec_block(frame, then_body);
                }
                for elif in elifs {
                    self.hit_line(frame, elif.span.line);
                    if self.condition(frame, &elif.cond, elif.predicate)? {
                        return self.exec_block(frame, &elif.body);
                    }
                }
                return self.exec_block(frame, else_body);
            }
            StmtKind::While { predicate, cond, body } => {
                while self.condition(frame, cond, *predicate)? {
                    self.tick()?;
                    if let Flow::Return(v) = self.exec_block(frame, body)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(frame, e)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.eval(frame, e)?;
            }
            StmtKind::Assert(e) => {
                if !self.eval(frame, e)?.truthy() {
                    return err(ErrorKind::AssertionError, "assertion failed");
                }
            }
            StmtKind::Pass => {}
        }
        Ok(Flow::Normal)
    }

    /// Evaluates a branch condition, recording it when the frame is traced.
    fn condition(&mut self, frame: &mut Frame<'p>, cond: &'p Expr, p: PredicateId) -> Res<bool> {
        if !frame.traced {
            return Ok(self.eval(frame, cond)?.truthy());
        }
        match self.mode {
            TraceMode::Instrumented => {
                let b = self.eval_branch(frame, cond)?;
                self.trace.record_branch(
                    p,
                    BranchDistances {
                        true_distance: b.true_distance,
                        false_distance: b.false_distance,
                    },
                );
                Ok(b.taken)
            }
            TraceMode::PlainLogging => {
                let taken = self.eval(frame, cond)?.truthy();
                self.events.push(TraceEvent::Branch(p, taken));
                Ok(taken)
            }
        }
    }

    /// Same semantics and side effects as `eval(..).truthy()`, plus branch
    /// distances. Operands skipped by short-circuiting count as `K` on
    /// both sides.
    fn eval_branch(&mut self, frame: &mut Frame<'p>, e: &'p Expr) -> Res<BranchEval> {
        match &e.kind {
            ExprKind::Compare { first, rest } => {
                let mut left = self.eval(frame, first)?;
                let mut true_sum = 0.0;
                let mut false_min = f64::INFINITY;
                for (i, (op, rhs)) in rest.iter().enumerate() {
                    let right = self.eval(frame, rhs)?;
                    let b = compare_distance(*op, &left, &right)?;
                    true_sum += b.true_distance;
                    false_min = false_min.min(b.false_distance);
                    if !b.taken {
                        let skipped = (rest.len() - i - 1) as f64;
                        return Ok(BranchEval {
                            taken: false,
                            true_distance: true_sum + skipped * K,
                            false_distance: 0.0,
                        });
                    }
                    left = right;
                }
                Ok(BranchEval {
                    taken: true,
                    true_distance: 0.0,
                    false_distance: false_min,
                })
            }
            ExprKind::Logical { op: LogicOp::And, lhs, rhs } => {
                let l = self.eval_branch(frame, lhs)?;
                if !l.taken {
                    return Ok(BranchEval {
                        taken: false,
                        true_distance: l.true_distance + K,
                        false_distance: 0.0,
                    });
                }
                let r = self.eval_branch(frame, rhs)?;
                Ok(BranchEval {
                    taken: r.taken,
                    true_distance: l.true_distance + r.true_distance,
                    false_distance: l.false_distance.min(r.false_distance),
                })
            }
            ExprKind::Logical { op: LogicOp::Or, lhs, rhs } => {
                let l = self.eval_branch(frame, lhs)?;
                if l.taken {
                    return Ok(BranchEval {
                        taken: true,
                        true_distance: 0.0,
                        false_distance: l.false_distance + K,
                    });
                }
                let r = self.eval_branch(frame, rhs)?;
                Ok(BranchEval {
                    taken: r.taken,
                    true_distance: l.true_distance.min(r.true_distance),
                    false_distance: l.false_distance + r.false_distance,
                })
            }
            ExprKind::Unary { op: UnaryOp::Not, operand } => Ok(self.eval_branch(frame, operand)?.negate()),
            _ => {
                let v = self.eval(frame, e)?;
                Ok(truthiness_distance(&v))
            }
        }
    }

    fn assign(&mut self, frame: &mut Frame<'p>, target: &'p Expr, v: Value) -> Res<()> {
        match &target.kind {
            ExprKind::Name(n) => {
                frame.set(n, v);
                Ok(())
            }
            ExprKind::Attribute { value, attr } => {
                let obj = self.eval(frame, value)?;
                match obj {
                    Value::Object(o) => {
                        o.borrow_mut().attrs.insert(attr.clone(), v);
                        Ok(())
                    }
                    other => err(
                        ErrorKind::AttributeError,
                        format!("'{}' object attribute '{attr}' is read-only", other.type_name()),
                    ),
                }
            }
            ExprKind::Index { value, index } => {
                let container = self.eval(frame, value)?;
                let idx = self.eval(frame, index)?;
                match container {
                    Value::List(l) => {
                        let mut l = l.borrow_mut();
                        let i = normalize_index(&idx, l.len(), "list assignment")?;
                        l[i] = v;
                        Ok(())
                    }
                    other => Err(type_error(format!("'{}' object does not support item assignment", other.type_name())).into()),
                }
            }
            _ => Err(type_error("cannot assign to expression").into()),
        }
    }

    // ---- expressions ----

    fn eval(&mut self, frame: &mut Frame<'p>, e: &'p Expr) -> Res<Value> {
        match &e.kind {
            ExprKind::Int(i) => Ok(Value::Int(*i)),
            ExprKind::Float(f) => Ok(Value::Float(*f)),
            ExprKind::Str(s) => self.alloc_str(s),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::None => Ok(Value::None),
            ExprKind::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(frame, item)?);
                }
                self.alloc_list(out)
            }
            ExprKind::Name(n) => self.lookup(frame, n),
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.eval(frame, lhs)?;
                let b = self.eval(frame, rhs)?;
                self.binary(*op, &a, &b)
            }
            ExprKind::Compare { first, rest } => {
                let mut left = self.eval(frame, first)?;
                for (op, rhs) in rest {
                    let right = self.eval(frame, rhs)?;
                    if !compare(*op, &left, &right)? {
                        return Ok(Value::Bool(false));
                    }
                    left = right;
                }
                Ok(Value::Bool(true))
            }
            ExprKind::Logical { op, lhs, rhs } => {
                let l = self.eval(frame, lhs)?;
                match (op, l.truthy()) {
                    (LogicOp::And, false) | (LogicOp::Or, true) => Ok(l),
                    _ => self.eval(frame, rhs),
                }
            }
            ExprKind::Unary { op: UnaryOp::Not, operand } => Ok(Value::Bool(!self.eval(frame, operand)?.truthy())),
            ExprKind::Unary { op: UnaryOp::Neg, operand } => match self.eval(frame, operand)? {
                Value::Int(i) => i.checked_neg().map(Value::Int).ok_or_else(overflow),
                Value::Bool(b) => Ok(Value::Int(-(b as i64))),
                Value::Float(f) => Ok(Value::Float(-f)),
                other => Err(type_error(format!("bad operand type for unary -: '{}'", other.type_name())).into()),
            },
            ExprKind::Call { func, args } => {
                let f = self.eval(frame, func)?;
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(frame, a)?);
                }
                self.call_value(f, values)
            }
            ExprKind::Attribute { value, attr } => {
                let v = self.eval(frame, value)?;
                self.get_attr(&v, attr)
            }
            ExprKind::Index { value, index } => {
                let container = self.eval(frame, value)?;
                let idx = self.eval(frame, index)?;
                match container {
                    Value::List(l) => {
                        let l = l.borrow();
                        let i = normalize_index(&idx, l.len(), "list")?;
                        Ok(l[i].clone())
                    }
                    Value::Str(s) => {
                        let chars: Vec<char> = s.chars().collect();
                        let i = normalize_index(&idx, chars.len(), "string")?;
                        Ok(Value::str(&chars[i].to_string()))
                    }
                    other => Err(type_error(format!("'{}' object is not subscriptable", other.type_name())).into()),
                }
            }
        }
    }

    fn lookup(&self, frame: &Frame<'p>, name: &str) -> Res<Value> {
        if let Some(v) = frame.get(name) {
            return Ok(v.clone());
        }
        if let Some(g) = self.program.global(frame.module, name) {
            return Ok(global_value(g));
        }
        if let Some(b) = Builtin::by_name(name) {
            return Ok(Value::Builtin(b));
        }
        err(ErrorKind::NameError, format!("name '{name}' is not defined"))
    }

    pub fn binary(&mut self, op: BinOp, a: &Value, b: &Value) -> Res<Value> {
        if let (Some(x), Some(y)) = (a.as_int(), b.as_int()) {
            return Ok(match op {
                BinOp::Add => Value::Int(x.checked_add(y).ok_or_else(overflow)?),
                BinOp::Sub => Value::Int(x.checked_sub(y).ok_or_else(overflow)?),
                BinOp::Mul => Value::Int(x.checked_mul(y).ok_or_else(overflow)?),
                BinOp::Div => {
                    if y == 0 {
                        return err(ErrorKind::ZeroDivisionError, "division by zero");
                    }
                    Value::Float(x as f64 / y as f64)
                }
                BinOp::Mod => {
                    if y == 0 {
                        return err(ErrorKind::ZeroDivisionError, "integer modulo by zero");
                    }
                    let r = x.checked_rem(y).unwrap_or(0);
                    Value::Int(if r != 0 && (r < 0) != (y < 0) { r + y } else { r })
                }
            });
        }
        if let (Some(x), Some(y)) = (a.as_f64(), b.as_f64()) {
            return Ok(Value::Float(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return err(ErrorKind::ZeroDivisionError, "float division by zero");
                    }
                    x / y
                }
                BinOp::Mod => {
                    if y == 0.0 {
                        return err(ErrorKind::ZeroDivisionError, "float modulo");
                    }
                    let r = x % y;
                    if r != 0.0 && (r < 0.0) != (y < 0.0) {
                        r + y
                    } else {
                        r
                    }
                }
            }));
        }
        match (op, a, b) {
            (BinOp::Add, Value::Str(x), Value::Str(y)) => {
                let s = format!("{x}{y}");
                self.alloc_str(&s)
            }
            (BinOp::Add, Value::List(x), Value::List(y)) => {
                let mut v = x.borrow().clone();
                v.extend(y.borrow().iter().cloned());
                self.alloc_list(v)
            }
            (BinOp::Mul, Value::Str(s), n) | (BinOp::Mul, n, Value::Str(s)) if n.as_int().is_some() => {
                let n = n.as_int().unwrap().max(0) as usize;
                self.alloc(s.len().saturating_mul(n))?;
                Ok(Value::str(&s.repeat(n)))
            }
            (BinOp::Mul, Value::List(l), n) | (BinOp::Mul, n, Value::List(l)) if n.as_int().is_some() => {
                let n = n.as_int().unwrap().max(0) as usize;
                let l = l.borrow();
                self.alloc(l.len().saturating_mul(n))?;
                let mut v = Vec::with_capacity(l.len() * n);
                for _ in 0..n {
                    v.extend(l.iter().cloned());
                }
                Ok(Value::list(v))
            }
            _ => Err(type_error(format!(
                "unsupported operand type(s) for {}: '{}' and '{}'",
                op.token(),
                a.type_name(),
                b.type_name()
            ))
            .into()),
        }
    }

    // ---- calls and attributes ----

    pub fn get_attr(&mut self, v: &Value, name: &str) -> Res<Value> {
        match v {
            Value::Object(o) => {
                let inst = o.borrow();
                if let Some(a) = inst.attrs.get(name) {
                    return Ok(a.clone());
                }
                if let Some(&func) = self.program.class(inst.class).methods.get(name) {
                    return Ok(Value::BoundMethod(
                        o.clone(),
                        FuncId {
                            module: inst.class.module,
                            func,
                        },
                    ));
                }
            }
            Value::Module(m) => {
                if let Some(g) = self.program.global(*m, name) {
                    return Ok(global_value(g));
                }
                return err(
                    ErrorKind::AttributeError,
                    format!("module '{}' has no attribute '{name}'", self.program.modules[*m].name),
                );
            }
            Value::Class(c) => {
                if let Some(&func) = self.program.class(*c).methods.get(name) {
                    return Ok(Value::Function(FuncId { module: c.module, func }));
                }
            }
            Value::List(_) => {
                let m = match name {
                    "append" => Some(BuiltinMethod::Append),
                    "pop" => Some(BuiltinMethod::Pop),
                    _ => None,
                };
                if let Some(m) = m {
                    return Ok(Value::BuiltinMethod(Box::new(v.clone()), m));
                }
            }
            Value::Str(_) => {
                let m = match name {
                    "upper" => Some(BuiltinMethod::Upper),
                    "lower" => Some(BuiltinMethod::Lower),
                    "startswith" => Some(BuiltinMethod::StartsWith),
                    "endswith" => Some(BuiltinMethod::EndsWith),
                    "find" => Some(BuiltinMethod::Find),
                    _ => None,
                };
                if let Some(m) = m {
                    return Ok(Value::BuiltinMethod(Box::new(v.clone()), m));
                }
            }
            _ => {}
        }
        err(
            ErrorKind::AttributeError,
            format!("'{}' object has no attribute '{name}'", v.type_name()),
        )
    }

    pub fn call_value(&mut self, f: Value, args: Vec<Value>) -> Res<Value> {
        self.tick()?;
        match f {
            Value::Function(id) => self.call_function(id, args),
            Value::BoundMethod(inst, id) => {
                let mut full = Vec::with_capacity(args.len() + 1);
                full.push(Value::Object(inst));
                full.extend(args);
                self.call_function(id, full)
            }
            Value::Class(c) => self.instantiate(c, args),
            Value::Builtin(b) => self.builtin(b, args),
            Value::BuiltinMethod(recv, m) => self.builtin_method(&recv, m, args),
            other => Err(type_error(format!("'{}' object is not callable", other.type_name())).into()),
        }
    }

    fn call_function(&mut self, id: FuncId, args: Vec<Value>) -> Res<Value> {
        let program = self.program;
        let def = program.def(id);
        if args.len() != def.params.len() {
            return Err(type_error(format!(
                "{}() takes {} positional arguments but {} were given",
                def.name,
                def.params.len(),
                args.len()
            ))
            .into());
        }
        if self.depth >= MAX_CALL_DEPTH {
            return err(ErrorKind::RecursionError, "maximum recursion depth exceeded");
        }
        let traced = program.traced == Some(id.module);
        if traced {
            let q = program.qualname(id);
            if !self.trace.calls_entered.contains(q) {
                self.trace.calls_entered.insert(q.to_string());
            }
        }
        let mut frame = Frame {
            module: id.module,
            traced,
            locals: def.params.iter().map(|p| p.name.as_str()).zip(args).collect(),
        };
        self.depth += 1;
        let flow = self.exec_block(&mut frame, &def.body);
        self.depth -= 1;
        Ok(match flow? {
            Flow::Return(v) => v,
            Flow::Normal => Value::None,
        })
    }

    fn instantiate(&mut self, c: ClassId, args: Vec<Value>) -> Res<Value> {
        let info = self.program.class(c);
        let inst = Rc::new(RefCell::new(Instance {
            class: c,
            class_name: info.name.clone(),
            attrs: BTreeMap::new(),
        }));
        match info.methods.get("__init__") {
            Some(&func) => {
                let mut full = Vec::with_capacity(args.len() + 1);
                full.push(Value::Object(inst.clone()));
                full.extend(args);
                self.call_function(FuncId { module: c.module, func }, full)?;
            }
            None if !args.is_empty() => {
                return Err(type_error(format!("{}() takes no arguments", info.name)).into());
            }
            None => {}
        }
        Ok(Value::Object(inst))
    }

    fn builtin(&mut self, b: Builtin, mut args: Vec<Value>) -> Res<Value> {
        let arity = |n: usize, args: &[Value], name: &str| -> Res<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(type_error(format!("{name}() takes exactly {n} argument(s) ({} given)", args.len())).into())
            }
        };
        match b {
            Builtin::Len => {
                arity(1, &args, "len")?;
                match &args[0] {
                    Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
                    Value::List(l) => Ok(Value::Int(l.borrow().len() as i64)),
                    other => Err(type_error(format!("object of type '{}' has no len()", other.type_name())).into()),
                }
            }
            Builtin::Abs => {
                arity(1, &args, "abs")?;
                match &args[0] {
                    Value::Int(i) => i.checked_abs().map(Value::Int).ok_or_else(overflow),
                    Value::Bool(b) => Ok(Value::Int(*b as i64)),
                    Value::Float(f) => Ok(Value::Float(f.abs())),
                    other => Err(type_error(format!("bad operand type for abs(): '{}'", other.type_name())).into()),
                }
            }
            Builtin::Str => {
                arity(1, &args, "str")?;
                let s = args[0].display();
                self.alloc_str(&s)
            }
            Builtin::Bool => {
                arity(1, &args, "bool")?;
                Ok(Value::Bool(args[0].truthy()))
            }
            Builtin::Int => {
                arity(1, &args, "int")?;
                match &args[0] {
                    Value::Int(i) => Ok(Value::Int(*i)),
                    Value::Bool(b) => Ok(Value::Int(*b as i64)),
                    Value::Float(f) if f.is_nan() => err(ErrorKind::ValueError, "cannot convert float NaN to integer"),
                    Value::Float(f) if f.trunc().abs() >= 9.2e18 => err(ErrorKind::OverflowError, "int too large"),
                    Value::Float(f) => Ok(Value::Int(f.trunc() as i64)),
                    Value::Str(s) => s
                        .trim()
                        .replace('_', "")
                        .parse::<i64>()
                        .map(Value::Int)
                        .map_err(|_| RuntimeError::new(ErrorKind::ValueError, format!("invalid literal for int(): '{s}'")).into()),
                    other => Err(type_error(format!("int() argument must be a string or a number, not '{}'", other.type_name())).into()),
                }
            }
            Builtin::Float => {
                arity(1, &args, "float")?;
                match &args[0] {
                    v if v.is_numeric() => Ok(Value::Float(v.as_f64().unwrap())),
                    Value::Str(s) => s
                        .trim()
                        .parse::<f64>()
                        .map(Value::Float)
                        .map_err(|_| RuntimeError::new(ErrorKind::ValueError, format!("could not convert string to float: '{s}'")).into()),
                    other => Err(type_error(format!("float() argument must be a string or a number, not '{}'", other.type_name())).into()),
                }
            }
            Builtin::Min | Builtin::Max => {
                let items: Vec<Value> = match args.len() {
                    0 => return Err(type_error("expected at least 1 argument, got 0").into()),
                    1 => match &args[0] {
                        Value::List(l) => l.borrow().clone(),
                        other => return Err(type_error(format!("'{}' object is not iterable", other.type_name())).into()),
                    },
                    _ => args,
                };
                let Some(mut best) = items.first().cloned() else {
                    return err(ErrorKind::ValueError, "arg is an empty sequence");
                };
                let op = if b == Builtin::Min { CmpOp::Lt } else { CmpOp::Gt };
                for v in &items[1..] {
                    let better = match ordering(op, v, &best)? {
                        std::cmp::Ordering::Less => op == CmpOp::Lt,
                        std::cmp::Ordering::Greater => op == CmpOp::Gt,
                        std::cmp::Ordering::Equal => false,
                    };
                    if better {
                        best = v.clone();
                    }
                }
                Ok(best)
            }
            Builtin::Print => Ok(Value::None),
            Builtin::ExpectError => {
                if args.len() < 2 {
                    return Err(type_error("expect_error() takes an error name and a callable").into());
                }
                let Value::Str(kind) = args.remove(0) else {
                    return Err(type_error("expect_error() needs the error name as a string").into());
                };
                let callee = args.remove(0);
                match self.call_value(callee, args) {
                    Ok(_) => err(ErrorKind::AssertionError, format!("{kind} was not raised")),
                    Err(Interrupt::Error(e)) if e.kind.name() == &*kind => Ok(Value::None),
                    Err(Interrupt::Error(e)) => err(ErrorKind::AssertionError, format!("expected {kind}, got {e}")),
                    Err(Interrupt::Budget) => Err(Interrupt::Budget),
                }
            }
        }
    }

    fn builtin_method(&mut self, recv: &Value, m: BuiltinMethod, args: Vec<Value>) -> Res<Value> {
        match (recv, m) {
            (Value::List(l), BuiltinMethod::Append) => {
                let [x] = <[Value; 1]>::try_from(args).map_err(|_| type_error("append() takes exactly one argument"))?;
                self.alloc(1)?;
                if l.borrow().len() >= MAX_SEQUENCE_LENGTH {
                    return err(ErrorKind::MemoryError, "list too long");
                }
                l.borrow_mut().push(x);
                Ok(Value::None)
            }
            (Value::List(l), BuiltinMethod::Pop) => {
                let mut l = l.borrow_mut();
                if l.is_empty() {
                    return err(ErrorKind::IndexError, "pop from empty list");
                }
                match args.as_slice() {
                    [] => Ok(l.pop().unwrap()),
                    [i] => {
                        let i = normalize_index(i, l.len(), "pop")?;
                        Ok(l.remove(i))
                    }
                    _ => Err(type_error("pop expected at most 1 argument").into()),
                }
            }
            (Value::Str(s), BuiltinMethod::Upper | BuiltinMethod::Lower) => {
                if !args.is_empty() {
                    return Err(type_error("method takes no arguments").into());
                }
                let out = if m == BuiltinMethod::Upper { s.to_uppercase() } else { s.to_lowercase() };
                self.alloc_str(&out)
            }
            (Value::Str(s), BuiltinMethod::StartsWith | BuiltinMethod::EndsWith | BuiltinMethod::Find) => {
                let [arg] = args.as_slice() else {
                    return Err(type_error("method takes exactly one argument").into());
                };
                let Value::Str(needle) = arg else {
                    return Err(type_error(format!("must be str, not {}", arg.type_name())).into());
                };
                Ok(match m {
                    BuiltinMethod::StartsWith => Value::Bool(s.starts_with(&**needle)),
                    BuiltinMethod::EndsWith => Value::Bool(s.ends_with(&**needle)),
                    _ => Value::Int(match s.find(&**needle) {
                        Some(byte) => s[..byte].chars().count() as i64,
                        None => -1,
                    }),
                })
            }
            _ => Err(type_error("bad method receiver").into()),
        }
    }
}

fn overflow() -> Interrupt {
    Interrupt::Error(RuntimeError::new(ErrorKind::OverflowError, "integer overflow"))
}

fn global_value(g: Global) -> Value {
    match g {
        Global::Function(f) => Value::Function(f),
        Global::Class(c) => Value::Class(c),
        Global::Module(m) => Value::Module(m),
    }
}

fn normalize_index(idx: &Value, len: usize, what: &str) -> Res<usize> {
    let Some(i) = idx.as_int() else {
        return Err(type_error(format!("{what} indices must be integers, not {}", idx.type_name())).into());
    };
    let j = if i < 0 { i + len as i64 } else { i };
    if j < 0 || j >= len as i64 {
        return err(ErrorKind::IndexError, format!("{what} index out of range"));
    }
    Ok(j as usize)
}
