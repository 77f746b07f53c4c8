use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use crate::lang::format_float;
use crate::testcase::Snapshot;

use super::program::{ClassId, FuncId};

/// Deepest nesting followed when comparing or copying values.
pub const MAX_VALUE_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorKind {
    TypeError,
    NameError,
    AttributeError,
    IndexError,
    ZeroDivisionError,
    ValueError,
    OverflowError,
    RecursionError,
    MemoryError,
    AssertionError,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 10] = [
        ErrorKind::TypeError,
        ErrorKind::NameError,
        ErrorKind::AttributeError,
        ErrorKind::IndexError,
        ErrorKind::ZeroDivisionError,
        ErrorKind::ValueError,
        ErrorKind::OverflowError,
        ErrorKind::RecursionError,
        ErrorKind::MemoryError,
        ErrorKind::AssertionError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::TypeError => "TypeError",
            ErrorKind::NameError => "NameError",
            ErrorKind::AttributeError => "AttributeError",
            ErrorKind::IndexError => "IndexError",
            ErrorKind::ZeroDivisionError => "ZeroDivisionError",
            ErrorKind::ValueError => "ValueError",
            ErrorKind::OverflowError => "OverflowError",
            ErrorKind::RecursionError => "RecursionError",
            ErrorKind::MemoryError => "MemoryError",
            ErrorKind::AssertionError => "AssertionError",
        }
    }

    pub fn from_name(name: &str) -> Option<ErrorKind> {
        ErrorKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub message: String,
}

impl RuntimeError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        RuntimeError {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for RuntimeError {}

pub(crate) fn type_error(msg: impl Into<String>) -> RuntimeError {
    RuntimeError::new(ErrorKind::TypeError, msg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Len,
    Abs,
    Str,
    Int,
    Float,
    Bool,
    Min,
    Max,
    Print,
    ExpectError,
}

impl Builtin {
    pub fn by_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "len" => Builtin::Len,
            "abs" => Builtin::Abs,
            "str" => Builtin::Str,
            "int" => Builtin::Int,
            "float" => Builtin::Float,
            "bool" => Builtin::Bool,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            "print" => Builtin::Print,
            "expect_error" => Builtin::ExpectError,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinMethod {
    Append,
    Pop,
    Upper,
    Lower,
    StartsWith,
    EndsWith,
    Find,
}

#[derive(Debug)]
pub struct Instance {
    pub class: ClassId,
    pub class_name: std::sync::Arc<str>,
    pub attrs: BTreeMap<String, Value>,
}

#[derive(Debug, Clone)]
pub enum Value {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    List(Rc<RefCell<Vec<Value>>>),
    Object(Rc<RefCell<Instance>>),
    Function(FuncId),
    Class(ClassId),
    BoundMethod(Rc<RefCell<Instance>>, FuncId),
    Builtin(Builtin),
    BuiltinMethod(Box<Value>, BuiltinMethod),
    Module(usize),
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Rc::from(s))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::None => false,
            Value::Bool(b) => *b,
            Value::Int(i) => *i != 0,
            Value::Float(f) => *f != 0.0,
            Value::Str(s) => !s.is_empty(),
            Value::List(l) => !l.borrow().is_empty(),
            _ => true,
        }
    }

    /// Numeric view, with booleans as 0/1.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Bool(b) => Some(*b as i64 as f64),
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Bool(b) => Some(*b as i64),
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Bool(_) | Value::Int(_) | Value::Float(_))
    }

    pub fn type_name(&self) -> String {
        match self {
            Value::None => "NoneType".into(),
            Value::Bool(_) => "bool".into(),
            Value::Int(_) => "int".into(),
            Value::Float(_) => "float".into(),
            Value::Str(_) => "str".into(),
            Value::List(_) => "list".into(),
            Value::Object(o) => o.borrow().class_name.to_string(),
            Value::Function(_) => "function".into(),
            Value::Class(_) => "type".into(),
            Value::BoundMethod(..) => "method".into(),
            Value::Builtin(_) | Value::BuiltinMethod(..) => "builtin_function_or_method".into(),
            Value::Module(_) => "module".into(),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        self.snapshot_at(0)
    }

    fn snapshot_at(&self, depth: usize) -> Snapshot {
        match self {
            Value::None => Snapshot::None,
            Value::Bool(b) => Snapshot::Bool(*b),
            Value::Int(i) => Snapshot::Int(*i),
            Value::Float(f) => Snapshot::Float(*f),
            Value::Str(s) => Snapshot::Str(s.to_string()),
            Value::List(_) if depth >= MAX_VALUE_DEPTH => Snapshot::Opaque("list".into()),
            Value::List(l) => Snapshot::List(l.borrow().iter().map(|v| v.snapshot_at(depth + 1)).collect()),
            Value::Object(o) => Snapshot::Object(o.borrow().class_name.to_string()),
            other => Snapshot::Opaque(other.type_name()),
        }
    }

    /// `==` semantics: numbers compare across int/float/bool, lists
    /// element-wise, objects by identity.
    pub fn equals(&self, other: &Value) -> Result<bool, RuntimeError> {
        self.equals_at(other, 0)
    }

    fn equals_at(&self, other: &Value, depth: usize) -> Result<bool, RuntimeError> {
        if depth > MAX_VALUE_DEPTH {
            return Err(RuntimeError::new(
                ErrorKind::RecursionError,
                "maximum recursion depth exceeded in comparison",
            ));
        }
        Ok(match (self, other) {
            (Value::None, Value::None) => true,
            (Value::Int(a), Value::Int(b)) => a == b,
            (a, b) if a.is_numeric() && b.is_numeric() => match (a.as_int(), b.as_int()) {
                (Some(x), Some(y)) => x == y,
                _ => a.as_f64() == b.as_f64(),
            },
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::List(a), Value::List(b)) => {
                if Rc::ptr_eq(a, b) {
                    return Ok(true);
                }
                let (a, b) = (a.borrow(), b.borrow());
                if a.len() != b.len() {
                    return Ok(false);
                }
                for (x, y) in a.iter().zip(b.iter()) {
                    if !x.equals_at(y, depth + 1)? {
                        return Ok(false);
                    }
                }
                true
            }
            (Value::Object(a), Value::Object(b)) => Rc::ptr_eq(a, b),
            (Value::Function(a), Value::Function(b)) => a == b,
            (Value::Class(a), Value::Class(b)) => a == b,
            (Value::BoundMethod(a, f), Value::BoundMethod(b, g)) => Rc::ptr_eq(a, b) && f == g,
            (Value::Builtin(a), Value::Builtin(b)) => a == b,
            (Value::Module(a), Value::Module(b)) => a == b,
            _ => false,
        })
    }

    /// `str(v)`.
    pub fn display(&self) -> String {
        match self {
            Value::Str(s) => s.to_string(),
            other => other.repr(0),
        }
    }

    fn repr(&self, depth: usize) -> String {
        match self {
            Value::None => "None".into(),
            Value::Bool(true) => "True".into(),
            Value::Bool(false) => "False".into(),
            Value::Int(i) => i.to_string(),
            Value::Float(f) if f.is_nan() => "nan".into(),
            Value::Float(f) if f.is_infinite() => if *f > 0.0 { "inf" } else { "-inf" }.into(),
            Value::Float(f) => format_float(*f),
            Value::Str(s) => format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
            Value::List(_) if depth >= MAX_VALUE_DEPTH => "[...]".into(),
            Value::List(l) => {
                let items: Vec<String> = l.borrow().iter().map(|v| v.repr(depth + 1)).collect();
                format!("[{}]", items.join(", "))
            }
            Value::Object(o) => format!("<{} object>", o.borrow().class_name),
            other => format!("<{}>", other.type_name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_crosses_numeric_types() {
        assert!(Value::Int(1).equals(&Value::Float(1.0)).unwrap());
        assert!(Value::Bool(true).equals(&Value::Int(1)).unwrap());
        assert!(!Value::Int(1).equals(&Value::str("1")).unwrap());
    }

    #[test]
    fn list_equality_is_elementwise() {
        let a = Value::list(vec![Value::Int(1), Value::str("x")]);
        let b = Value::list(vec![Value::Int(1), Value::str("x")]);
        assert!(a.equals(&b).unwrap());
        let c = Value::list(vec![Value::Int(2)]);
        assert!(!a.equals(&c).unwrap());
    }

    #[test]
    fn self_containing_lists_do_not_overflow() {
        let a = Value::list(vec![]);
        let b = Value::list(vec![]);
        if let (Value::List(x), Value::List(y)) = (&a, &b) {
            x.borrow_mut().push(a.clone());
            y.borrow_mut().push(b.clone());
        }
        assert_eq!(a.equals(&b).unwrap_err().kind, ErrorKind::RecursionError);
        assert!(matches!(a.snapshot(), Snapshot::List(_)));
        assert!(a.display().contains("[...]"));
        // break the cycles so the test does not leak
        if let (Value::List(x), Value::List(y)) = (&a, &b) {
            x.borrow_mut().clear();
            y.borrow_mut().clear();
        }
    }

    #[test]
    fn display_matches_python_spelling() {
        assert_eq!(Value::Float(2.0).display(), "2.0");
        assert_eq!(Value::list(vec![Value::str("a"), Value::None]).display(), "['a', None]");
        assert_eq!(Value::Bool(false).display(), "False");
    }
}
