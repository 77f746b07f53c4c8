use super::VarRef;

/// Deep copy of an observed value. Objects nested inside lists cannot be
/// compared by value and are kept only by class name.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Snapshot>),
    Object(String),
    /// Callables, modules and values nested too deeply.
    Opaque(String),
}

impl Snapshot {
    /// Whether the value can be written as a literal in an assertion.
    pub fn is_literal(&self) -> bool {
        match self {
            Snapshot::Float(f) => f.is_finite(),
            Snapshot::List(items) => items.iter().all(Snapshot::is_literal),
            Snapshot::Object(_) | Snapshot::Opaque(_) => false,
            _ => true,
        }
    }

    /// Equality with an absolute tolerance on floats at any depth.
    pub fn approx_eq(&self, other: &Snapshot, tol: f64) -> bool {
        match (self, other) {
            (Snapshot::Float(a), Snapshot::Float(b)) => a == b || (a - b).abs() <= tol || (a.is_nan() && b.is_nan()),
            (Snapshot::List(a), Snapshot::List(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y, tol))
            }
            _ => self == other,
        }
    }
}

/// Variable, optionally followed by one attribute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservationPath {
    pub var: VarRef,
    pub attr: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Assertion {
    PrimitiveEquals { path: ObservationPath, expected: Snapshot },
    FloatApprox { path: ObservationPath, expected: f64 },
    IsNone { path: ObservationPath },
    AttributeEquals { var: VarRef, attr: String, expected: Snapshot },
}

impl Assertion {
    pub const FLOAT_TOLERANCE: f64 = 1e-6;

    /// The assertion that checks `path` holds `value`; `None` when the value
    /// has no literal form.
    pub fn for_value(path: ObservationPath, value: &Snapshot) -> Option<Assertion> {
        if !value.is_literal() {
            return None;
        }
        Some(match (value, path.attr.clone()) {
            (Snapshot::None, _) => Assertion::IsNone { path },
            (Snapshot::Float(f), _) => Assertion::FloatApprox { path, expected: *f },
            (_, Some(attr)) => Assertion::AttributeEquals {
                var: path.var,
                attr,
                expected: value.clone(),
            },
            (_, None) => Assertion::PrimitiveEquals {
                path,
                expected: value.clone(),
            },
        })
    }

    pub fn path(&self) -> ObservationPath {
        match self {
            Assertion::PrimitiveEquals { path, .. } | Assertion::FloatApprox { path, .. } | Assertion::IsNone { path } => {
                path.clone()
            }
            Assertion::AttributeEquals { var, attr, .. } => ObservationPath {
                var: *var,
                attr: Some(attr.clone()),
            },
        }
    }

    pub fn path_mut_var(&mut self) -> &mut VarRef {
        match self {
            Assertion::PrimitiveEquals { path, .. } | Assertion::FloatApprox { path, .. } | Assertion::IsNone { path } => {
                &mut path.var
            }
            Assertion::AttributeEquals { var, .. } => var,
        }
    }

    /// Whether `actual` satisfies the assertion.
    pub fn holds(&self, actual: &Snapshot) -> bool {
        match self {
            Assertion::PrimitiveEquals { expected, .. } | Assertion::AttributeEquals { expected, .. } => actual == expected,
            Assertion::FloatApprox { expected, .. } => match actual {
                Snapshot::Float(a) => (a - expected).abs() <= Self::FLOAT_TOLERANCE,
                Snapshot::Int(a) => (*a as f64 - expected).abs() <= Self::FLOAT_TOLERANCE,
                _ => false,
            },
            Assertion::IsNone { .. } => *actual == Snapshot::None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(var: VarRef, attr: Option<&str>) -> ObservationPath {
        ObservationPath {
            var,
            attr: attr.map(str::to_string),
        }
    }

    #[test]
    fn kind_follows_value() {
        assert!(matches!(
            Assertion::for_value(path(0, None), &Snapshot::None),
            Some(Assertion::IsNone { .. })
        ));
        assert!(matches!(
            Assertion::for_value(path(0, None), &Snapshot::Float(0.5)),
            Some(Assertion::FloatApprox { .. })
        ));
        assert!(matches!(
            Assertion::for_value(path(0, Some("x")), &Snapshot::Int(3)),
            Some(Assertion::AttributeEquals { .. })
        ));
        assert!(Assertion::for_value(path(0, None), &Snapshot::Float(f64::NAN)).is_none());
        assert!(Assertion::for_value(path(0, None), &Snapshot::List(vec![Snapshot::Object("P".into())])).is_none());
    }

    #[test]
    fn float_assertion_uses_tolerance() {
        let a = Assertion::for_value(path(0, None), &Snapshot::Float(1.0)).unwrap();
        assert!(a.holds(&Snapshot::Float(1.0 + 5e-7)));
        assert!(!a.holds(&Snapshot::Float(1.0 + 2e-6)));
    }
}
