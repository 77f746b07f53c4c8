//! Comparison semantics and branch distances (Korel's rules, k = 1).
//!
//! Every function here returns the outcome together with the distance to
//! the true side and to the false side. The taken side is always 0 and the
//! untaken side is strictly positive.

use std::cmp::Ordering;

use super::value::{type_error, RuntimeError, Value, MAX_VALUE_DEPTH};
use crate::lang::CmpOp;

/// Constant added when an ordering comparison is just barely untaken.
pub const K: f64 = 1.0;

/// Outcome of a condition together with its distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEval {
    pub taken: bool,
    pub true_distance: f64,
    pub false_distance: f64,
}

impl BranchEval {
    /// Builds a result with the taken side forced to 0 and the untaken side
    /// forced positive (NaN and non-positive values become `K`).
    pub fn new(taken: bool, untaken_distance: f64) -> Self {
        let d = if untaken_distance > 0.0 { untaken_distance } else { K };
        if taken {
            BranchEval {
                taken,
                true_distance: 0.0,
                false_distance: d,
            }
        } else {
            BranchEval {
                taken,
                true_distance: d,
                false_distance: 0.0,
            }
        }
    }

    pub fn negate(self) -> Self {
        BranchEval {
            taken: !self.taken,
            true_distance: self.false_distance,
            false_distance: self.true_distance,
        }
    }
}

/// Python's ordering between two values; `TypeError` when unordered.
pub fn ordering(op: CmpOp, a: &Value, b: &Value) -> Result<Ordering, RuntimeError> {
    ordering_at(op, a, b, 0)
}

fn ordering_at(op: CmpOp, a: &Value, b: &Value, depth: usize) -> Result<Ordering, RuntimeError> {
    if depth > MAX_VALUE_DEPTH {
        return Err(RuntimeError::new(
            super::value::ErrorKind::RecursionError,
            "maximum recursion depth exceeded in comparison",
        ));
    }
    match (a, b) {
        (x, y) if x.is_numeric() && y.is_numeric() => match (x.as_int(), y.as_int()) {
            (Some(i), Some(j)) => Ok(i.cmp(&j)),
            // NaN compares unordered; every ordering test on it is false
            _ => Ok(x.as_f64().unwrap().partial_cmp(&y.as_f64().unwrap()).unwrap_or(Ordering::Equal)),
        },
        (Value::Str(x), Value::Str(y)) => Ok(x.cmp(y)),
        (Value::List(x), Value::List(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            for (p, q) in x.iter().zip(y.iter()) {
                if !p.equals(q)? {
                    return ordering_at(op, p, q, depth + 1);
                }
            }
            Ok(x.len().cmp(&y.len()))
        }
        _ => Err(type_error(format!(
            "'{}' not supported between instances of '{}' and '{}'",
            op.token(),
            a.type_name(),
            b.type_name()
        ))),
    }
}

fn has_nan(a: &Value, b: &Value) -> bool {
    matches!(a, Value::Float(f) if f.is_nan()) || matches!(b, Value::Float(f) if f.is_nan())
}

/// Evaluates `a op b` with the usual semantics.
pub fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, RuntimeError> {
    Ok(match op {
        CmpOp::Eq => a.equals(b)?,
        CmpOp::NotEq => !a.equals(b)?,
        _ if has_nan(a, b) => false,
        CmpOp::Lt => ordering(op, a, b)? == Ordering::Less,
        CmpOp::LtE => ordering(op, a, b)? != Ordering::Greater,
        CmpOp::Gt => ordering(op, a, b)? == Ordering::Greater,
        CmpOp::GtE => ordering(op, a, b)? != Ordering::Less,
    })
}

/// `a - b` for numeric operands, exact for integers.
fn numeric_difference(a: &Value, b: &Value) -> Option<f64> {
    match (a.as_int(), b.as_int()) {
        (Some(x), Some(y)) => Some((x as i128 - y as i128) as f64),
        _ => Some(a.as_f64()? - b.as_f64()?),
    }
}

/// Outcome and branch distances of `a op b`.
///
/// | op   | true distance (when false) | false distance (when true) |
/// |------|----------------------------|----------------------------|
/// | `==` | \|a − b\|                  | k                          |
/// | `!=` | k                          | \|a − b\|                  |
/// | `<`  | a − b + k                  | b − a                      |
/// | `<=` | a − b                      | b − a + k                  |
/// | `>`  | b − a + k                  | a − b                      |
/// | `>=` | b − a                      | a − b + k                  |
///
/// Non-numeric operands use k on the untaken side.
pub fn compare_distance(op: CmpOp, a: &Value, b: &Value) -> Result<BranchEval, RuntimeError> {
    let taken = compare(op, a, b)?;
    let Some(d) = numeric_difference(a, b).filter(|_| a.is_numeric() && b.is_numeric()) else {
        return Ok(BranchEval::new(taken, K));
    };
    let untaken = match (op, taken) {
        (CmpOp::Eq, false) | (CmpOp::NotEq, true) => d.abs(),
        (CmpOp::Eq, true) | (CmpOp::NotEq, false) => K,
        (CmpOp::Lt, false) => d + K,
        (CmpOp::Lt, true) => -d,
        (CmpOp::LtE, false) => d,
        (CmpOp::LtE, true) => -d + K,
        (CmpOp::Gt, false) => -d + K,
        (CmpOp::Gt, true) => d,
        (CmpOp::GtE, false) => -d,
        (CmpOp::GtE, true) => d + K,
    };
    Ok(BranchEval::new(taken, untaken))
}

/// Distances for a plain value used as a condition: a number needs to move
/// by its magnitude to become false, anything else is one step away.
pub fn truthiness_distance(v: &Value) -> BranchEval {
    let taken = v.truthy();
    let untaken = match v {
        Value::Int(i) if taken => (*i as f64).abs(),
        Value::Float(f) if taken => f.abs(),
        _ => K,
    };
    BranchEval::new(taken, untaken)
}
