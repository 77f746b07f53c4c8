//! Test-case representation, the backwards-constructing test factory and the
//! variation operators used by the search.

mod assertion;
mod chromosome;
mod factory;

use std::fmt;
use std::sync::Arc;

pub use assertion::{Assertion, ObservationPath, Snapshot};
pub use chromosome::{crossover, crossover_at, crossover_tests, TestSuiteChromosome};
pub(crate) use chromosome::splice_lists;
pub use factory::{fulfill_parameters, mutate, sample_random_test_case, FactoryConfig, TestFactory};

use crate::analysis::{GenericCallable, TypeInfo};

/// Index of the statement that defines the referenced variable.
pub type VarRef = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Primitive {
    pub fn type_info(&self) -> TypeInfo {
        match self {
            Primitive::None => TypeInfo::NoneType,
            Primitive::Bool(_) => TypeInfo::Bool,
            Primitive::Int(_) => TypeInfo::Int,
            Primitive::Float(_) => TypeInfo::Float,
            Primitive::Str(_) => TypeInfo::Str,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Primitive(Primitive),
    List {
        element_type: Option<TypeInfo>,
        elements: Vec<VarRef>,
    },
    Constructor {
        callable: Arc<GenericCallable>,
        args: Vec<VarRef>,
    },
    Function {
        callable: Arc<GenericCallable>,
        args: Vec<VarRef>,
    },
    Method {
        callable: Arc<GenericCallable>,
        receiver: VarRef,
        args: Vec<VarRef>,
    },
}

impl Statement {
    /// Statically known type of the variable this statement defines.
    pub fn output_type(&self) -> Option<TypeInfo> {
        match self {
            Statement::Primitive(p) => Some(p.type_info()),
            Statement::List { element_type, .. } => Some(TypeInfo::List(element_type.clone().map(Box::new))),
            Statement::Constructor { callable, .. }
            | Statement::Function { callable, .. }
            | Statement::Method { callable, .. } => callable.output_type(),
        }
    }

    pub fn callable(&self) -> Option<&Arc<GenericCallable>> {
        match self {
            Statement::Constructor { callable, .. }
            | Statement::Function { callable, .. }
            | Statement::Method { callable, .. } => Some(callable),
            _ => None,
        }
    }

    pub fn is_call(&self) -> bool {
        self.callable().is_some()
    }

    /// Receiver first, then arguments or list elements.
    pub fn references(&self) -> Vec<VarRef> {
        match self {
            Statement::Primitive(_) => Vec::new(),
            Statement::List { elements, .. } => elements.clone(),
            Statement::Constructor { args, .. } | Statement::Function { args, .. } => args.clone(),
            Statement::Method { receiver, args, .. } => {
                let mut v = vec![*receiver];
                v.extend(args);
                v
            }
        }
    }

    pub fn references_mut(&mut self) -> Vec<&mut VarRef> {
        match self {
            Statement::Primitive(_) => Vec::new(),
            Statement::List { elements, .. } => elements.iter_mut().collect(),
            Statement::Constructor { args, .. } | Statement::Function { args, .. } => args.iter_mut().collect(),
            Statement::Method { receiver, args, .. } => {
                let mut v = vec![receiver];
                v.extend(args.iter_mut());
                v
            }
        }
    }

    /// Type the reference at `slot` (as ordered by [`Statement::references`])
    /// is expected to have, if constrained.
    pub fn expected_type(&self, slot: usize) -> Option<TypeInfo> {
        match self {
            Statement::Primitive(_) => None,
            Statement::List { element_type, .. } => element_type.clone(),
            Statement::Constructor { callable, .. } | Statement::Function { callable, .. } => {
                callable.params.get(slot).and_then(|p| p.declared.clone())
            }
            Statement::Method { callable, .. } if slot == 0 => callable.owner_type(),
            Statement::Method { callable, .. } => callable.params.get(slot - 1).and_then(|p| p.declared.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestCase {
    pub statements: Vec<Statement>,
    /// Assertions checked right after the statement at the given index.
    pub assertions: Vec<(usize, Assertion)>,
    /// Error kind the last statement is expected to raise.
    pub expected_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidTest(pub String);

impl fmt::Display for InvalidTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidTest {}

impl TestCase {
    pub fn new() -> Self {
        TestCase::default()
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn push(&mut self, s: Statement) -> VarRef {
        self.statements.push(s);
        self.statements.len() - 1
    }

    /// Definition-before-use, arity and length checks.
    pub fn validate(&self, max_len: usize) -> Result<(), InvalidTest> {
        if self.len() > max_len {
            return Err(InvalidTest(format!("length {} exceeds {max_len}", self.len())));
        }
        for (i, s) in self.statements.iter().enumerate() {
            if let Some(r) = s.references().into_iter().find(|&r| r >= i) {
                return Err(InvalidTest(format!("statement {i} uses variable {r} before definition")));
            }
            let given = match s {
                Statement::Constructor { args, .. }
                | Statement::Function { args, .. }
                | Statement::Method { args, .. } => args.len(),
                _ => continue,
            };
            let callable = s.callable().expect("call statement");
            if given != callable.arity() {
                return Err(InvalidTest(format!(
                    "statement {i} passes {given} arguments to {} which takes {}",
                    callable.qualified_name(),
                    callable.arity()
                )));
            }
        }
        for (i, _) in &self.assertions {
            if *i >= self.len() {
                return Err(InvalidTest(format!("assertion after missing statement {i}")));
            }
        }
        Ok(())
    }

    /// Variables defined before `pos` whose static type fits `want`. With no
    /// expectation every variable qualifies.
    pub fn variables_fitting(&self, want: Option<&TypeInfo>, pos: usize) -> Vec<VarRef> {
        (0..pos.min(self.len()))
            .filter(|&i| match want {
                None => true,
                Some(w) => self.statements[i].output_type().is_some_and(|t| t.fits(w)),
            })
            .collect()
    }

    /// Inserts `s` at `pos`, shifting references to later statements.
    pub fn insert(&mut self, pos: usize, s: Statement) {
        for later in &mut self.statements[pos..] {
            for r in later.references_mut() {
                if *r >= pos {
                    *r += 1;
                }
            }
        }
        for (i, _) in &mut self.assertions {
            if *i >= pos {
                *i += 1;
            }
        }
        self.statements.insert(pos, s);
    }

    /// Removes statement `idx`. Later uses of its variable are redirected
    /// to a compatible earlier variable picked by `choose`, or removed in
    /// turn when there is none.
    pub fn remove_with_repair(&mut self, idx: usize, choose: &mut dyn FnMut(&[VarRef]) -> VarRef) {
        let removed_type = self.statements[idx].output_type();
        let replacements: Vec<VarRef> = match &removed_type {
            Some(t) => self.variables_fitting(Some(t), idx),
            None => Vec::new(),
        };
        self.statements.remove(idx);
        self.assertions.retain(|(i, _)| *i != idx);
        for (i, _) in &mut self.assertions {
            if *i > idx {
                *i -= 1;
            }
        }
        let mut doomed = Vec::new();
        for (j, s) in self.statements.iter_mut().enumerate().skip(idx) {
            for r in s.references_mut() {
                if *r == idx {
                    if replacements.is_empty() {
                        if doomed.last() != Some(&j) {
                            doomed.push(j);
                        }
                    } else {
                        *r = choose(&replacements);
                    }
                } else if *r > idx {
                    *r -= 1;
                }
            }
        }
        for d in doomed.into_iter().rev() {
            self.remove_with_repair(d, choose);
        }
    }

    /// Index of the last call statement.
    pub fn last_call(&self) -> Option<usize> {
        self.statements.iter().rposition(Statement::is_call)
    }

    /// Keeps only statements `..n`, dropping assertions past the cut.
    pub fn truncate(&mut self, n: usize) {
        self.statements.truncate(n);
        self.assertions.retain(|(i, _)| *i < n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{CallableKind, ParamInfo};

    fn func(arity: usize) -> Arc<GenericCallable> {
        Arc::new(GenericCallable {
            kind: CallableKind::Function,
            module: "m".into(),
            owner: None,
            name: "f".into(),
            params: (0..arity)
                .map(|i| ParamInfo {
                    name: format!("p{i}"),
                    declared: Some(TypeInfo::Int),
                })
                .collect(),
            returns: None,
            access_path: vec!["f".into()],
        })
    }

    #[test]
    fn insert_shifts_later_references() {
        let mut t = TestCase::new();
        t.push(Statement::Primitive(Primitive::Int(1)));
        t.push(Statement::Function {
            callable: func(1),
            args: vec![0],
        });
        t.insert(0, Statement::Primitive(Primitive::Int(2)));
        assert_eq!(t.statements[2].references(), vec![1]);
        t.validate(40).unwrap();
    }

    #[test]
    fn remove_redirects_or_cascades() {
        let mut t = TestCase::new();
        t.push(Statement::Primitive(Primitive::Int(1)));
        t.push(Statement::Primitive(Primitive::Int(2)));
        t.push(Statement::Function {
            callable: func(2),
            args: vec![0, 1],
        });
        t.remove_with_repair(1, &mut |c| c[0]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.statements[1].references(), vec![0, 0]);

        t.remove_with_repair(0, &mut |c| c[0]);
        assert!(t.is_empty());
    }

    #[test]
    fn validate_rejects_forward_reference_and_bad_arity() {
        let mut t = TestCase::new();
        t.push(Statement::Function {
            callable: func(1),
            args: vec![0],
        });
        assert!(t.validate(40).is_err());
        let mut t = TestCase::new();
        t.push(Statement::Function {
            callable: func(2),
            args: vec![],
        });
        assert!(t.validate(40).is_err());
    }
}
