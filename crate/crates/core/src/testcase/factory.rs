use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Primitive, Statement, TestCase, VarRef};
use crate::analysis::{candidates_for_type, CallableKind, GenericCallable, TestCluster, TypeInfo};

#[derive(Debug, Clone, PartialEq)]
pub struct FactoryConfig {
    /// Chance of passing an existing variable instead of creating a new one.
    pub reuse_probability: f64,
    pub max_length: usize,
    /// Nesting limit for backwards construction; deeper parameters get `None`.
    pub max_depth: usize,
    pub max_list_length: usize,
    /// Primitive ints are drawn from `-int_range..=int_range`.
    pub int_range: i64,
    /// Share of primitive draws taken from {0, 1, -1}.
    pub boundary_bias: f64,
    pub max_string_length: usize,
    /// Int changes move by up to this much (never by 0).
    pub max_delta: i64,
}

impl Default for FactoryConfig {
    fn default() -> Self {
        FactoryConfig {
            reuse_probability: 0.5,
            max_length: 40,
            max_depth: 10,
            max_list_length: 3,
            int_range: 100,
            boundary_bias: 0.1,
            max_string_length: 10,
            max_delta: 10,
        }
    }
}

/// Creates and varies tests for one cluster.
#[derive(Debug, Clone)]
pub struct TestFactory<'c> {
    pub cluster: &'c TestCluster,
    pub config: FactoryConfig,
}

impl<'c> TestFactory<'c> {
    pub fn new(cluster: &'c TestCluster, config: FactoryConfig) -> Self {
        TestFactory { cluster, config }
    }

    /// A call of a uniformly chosen callable preceded by whatever it needs.
    /// Empty when the cluster is empty or nothing fits in `max_length`.
    pub fn sample_random_test_case<R: Rng + ?Sized>(&self, rng: &mut R) -> TestCase {
        let mut test = TestCase::new();
        if self.cluster.accessible_callables.is_empty() {
            return test;
        }
        let callable = self.cluster.accessible_callables.choose(rng).unwrap().clone();
        self.append_call(&mut test, &callable, rng);
        test
    }

    /// Appends a call of `callable` with its dependencies; `false` (and the
    /// test untouched) when the result would be too long.
    pub fn append_call<R: Rng + ?Sized>(&self, test: &mut TestCase, callable: &Arc<GenericCallable>, rng: &mut R) -> bool {
        let pos = test.len();
        self.insert_call_checked(test, callable, pos, rng).is_some()
    }

    /// Inserts a call at `pos`, creating arguments backwards in front of it.
    /// Returns the index of the call statement.
    pub fn insert_call_checked<R: Rng + ?Sized>(
        &self,
        test: &mut TestCase,
        callable: &Arc<GenericCallable>,
        pos: usize,
        rng: &mut R,
    ) -> Option<usize> {
        let mut candidate = test.clone();
        let at = self.insert_call(&mut candidate, callable, pos, 0, rng);
        if candidate.len() > self.config.max_length {
            return None;
        }
        *test = candidate;
        Some(at)
    }

    fn insert_call<R: Rng + ?Sized>(
        &self,
        test: &mut TestCase,
        callable: &Arc<GenericCallable>,
        mut pos: usize,
        depth: usize,
        rng: &mut R,
    ) -> usize {
        let receiver = match callable.kind {
            CallableKind::Method => {
                let owner = callable.owner_type().expect("methods have an owner");
                Some(self.obtain(test, &owner, &mut pos, depth + 1, rng))
            }
            _ => None,
        };
        let mut args = Vec::with_capacity(callable.params.len());
        for p in &callable.params {
            let t = candidates_for_type(self.cluster, p.declared.as_ref(), rng);
            args.push(self.obtain(test, &t, &mut pos, depth + 1, rng));
        }
        let callable = callable.clone();
        let stmt = match (callable.kind, receiver) {
            (CallableKind::Function, _) => Statement::Function { callable, args },
            (CallableKind::Constructor, _) => Statement::Constructor { callable, args },
            (CallableKind::Method, Some(receiver)) => Statement::Method {
                callable,
                receiver,
                args,
            },
            (CallableKind::Method, None) => unreachable!(),
        };
        test.insert(pos, stmt);
        pos
    }

    /// A variable of type `t` defined before `*pos`, reused or freshly
    /// created; `*pos` moves past anything inserted.
    fn obtain<R: Rng + ?Sized>(&self, test: &mut TestCase, t: &TypeInfo, pos: &mut usize, depth: usize, rng: &mut R) -> VarRef {
        let existing = test.variables_fitting(Some(t), *pos);
        if !existing.is_empty() && rng.gen_bool(self.config.reuse_probability) {
            return *existing.choose(rng).unwrap();
        }
        let stmt_pos = if depth > self.config.max_depth {
            test.insert(*pos, Statement::Primitive(Primitive::None));
            *pos
        } else {
            self.create(test, t, pos, depth, rng)
        };
        *pos = stmt_pos + 1;
        stmt_pos
    }

    fn create<R: Rng + ?Sized>(&self, test: &mut TestCase, t: &TypeInfo, pos: &mut usize, depth: usize, rng: &mut R) -> usize {
        match t {
            TypeInfo::List(elem) => {
                let elem = match elem {
                    Some(e) => (**e).clone(),
                    None => candidates_for_type(self.cluster, None, rng),
                };
                let n = rng.gen_range(0..=self.config.max_list_length);
                let elements = (0..n).map(|_| self.obtain(test, &elem, pos, depth + 1, rng)).collect();
                test.insert(
                    *pos,
                    Statement::List {
                        element_type: Some(elem),
                        elements,
                    },
                );
                *pos
            }
            TypeInfo::Class(_) => match self.cluster.constructor_for(t).cloned() {
                Some(ctor) => self.insert_call(test, &ctor, *pos, depth, rng),
                None => {
                    test.insert(*pos, Statement::Primitive(Primitive::None));
                    *pos
                }
            },
            primitive => {
                test.insert(*pos, Statement::Primitive(self.random_primitive(primitive, rng)));
                *pos
            }
        }
    }

    pub fn random_primitive<R: Rng + ?Sized>(&self, t: &TypeInfo, rng: &mut R) -> Primitive {
        let c = &self.config;
        match t {
            TypeInfo::Int => {
                if rng.gen_bool(c.boundary_bias) {
                    Primitive::Int(*[0, 1, -1].choose(rng).unwrap())
                } else {
                    Primitive::Int(rng.gen_range(-c.int_range..=c.int_range))
                }
            }
            TypeInfo::Float => {
                if rng.gen_bool(c.boundary_bias) {
                    Primitive::Float(*[0.0, 1.0, -1.0].choose(rng).unwrap())
                } else {
                    let r = c.int_range as f64;
                    Primitive::Float(round2(rng.gen_range(-r..=r)))
                }
            }
            TypeInfo::Str => {
                let n = rng.gen_range(0..=c.max_string_length);
                Primitive::Str((0..n).map(|_| random_letter(rng)).collect())
            }
            TypeInfo::Bool => Primitive::Bool(rng.gen_bool(0.5)),
            _ => Primitive::None,
        }
    }

    /// One of insert / remove / change, each with probability 1/3. An empty
    /// test always gets an insertion. Assertions and expected errors are
    /// dropped since they may no longer hold.
    pub fn mutate<R: Rng + ?Sized>(&self, test: &TestCase, rng: &mut R) -> TestCase {
        let mut t = TestCase {
            statements: test.statements.clone(),
            assertions: Vec::new(),
            expected_error: None,
        };
        let op = if t.is_empty() { 0 } else { rng.gen_range(0..3) };
        match op {
            0 => {
                self.insert_statement(&mut t, rng);
            }
            1 => self.remove_statement(&mut t, rng),
            _ => {
                self.change_statement(&mut t, rng);
            }
        }
        t
    }

    /// Adds a random call at a random position: a method on an existing
    /// object or any callable of the module under test. Rejected (returns
    /// `false`) when the test would grow past `max_length`.
    pub fn insert_statement<R: Rng + ?Sized>(&self, test: &mut TestCase, rng: &mut R) -> bool {
        if self.cluster.accessible_callables.is_empty() || test.len() >= self.config.max_length {
            return false;
        }
        let pos = rng.gen_range(0..=test.len());
        let objects: Vec<(VarRef, Arc<GenericCallable>)> = (0..pos)
            .filter_map(|i| match test.statements[i].output_type() {
                Some(t @ TypeInfo::Class(_)) => Some(self.cluster.methods_of(&t).iter().map(move |m| (i, m.clone()))),
                _ => None,
            })
            .flatten()
            .collect();
        if !objects.is_empty() && rng.gen_bool(0.5) {
            let (receiver, method) = objects.choose(rng).unwrap().clone();
            let mut candidate = test.clone();
            let mut at = pos;
            let mut args = Vec::with_capacity(method.params.len());
            for p in &method.params {
                let t = candidates_for_type(self.cluster, p.declared.as_ref(), rng);
                args.push(self.obtain(&mut candidate, &t, &mut at, 1, rng));
            }
            candidate.insert(
                at,
                Statement::Method {
                    callable: method,
                    receiver,
                    args,
                },
            );
            if candidate.len() > self.config.max_length {
                return false;
            }
            *test = candidate;
            return true;
        }
        let callable = self.cluster.accessible_callables.choose(rng).unwrap().clone();
        self.insert_call_checked(test, &callable, pos, rng).is_some()
    }

    pub fn remove_statement<R: Rng + ?Sized>(&self, test: &mut TestCase, rng: &mut R) {
        if test.is_empty() {
            return;
        }
        let idx = rng.gen_range(0..test.len());
        test.remove_with_repair(idx, &mut |c| *c.choose(rng).unwrap());
    }

    /// Changes a primitive value or swaps one reference. Tries a few
    /// statements; `false` when none could be changed.
    pub fn change_statement<R: Rng + ?Sized>(&self, test: &mut TestCase, rng: &mut R) -> bool {
        for _ in 0..3 {
            if test.is_empty() {
                return false;
            }
            let idx = rng.gen_range(0..test.len());
            if self.change_at(test, idx, rng) {
                return true;
            }
        }
        false
    }

    fn change_at<R: Rng + ?Sized>(&self, test: &mut TestCase, idx: usize, rng: &mut R) -> bool {
        if let Statement::Primitive(p) = &mut test.statements[idx] {
            return change_primitive(p, self.config.max_delta, rng);
        }
        if let Statement::List { element_type, .. } = &test.statements[idx] {
            let candidates = test.variables_fitting(element_type.as_ref(), idx);
            return change_list(&mut test.statements, idx, candidates, rng);
        }
        let refs = test.statements[idx].references();
        if refs.is_empty() {
            return false;
        }
        let slot = rng.gen_range(0..refs.len());
        let want = test.statements[idx].expected_type(slot);
        let options: Vec<VarRef> = test
            .variables_fitting(want.as_ref(), idx)
            .into_iter()
            .filter(|&v| v != refs[slot])
            .collect();
        let Some(&new) = options.choose(rng) else { return false };
        *test.statements[idx].references_mut().remove(slot) = new;
        true
    }
}

fn change_list<R: Rng + ?Sized>(statements: &mut [Statement], idx: usize, candidates: Vec<VarRef>, rng: &mut R) -> bool {
    let Statement::List { elements, .. } = &mut statements[idx] else { unreachable!() };
    let options = [!elements.is_empty(), !candidates.is_empty(), !elements.is_empty() && candidates.len() > 1];
    let choices: Vec<usize> = (0..3).filter(|&i| options[i]).collect();
    let Some(&choice) = choices.choose(rng) else { return false };
    match choice {
        0 => {
            let i = rng.gen_range(0..elements.len());
            elements.remove(i);
        }
        1 => {
            let i = rng.gen_range(0..=elements.len());
            elements.insert(i, *candidates.choose(rng).unwrap());
        }
        _ => {
            let i = rng.gen_range(0..elements.len());
            let current = elements[i];
            let Some(&new) = candidates.iter().filter(|&&c| c != current).collect::<Vec<_>>().choose(rng).copied() else {
                return false;
            };
            elements[i] = new;
        }
    }
    true
}

fn change_primitive<R: Rng + ?Sized>(p: &mut Primitive, max_delta: i64, rng: &mut R) -> bool {
    match p {
        Primitive::None => false,
        Primitive::Bool(b) => {
            *b = !*b;
            true
        }
        Primitive::Int(v) => {
            let delta = rng.gen_range(1..=max_delta.max(1));
            *v = if rng.gen_bool(0.5) { v.saturating_add(delta) } else { v.saturating_sub(delta) };
            true
        }
        Primitive::Float(v) => {
            let scale = *[1.0, 0.1, 0.01].choose(rng).unwrap();
            let delta = rng.gen_range(1..=max_delta.max(1)) as f64 * scale;
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let new = round2(*v + sign * delta);
            let changed = new != *v;
            *v = new;
            changed
        }
        Primitive::Str(s) => {
            let mut chars: Vec<char> = s.chars().collect();
            let op = if chars.is_empty() { 0 } else { rng.gen_range(0..3) };
            match op {
                0 => {
                    let i = rng.gen_range(0..=chars.len());
                    chars.insert(i, random_letter(rng));
                }
                1 => {
                    let i = rng.gen_range(0..chars.len());
                    chars.remove(i);
                }
                _ => {
                    let i = rng.gen_range(0..chars.len());
                    let old = chars[i];
                    while chars[i] == old {
                        chars[i] = random_letter(rng);
                    }
                }
            }
            *s = chars.into_iter().collect();
            true
        }
    }
}

fn random_letter<R: Rng + ?Sized>(rng: &mut R) -> char {
    (b'a' + rng.gen_range(0..26u8)) as char
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Test fragment calling `callable`, with every parameter satisfied by new
/// or shared variables in front of the call.
pub fn fulfill_parameters<R: Rng + ?Sized>(
    callable: &Arc<GenericCallable>,
    cluster: &TestCluster,
    rng: &mut R,
    depth: usize,
) -> TestCase {
    let factory = TestFactory::new(cluster, FactoryConfig::default());
    let mut test = TestCase::new();
    factory.insert_call(&mut test, callable, 0, depth, rng);
    test
}

pub fn sample_random_test_case<R: Rng + ?Sized>(cluster: &TestCluster, rng: &mut R, max_len: usize) -> TestCase {
    let config = FactoryConfig {
        max_length: max_len,
        ..FactoryConfig::default()
    };
    TestFactory::new(cluster, config).sample_random_test_case(rng)
}

pub fn mutate<R: Rng + ?Sized>(test: &TestCase, cluster: &TestCluster, rng: &mut R) -> TestCase {
    TestFactory::new(cluster, FactoryConfig::default()).mutate(test, rng)
}
