use rand::seq::SliceRandom;
use rand::Rng;

use super::{TestCase, VarRef};

/// A collection of tests evolved as one individual.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestSuiteChromosome {
    test_cases: Vec<TestCase>,
    fitness: Option<f64>,
}

impl TestSuiteChromosome {
    pub fn new(test_cases: Vec<TestCase>) -> Self {
        TestSuiteChromosome {
            test_cases,
            fitness: None,
        }
    }

    pub fn test_cases(&self) -> &[TestCase] {
        &self.test_cases
    }

    /// Mutable access; invalidates the cached fitness.
    pub fn test_cases_mut(&mut self) -> &mut Vec<TestCase> {
        self.fitness = None;
        &mut self.test_cases
    }

    pub fn into_test_cases(self) -> Vec<TestCase> {
        self.test_cases
    }

    pub fn len(&self) -> usize {
        self.test_cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.test_cases.is_empty()
    }

    pub fn cached_fitness(&self) -> Option<f64> {
        self.fitness
    }

    pub fn set_fitness(&mut self, f: f64) {
        self.fitness = Some(f);
    }
}

/// Single-point crossover with a random relative cut point.
pub fn crossover<R: Rng + ?Sized>(
    a: &TestSuiteChromosome,
    b: &TestSuiteChromosome,
    rng: &mut R,
) -> (TestSuiteChromosome, TestSuiteChromosome) {
    crossover_at(a, b, rng.gen_range(0.0..=1.0))
}

/// `child1 = a[..⌊r|a|⌋] ++ b[⌊r|b|⌋..]` and the mirror image, so the total
/// number of tests is conserved.
pub fn crossover_at(a: &TestSuiteChromosome, b: &TestSuiteChromosome, r: f64) -> (TestSuiteChromosome, TestSuiteChromosome) {
    let (c1, c2) = splice_lists(&a.test_cases, &b.test_cases, r);
    (TestSuiteChromosome::new(c1), TestSuiteChromosome::new(c2))
}

pub(crate) fn splice_lists<T: Clone>(a: &[T], b: &[T], r: f64) -> (Vec<T>, Vec<T>) {
    let pa = cut(a.len(), r);
    let pb = cut(b.len(), r);
    let mut c1 = a[..pa].to_vec();
    c1.extend_from_slice(&b[pb..]);
    let mut c2 = b[..pb].to_vec();
    c2.extend_from_slice(&a[pa..]);
    (c1, c2)
}

fn cut(len: usize, r: f64) -> usize {
    ((r * len as f64).floor() as usize).min(len)
}

/// Single-point crossover of two tests at a relative cut point. References
/// from the adopted tail into the discarded head are redirected to a
/// compatible variable of the new head; tail statements with no such
/// variable are dropped. Children are cut to `max_len`.
pub fn crossover_tests<R: Rng + ?Sized>(a: &TestCase, b: &TestCase, r: f64, max_len: usize, rng: &mut R) -> (TestCase, TestCase) {
    let pa = cut(a.len(), r);
    let pb = cut(b.len(), r);
    let mut c1 = splice_tests(a, pa, b, pb, rng);
    let mut c2 = splice_tests(b, pb, a, pa, rng);
    c1.truncate(max_len);
    c2.truncate(max_len);
    (c1, c2)
}

fn splice_tests<R: Rng + ?Sized>(head: &TestCase, cut_head: usize, tail: &TestCase, cut_tail: usize, rng: &mut R) -> TestCase {
    let mut child = TestCase {
        statements: head.statements[..cut_head].to_vec(),
        assertions: Vec::new(),
        expected_error: None,
    };
    let mut moved: Vec<Option<VarRef>> = Vec::with_capacity(tail.len() - cut_tail);
    for j in cut_tail..tail.len() {
        let mut stmt = tail.statements[j].clone();
        let mut ok = true;
        for r in stmt.references_mut() {
            if *r >= cut_tail {
                match moved[*r - cut_tail] {
                    Some(n) => *r = n,
                    None => ok = false,
                }
            } else {
                let want = tail.statements[*r].output_type();
                let options = match &want {
                    Some(t) => child.variables_fitting(Some(t), child.len()),
                    None => Vec::new(),
                };
                match options.choose(rng) {
                    Some(&n) => *r = n,
                    None => ok = false,
                }
            }
        }
        if ok {
            moved.push(Some(child.len()));
            child.statements.push(stmt);
        } else {
            moved.push(None);
        }
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testcase::{Primitive, Statement};

    fn suite(ids: &[i64]) -> TestSuiteChromosome {
        TestSuiteChromosome::new(
            ids.iter()
                .map(|&i| TestCase {
                    statements: vec![Statement::Primitive(Primitive::Int(i))],
                    ..TestCase::default()
                })
                .collect(),
        )
    }

    #[test]
    fn self_crossover_is_identity() {
        let x = suite(&[1, 2, 3]);
        for r in [0.0, 0.3, 0.5, 1.0] {
            let (c1, c2) = crossover_at(&x, &x, r);
            assert_eq!(c1, x);
            assert_eq!(c2, x);
        }
    }

    #[test]
    fn cut_at_zero_swaps_parents() {
        let a = suite(&[1, 2]);
        let b = suite(&[3, 4, 5]);
        let (c1, c2) = crossover_at(&a, &b, 0.0);
        assert_eq!(c1, b);
        assert_eq!(c2, a);
    }

    #[test]
    fn test_count_is_conserved() {
        let a = suite(&[1, 2, 3]);
        let b = suite(&[4, 5, 6, 7, 8]);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        for _ in 0..50 {
            let (c1, c2) = crossover(&a, &b, &mut rng);
            assert_eq!(c1.len() + c2.len(), 8);
        }
    }

    #[test]
    fn mutable_access_drops_cached_fitness() {
        let mut s = suite(&[1]);
        s.set_fitness(0.5);
        assert_eq!(s.cached_fitness(), Some(0.5));
        s.test_cases_mut().clear();
        assert_eq!(s.cached_fitness(), None);
    }
}
