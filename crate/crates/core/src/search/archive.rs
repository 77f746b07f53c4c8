use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::fitness::CoverageGoal;
use crate::testcase::TestCase;

#[derive(Debug)]
struct Entry {
    test: TestCase,
    covers: BTreeSet<CoverageGoal>,
}

/// Shortest known covering test per goal.
#[derive(Debug, Default, Clone)]
pub struct Archive {
    best: BTreeMap<CoverageGoal, Arc<Entry>>,
}

impl Archive {
    pub fn new() -> Self {
        Archive::default()
    }

    /// Records `test` for every goal in `covered` that has no test yet or
    /// only a longer one. Returns whether anything changed.
    pub fn update(&mut self, test: &TestCase, covered: &[CoverageGoal]) -> bool {
        let mut entry: Option<Arc<Entry>> = None;
        let mut changed = false;
        for g in covered {
            let better = match self.best.get(g) {
                Some(e) => test.len() < e.test.len(),
                None => true,
            };
            if better {
                let e = entry.get_or_insert_with(|| {
                    Arc::new(Entry {
                        test: test.clone(),
                        covers: covered.iter().cloned().collect(),
                    })
                });
                self.best.insert(g.clone(), e.clone());
                changed = true;
            }
        }
        changed
    }

    pub fn covers(&self, goal: &CoverageGoal) -> bool {
        self.best.contains_key(goal)
    }

    pub fn covered(&self) -> impl Iterator<Item = &CoverageGoal> {
        self.best.keys()
    }

    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }

    pub fn test_for(&self, goal: &CoverageGoal) -> Option<&TestCase> {
        self.best.get(goal).map(|e| &e.test)
    }

    /// Distinct stored tests in goal order.
    pub fn tests(&self) -> Vec<&TestCase> {
        let mut seen: Vec<&Arc<Entry>> = Vec::new();
        for e in self.best.values() {
            if !seen.iter().any(|c| Arc::ptr_eq(c, e)) {
                seen.push(e);
            }
        }
        seen.into_iter().map(|e| &e.test).collect()
    }

    /// Fraction of `goals` with a stored test; 1.0 when `goals` is empty.
    pub fn coverage(&self, goals: &[CoverageGoal]) -> f64 {
        if goals.is_empty() {
            return 1.0;
        }
        goals.iter().filter(|g| self.covers(g)).count() as f64 / goals.len() as f64
    }

    /// Stored tests in goal order, skipping a goal when an already chosen
    /// test covers it.
    pub fn minimal_suite(&self) -> Vec<TestCase> {
        let mut chosen: Vec<&Arc<Entry>> = Vec::new();
        let mut done: BTreeSet<&CoverageGoal> = BTreeSet::new();
        for (g, e) in &self.best {
            if done.contains(g) {
                continue;
            }
            if !chosen.iter().any(|c| Arc::ptr_eq(c, e)) {
                chosen.push(e);
                done.extend(e.covers.iter());
            }
        }
        chosen.into_iter().map(|e| e.test.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testcase::{Primitive, Statement};

    fn test_of_len(n: usize) -> TestCase {
        let mut t = TestCase::new();
        for i in 0..n {
            t.push(Statement::Primitive(Primitive::Int(i as i64)));
        }
        t
    }

    #[test]
    fn replacement_only_by_strictly_shorter() {
        let g = CoverageGoal::Line(3);
        let mut a = Archive::new();
        assert!(a.update(&test_of_len(3), std::slice::from_ref(&g)));
        assert!(!a.update(&test_of_len(3), std::slice::from_ref(&g)));
        assert!(!a.update(&test_of_len(4), std::slice::from_ref(&g)));
        assert!(a.update(&test_of_len(2), std::slice::from_ref(&g)));
        assert_eq!(a.test_for(&g).unwrap().len(), 2);
    }

    #[test]
    fn minimal_suite_shares_tests() {
        let mut a = Archive::new();
        let goals = [CoverageGoal::Line(1), CoverageGoal::Line(2), CoverageGoal::Line(3)];
        a.update(&test_of_len(5), &goals[..2]);
        a.update(&test_of_len(1), &goals[2..]);
        assert_eq!(a.minimal_suite().len(), 2);
        // a test kept for one goal that also covers another stands in for it
        a.update(&test_of_len(3), &goals);
        assert_eq!(a.minimal_suite().len(), 1);
        assert_eq!(a.coverage(&goals), 1.0);
    }
}
