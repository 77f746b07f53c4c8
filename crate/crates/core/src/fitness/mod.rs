//! Coverage goals, per-goal fitness and coverage ratios.
//!
//! A goal's fitness is `approach level + norm(branch distance)`, where the
//! approach level counts control-dependency ancestors between the nearest
//! executed predicate and the goal. Zero means covered.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::interp::ExecutionTrace;
use crate::lang::{collect_lines, collect_predicates, control_dependence, AstModule, BranchRef, ControlDependence, LineNo, PredicateId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoverageGoal {
    Line(LineNo),
    Branch(PredicateId, bool),
    /// Entering a code object that has no predicates (`f`, `Stack.__init__`).
    Root(String),
}

impl CoverageGoal {
    pub fn is_line(&self) -> bool {
        matches!(self, CoverageGoal::Line(_))
    }
}

impl fmt::Display for CoverageGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageGoal::Line(l) => write!(f, "line {l}"),
            CoverageGoal::Branch(p, pol) => write!(f, "branch p{}:{}", p.0, pol),
            CoverageGoal::Root(q) => write!(f, "root {q}"),
        }
    }
}

/// Which goals a search optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    #[default]
    Branch,
    Line,
    Both,
}

impl Criterion {
    pub fn parse(s: &str) -> Option<Criterion> {
        match s {
            "branch" => Some(Criterion::Branch),
            "line" => Some(Criterion::Line),
            "both" => Some(Criterion::Both),
            _ => None,
        }
    }
}

/// `d / (d + 1)`, kept strictly below 1.
pub fn norm(d: f64) -> f64 {
    if d.is_nan() || d <= 0.0 {
        return 0.0;
    }
    if d.is_infinite() {
        return 1.0 - f64::EPSILON;
    }
    (d / (d + 1.0)).min(1.0 - f64::EPSILON)
}

/// Every goal of one module with the dependence data needed to score them.
#[derive(Debug, Clone)]
pub struct GoalSet {
    goals: Vec<CoverageGoal>,
    dependence: ControlDependence,
}

impl GoalSet {
    pub fn for_module(m: &AstModule) -> GoalSet {
        let dependence = control_dependence(m);
        let mut goals: Vec<CoverageGoal> = collect_lines(m).into_iter().map(CoverageGoal::Line).collect();
        for p in collect_predicates(m) {
            goals.push(CoverageGoal::Branch(p, true));
            goals.push(CoverageGoal::Branch(p, false));
        }
        let owners: BTreeSet<&String> = dependence.predicate_owner.values().collect();
        for (qualname, _) in m.code_objects() {
            if !owners.contains(&qualname) {
                goals.push(CoverageGoal::Root(qualname));
            }
        }
        goals.sort();
        GoalSet { goals, dependence }
    }

    pub fn all(&self) -> &[CoverageGoal] {
        &self.goals
    }

    /// Branch and root goals.
    pub fn branch_goals(&self) -> Vec<CoverageGoal> {
        self.goals.iter().filter(|g| !g.is_line()).cloned().collect()
    }

    pub fn line_goals(&self) -> Vec<CoverageGoal> {
        self.goals.iter().filter(|g| g.is_line()).cloned().collect()
    }

    pub fn objectives(&self, criterion: Criterion) -> Vec<CoverageGoal> {
        match criterion {
            Criterion::Branch => self.branch_goals(),
            Criterion::Line => self.line_goals(),
            Criterion::Both => self.goals.clone(),
        }
    }

    pub fn dependence(&self) -> &ControlDependence {
        &self.dependence
    }

    /// The branch goal that must be covered before `goal` can be reached.
    pub fn parent(&self, goal: &CoverageGoal) -> Option<CoverageGoal> {
        let b = match goal {
            CoverageGoal::Line(l) => self.dependence.line_parent.get(l).copied().flatten(),
            CoverageGoal::Branch(p, _) => self.dependence.predicate_parent.get(p).copied().flatten(),
            CoverageGoal::Root(_) => None,
        };
        b.map(|(p, pol)| CoverageGoal::Branch(p, pol))
    }

    pub fn fitness(&self, goal: &CoverageGoal, trace: &ExecutionTrace) -> f64 {
        match goal {
            CoverageGoal::Root(q) => {
                if trace.calls_entered.contains(q) {
                    0.0
                } else {
                    1.0
                }
            }
            CoverageGoal::Branch(p, pol) => match trace.branch_results.get(p) {
                Some(d) => norm(d.distance(*pol)),
                None => approach(&self.dependence.predicate_ancestors(*p), trace),
            },
            CoverageGoal::Line(l) => {
                if trace.lines_hit.contains(l) {
                    0.0
                } else {
                    approach(&self.dependence.line_ancestors(*l), trace)
                }
            }
        }
    }

    /// Sum over `objectives` of the best fitness any trace achieves.
    pub fn suite_fitness<'t>(&self, objectives: &[CoverageGoal], traces: impl IntoIterator<Item = &'t ExecutionTrace> + Clone) -> f64 {
        let empty = ExecutionTrace::default();
        objectives
            .iter()
            .map(|g| {
                traces
                    .clone()
                    .into_iter()
                    .map(|t| self.fitness(g, t))
                    .fold(self.fitness(g, &empty), f64::min)
            })
            .sum()
    }
}

/// Fitness of a goal that was not reached: level of the nearest executed
/// ancestor plus its normalized distance, or one more than the chain
/// length when no ancestor ran.
fn approach(ancestors: &[BranchRef], trace: &ExecutionTrace) -> f64 {
    for (i, (p, pol)) in ancestors.iter().enumerate() {
        if let Some(d) = trace.branch_results.get(p) {
            return (i + 1) as f64 + norm(d.distance(*pol));
        }
    }
    ancestors.len() as f64 + 1.0
}

pub fn is_covered(goal: &CoverageGoal, trace: &ExecutionTrace) -> bool {
    match goal {
        CoverageGoal::Line(l) => trace.lines_hit.contains(l),
        CoverageGoal::Branch(p, pol) => trace.branch_taken(*p, *pol),
        CoverageGoal::Root(q) => trace.calls_entered.contains(q),
    }
}

/// Fraction of `goals` covered by at least one trace; 1.0 for no goals.
pub fn coverage<'t>(goals: &[CoverageGoal], traces: impl IntoIterator<Item = &'t ExecutionTrace> + Clone) -> f64 {
    if goals.is_empty() {
        return 1.0;
    }
    let covered = goals
        .iter()
        .filter(|g| traces.clone().into_iter().any(|t| is_covered(g, t)))
        .count();
    covered as f64 / goals.len() as f64
}

/// Covered goals of a single trace, for archive updates.
pub fn covered_goals<'g>(goals: &'g [CoverageGoal], trace: &ExecutionTrace) -> Vec<&'g CoverageGoal> {
    goals.iter().filter(|g| is_covered(g, trace)).collect()
}

/// Per-goal fitness of one trace.
pub fn fitness_vector(set: &GoalSet, goals: &[CoverageGoal], trace: &ExecutionTrace) -> BTreeMap<CoverageGoal, f64> {
    goals.iter().map(|g| (g.clone(), set.fitness(g, trace))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::BranchDistances;
    use crate::lang::parse_str;

    const NESTED: &str = "\
def f(a: int, b: int) -> int:
    if a > 0:
        if b == 3:
            return 1
        return 2
    return 3
";

    fn trace(branches: &[(u32, f64, f64)], lines: &[u32]) -> ExecutionTrace {
        let mut t = ExecutionTrace::default();
        for &(p, td, fd) in branches {
            t.record_branch(
                PredicateId(p),
                BranchDistances {
                    true_distance: td,
                    false_distance: fd,
                },
            );
        }
        t.lines_hit.extend(lines.iter().copied());
        t
    }

    #[test]
    fn goals_of_nested_module() {
        let set = GoalSet::for_module(&parse_str(NESTED).unwrap());
        assert_eq!(set.line_goals().len(), 5);
        assert_eq!(set.branch_goals().len(), 4);
        assert_eq!(
            set.parent(&CoverageGoal::Branch(PredicateId(1), true)),
            Some(CoverageGoal::Branch(PredicateId(0), true))
        );
        assert_eq!(set.parent(&CoverageGoal::Line(6)), None);
    }

    #[test]
    fn branch_fitness_examples() {
        let set = GoalSet::for_module(&parse_str(NESTED).unwrap());
        let t = trace(&[(0, 0.0, 5.0), (1, 4.0, 0.0)], &[2, 3, 5]);
        assert_eq!(set.fitness(&CoverageGoal::Branch(PredicateId(1), false), &t), 0.0);
        assert!((set.fitness(&CoverageGoal::Branch(PredicateId(1), true), &t) - 0.8).abs() < 1e-12);
        // inner predicate never reached: approach level 1 plus outer distance
        let t = trace(&[(0, 3.0, 0.0)], &[2, 6]);
        let f = set.fitness(&CoverageGoal::Branch(PredicateId(1), true), &t);
        assert!((f - 1.75).abs() < 1e-12);
        let none = ExecutionTrace::default();
        assert_eq!(set.fitness(&CoverageGoal::Branch(PredicateId(1), true), &none), 2.0);
        assert_eq!(set.fitness(&CoverageGoal::Line(4), &none), 3.0);
        assert_eq!(set.fitness(&CoverageGoal::Line(4), &t), 2.0 + norm(3.0));
    }

    #[test]
    fn root_goals_only_for_branchless_code() {
        let m = parse_str("def f(x):\n    return x\n\ndef g(x):\n    if x:\n        return 1\n    return 0\n").unwrap();
        let set = GoalSet::for_module(&m);
        let roots: Vec<_> = set.all().iter().filter(|g| matches!(g, CoverageGoal::Root(_))).collect();
        assert_eq!(roots, vec![&CoverageGoal::Root("f".into())]);
    }

    #[test]
    fn coverage_ratio() {
        let goals = vec![CoverageGoal::Line(1), CoverageGoal::Line(2), CoverageGoal::Line(3), CoverageGoal::Line(4)];
        let t = trace(&[], &[1, 2, 3]);
        assert_eq!(coverage(&goals, [&t]), 0.75);
        assert_eq!(coverage(&[], [&t]), 1.0);
        assert_eq!(coverage(&goals, std::iter::empty::<&ExecutionTrace>()), 0.0);
    }

    #[test]
    fn empty_suite_fitness_is_sum_of_maxima() {
        let set = GoalSet::for_module(&parse_str(NESTED).unwrap());
        let goals = set.branch_goals();
        let f = set.suite_fitness(&goals, std::iter::empty::<&ExecutionTrace>());
        assert_eq!(f, 1.0 + 1.0 + 2.0 + 2.0);
    }

    #[test]
    fn norm_is_bounded() {
        assert_eq!(norm(0.0), 0.0);
        assert_eq!(norm(4.0), 0.8);
        assert!(norm(f64::INFINITY) < 1.0);
        assert!(norm(1e300) < 1.0);
    }
}
