use std::collections::{BTreeMap, BTreeSet};

use super::value::RuntimeError;
use crate::lang::{LineNo, PredicateId};
use crate::testcase::{ObservationPath, Snapshot};

/// Closest approach to each side of one predicate within an execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDistances {
    pub true_distance: f64,
    pub false_distance: f64,
}

impl BranchDistances {
    pub fn distance(&self, polarity: bool) -> f64 {
        if polarity {
            self.true_distance
        } else {
            self.false_distance
        }
    }

    pub fn merge(&mut self, other: BranchDistances) {
        self.true_distance = self.true_distance.min(other.true_distance);
        self.false_distance = self.false_distance.min(other.false_distance);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObservationKind {
    ReturnValue,
    ObjectAttribute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Statement after which the value was captured.
    pub statement: usize,
    pub kind: ObservationKind,
    pub path: ObservationPath,
    pub value: Snapshot,
}

/// What one execution did inside the traced module.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionTrace {
    pub lines_hit: BTreeSet<LineNo>,
    pub branch_results: BTreeMap<PredicateId, BranchDistances>,
    /// Qualified names of entered code objects (`f`, `Class.method`).
    pub calls_entered: BTreeSet<String>,
    pub observations: Vec<Observation>,
}

impl ExecutionTrace {
    pub fn record_branch(&mut self, p: PredicateId, d: BranchDistances) {
        self.branch_results.entry(p).and_modify(|e| e.merge(d)).or_insert(d);
    }

    /// Union of coverage data (observations are not merged).
    pub fn merge(&mut self, other: &ExecutionTrace) {
        self.lines_hit.extend(other.lines_hit.iter().copied());
        for (p, d) in &other.branch_results {
            self.record_branch(*p, *d);
        }
        self.calls_entered.extend(other.calls_entered.iter().cloned());
    }

    pub fn branch_taken(&self, p: PredicateId, polarity: bool) -> bool {
        self.branch_results.get(&p).is_some_and(|d| d.distance(polarity) == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Ok,
    Error(RuntimeError),
    BudgetExhausted,
}

/// Event appended by the plain (uninstrumented) execution mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TraceEvent {
    Line(LineNo),
    Branch(PredicateId, bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    /// Conditions are evaluated with branch distances.
    #[default]
    Instrumented,
    /// Conditions are evaluated with the ordinary evaluator; executed lines
    /// and branch outcomes are appended to an event log.
    PlainLogging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_steps: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionResult {
    pub trace: ExecutionTrace,
    /// One entry per executed statement; execution stops at the first
    /// non-`Ok` outcome.
    pub outcomes: Vec<Outcome>,
    pub steps: u64,
    /// Runtime type name of each defined variable, for executed statements.
    pub runtime_types: Vec<String>,
    /// Only filled in [`TraceMode::PlainLogging`].
    pub events: Vec<TraceEvent>,
}

impl ExecutionResult {
    /// Index and outcome of the statement that stopped the execution.
    pub fn failure(&self) -> Option<(usize, &Outcome)> {
        match self.outcomes.last() {
            Some(o) if *o != Outcome::Ok => Some((self.outcomes.len() - 1, o)),
            _ => None,
        }
    }

    pub fn has_error(&self) -> bool {
        self.failure().is_some()
    }

    pub fn error(&self) -> Option<(usize, &RuntimeError)> {
        match self.failure() {
            Some((i, Outcome::Error(e))) => Some((i, e)),
            _ => None,
        }
    }

    pub fn budget_exhausted(&self) -> bool {
        matches!(self.outcomes.last(), Some(Outcome::BudgetExhausted))
    }
}
