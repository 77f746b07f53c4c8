//! Tree-walking interpreter for MiniDyn with branch-distance tracing.

mod distance;
mod eval;
mod exec;
mod program;
mod trace;
mod value;

pub use distance::{compare, compare_distance, truthiness_distance, BranchEval, K};
pub use eval::{MAX_ALLOCATION, MAX_CALL_DEPTH, MAX_SEQUENCE_LENGTH};
pub use exec::{execute_test, run_function};
pub use program::{ClassId, FuncId, Program};
pub use trace::{
    BranchDistances, Budget, ExecutionResult, ExecutionTrace, Observation, ObservationKind, Outcome, TraceEvent, TraceMode,
};
pub use value::{ErrorKind, RuntimeError, Value};
