//! Module analysis: loads the module under test together with the context
//! modules it reaches through `use`, and builds the test cluster of callables
//! and constructible types.

mod cluster;
mod project;

pub use cluster::{
    build_test_cluster, build_test_cluster_with, candidates_for_type, CallableKind, ClassType, GenericCallable,
    NoTypeInference, Origin, ParamInfo, TestCluster, TypeEntry, TypeInferenceProvider, TypeInfo,
};
pub use project::{Binding, LoadError, Project};
