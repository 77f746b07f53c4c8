//! Test generation algorithms and the registry that names them.

mod archive;
mod context;
mod mio;
mod mosa;
mod random;
mod whole_suite;

use std::collections::BTreeMap;

pub use archive::Archive;
pub use context::{
    Clock, IterationStats, SearchConfig, SearchContext, SearchObserver, StoppingCondition, LOGICAL_EXECUTIONS_PER_SECOND,
};
pub use mio::{mio_schedule, Mio};
pub use mosa::{current_targets, rank_and_crowd, Mosa};
pub use random::{FeedbackDirectedRandom, RandomTestCaseSearch};
pub use whole_suite::{rank_select, WholeSuite};

use crate::testcase::TestSuiteChromosome;

/// A test generation algorithm. Implementations draw randomness only from
/// `ctx.rng()`, report each finished iteration with `ctx.end_iteration()`
/// and stop once `ctx.is_finished()`.
pub trait GenerationStrategy {
    fn name(&self) -> &str;
    fn generate_tests(&mut self, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome;
}

pub type StrategyFactory = Box<dyn Fn() -> Box<dyn GenerationStrategy> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("algorithm {0} is already registered")]
    DuplicateName(String),
    #[error("unknown algorithm {name}; valid names: {}", known.join(", "))]
    UnknownName { name: String, known: Vec<String> },
}

/// Name → constructor map used to resolve `--algorithm`.
pub struct StrategyRegistry {
    factories: BTreeMap<String, StrategyFactory>,
}

pub const RANDOM: &str = "RANDOM";
pub const RANDOM_TEST_CASE_SEARCH: &str = "RANDOM_TEST_CASE_SEARCH";
pub const MOSA: &str = "MOSA";
pub const DYNAMOSA: &str = "DYNAMOSA";
pub const MIO: &str = "MIO";
pub const WHOLE_SUITE: &str = "WHOLE_SUITE";
pub const WHOLE_SUITE_ARCHIVE: &str = "WHOLE_SUITE_ARCHIVE";

/// Names of the built-in algorithms in registration order.
pub const BUILTIN_ALGORITHMS: [&str; 7] = [
    RANDOM,
    RANDOM_TEST_CASE_SEARCH,
    MOSA,
    DYNAMOSA,
    MIO,
    WHOLE_SUITE,
    WHOLE_SUITE_ARCHIVE,
];

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// All built-in algorithms.
    pub fn with_builtins() -> Self {
        let mut r = StrategyRegistry::empty();
        let builtins: [(&str, StrategyFactory); 7] = [
            (RANDOM, Box::new(|| Box::new(FeedbackDirectedRandom::default()))),
            (RANDOM_TEST_CASE_SEARCH, Box::new(|| Box::new(RandomTestCaseSearch))),
            (MOSA, Box::new(|| Box::new(Mosa::mosa()))),
            (DYNAMOSA, Box::new(|| Box::new(Mosa::dynamosa()))),
            (MIO, Box::new(|| Box::new(Mio::default()))),
            (WHOLE_SUITE, Box::new(|| Box::new(WholeSuite::plain()))),
            (WHOLE_SUITE_ARCHIVE, Box::new(|| Box::new(WholeSuite::with_archive()))),
        ];
        for (name, f) in builtins {
            r.register(name, f).expect("built-in names are unique");
        }
        r
    }

    pub fn register(&mut self, name: &str, factory: StrategyFactory) -> Result<(), RegistryError> {
        if self.factories.contains_key(name) {
            return Err(RegistryError::DuplicateName(name.to_string()));
        }
        self.factories.insert(name.to_string(), factory);
        Ok(())
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn GenerationStrategy>, RegistryError> {
        match self.factories.get(name) {
            Some(f) => Ok(f()),
            None => Err(RegistryError::UnknownName {
                name: name.to_string(),
                known: self.names(),
            }),
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.factories.keys().cloned().collect()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        StrategyRegistry::with_builtins()
    }
}

/// Runs `strategy` in `ctx`. A module without callables yields an empty
/// suite after one iteration.
pub fn run_strategy(strategy: &mut dyn GenerationStrategy, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome {
    if ctx.cluster().accessible_callables.is_empty() {
        ctx.end_iteration();
        return TestSuiteChromosome::default();
    }
    log::info!("running {}", strategy.name());
    strategy.generate_tests(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_and_errors() {
        let mut r = StrategyRegistry::with_builtins();
        assert_eq!(r.create("DYNAMOSA").unwrap().name(), "DYNAMOSA");
        assert_eq!(r.names().len(), 7);
        match r.create("NOPE") {
            Err(RegistryError::UnknownName { known, .. }) => assert!(known.contains(&"MIO".to_string())),
            _ => panic!("expected UnknownName"),
        }
        let e = r.register("MIO", Box::new(|| Box::new(Mio::default()))).unwrap_err();
        assert_eq!(e, RegistryError::DuplicateName("MIO".into()));
    }
}
