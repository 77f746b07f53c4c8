use testgen_core::search::{GenerationStrategy, SearchContext, StrategyRegistry};
use testgen_core::testcase::TestSuiteChromosome;

pub const NAME: &str = "FIXTURE_RANDOM_SAMPLING";

/// Draws one random test per iteration; the context keeps every test that
/// covers a new goal in the archive and notifies the observers.
pub struct FixtureRandomSampling;

impl GenerationStrategy for FixtureRandomSampling {
    fn name(&self) -> &str {
        NAME
    }

    fn generate_tests(&mut self, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome {
        while !ctx.is_finished() && !ctx.archive_covers_all() {
            let test = ctx.sample_test();
            ctx.evaluate(&test);
            ctx.end_iteration();
        }
        ctx.archive_suite()
    }
}

pub fn register(registry: &mut StrategyRegistry) {
    registry
        .register(NAME, Box::new(|| Box::new(FixtureRandomSampling)))
        .expect("fixture name is free");
}
