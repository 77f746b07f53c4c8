use rand::seq::SliceRandom;
use rand::Rng;

use super::{GenerationStrategy, SearchContext};
use crate::testcase::{TestCase, TestSuiteChromosome};

/// Feedback-directed random generation: sequences that ran without error
/// are extended by one call; failing ones go to an error pool and are
/// never extended.
#[derive(Debug, Default)]
pub struct FeedbackDirectedRandom {
    pool: Vec<TestCase>,
    errors: Vec<TestCase>,
}

/// Chance of starting a fresh sequence instead of extending one.
const FRESH_PROBABILITY: f64 = 0.1;

impl FeedbackDirectedRandom {
    pub fn error_pool(&self) -> &[TestCase] {
        &self.errors
    }

    fn next_candidate(&self, ctx: &mut SearchContext<'_>) -> TestCase {
        if self.pool.is_empty() || ctx.rng().gen_bool(FRESH_PROBABILITY) {
            return ctx.sample_test();
        }
        let mut t = self.pool.choose(ctx.rng()).unwrap().clone();
        let callables = &ctx.cluster().accessible_callables;
        let callable = callables.choose(&mut *ctx.rng()).unwrap().clone();
        if ctx.append_call(&mut t, &callable) {
            t
        } else {
            ctx.sample_test()
        }
    }
}

impl GenerationStrategy for FeedbackDirectedRandom {
    fn name(&self) -> &str {
        "RANDOM"
    }

    fn generate_tests(&mut self, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome {
        let limit = ctx.config.random_pool_size;
        loop {
            for _ in 0..ctx.config.batch_size {
                let t = self.next_candidate(ctx);
                if t.is_empty() {
                    continue;
                }
                let r = ctx.evaluate(&t);
                let target = if r.has_error() { &mut self.errors } else { &mut self.pool };
                if target.len() < limit {
                    target.push(t);
                } else {
                    let i = ctx.rng().gen_range(0..limit);
                    target[i] = t;
                }
            }
            ctx.end_iteration();
            if ctx.is_finished() {
                break;
            }
        }
        ctx.archive_suite()
    }
}

/// Samples one random test per iteration and keeps covering tests in the
/// archive.
#[derive(Debug, Default)]
pub struct RandomTestCaseSearch;

impl GenerationStrategy for RandomTestCaseSearch {
    fn name(&self) -> &str {
        "RANDOM_TEST_CASE_SEARCH"
    }

    fn generate_tests(&mut self, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome {
        loop {
            let t = ctx.sample_test();
            ctx.evaluate(&t);
            ctx.end_iteration();
            if ctx.is_finished() || ctx.archive_covers_all() {
                break;
            }
        }
        ctx.archive_suite()
    }
}
