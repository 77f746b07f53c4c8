use std::cmp::Ordering;
use std::sync::Arc;

use rand::Rng;

use super::{GenerationStrategy, SearchContext};
use crate::fitness::CoverageGoal;
use crate::interp::ExecutionTrace;
use crate::testcase::{TestCase, TestSuiteChromosome};

#[derive(Debug, Clone)]
struct Suite {
    tests: Vec<Arc<(TestCase, ExecutionTrace)>>,
    fitness: f64,
}

impl Suite {
    fn length(&self) -> usize {
        self.tests.iter().map(|e| e.0.len()).sum()
    }
}

/// Genetic algorithm over whole suites, minimizing the summed per-goal
/// fitness. With the archive, covered goals leave the fitness, added tests
/// are often mutated archive entries and the result is the archive; without
/// it the best suite is returned.
#[derive(Debug, Clone, Copy)]
pub struct WholeSuite {
    use_archive: bool,
}

impl WholeSuite {
    pub fn plain() -> Self {
        WholeSuite { use_archive: false }
    }

    pub fn with_archive() -> Self {
        WholeSuite { use_archive: true }
    }

    fn targets(&self, ctx: &SearchContext<'_>) -> Vec<CoverageGoal> {
        if self.use_archive {
            ctx.uncovered()
        } else {
            ctx.objectives().to_vec()
        }
    }

    fn score(ctx: &SearchContext<'_>, suite: &mut Suite, targets: &[CoverageGoal]) {
        suite.fitness = ctx.goals().suite_fitness(targets, suite.tests.iter().map(|e| &e.1));
    }
}

/// Index into a population sorted best first, biased towards the front.
pub fn rank_select<R: Rng + ?Sized>(rng: &mut R, len: usize, bias: f64) -> usize {
    let r: f64 = rng.gen_range(0.0..1.0);
    let x = (bias - (bias * bias - 4.0 * (bias - 1.0) * r).sqrt()) / 2.0 / (bias - 1.0);
    ((len as f64 * x) as usize).min(len - 1)
}

fn ordering(a: &Suite, b: &Suite) -> Ordering {
    a.fitness
        .partial_cmp(&b.fitness)
        .unwrap_or(Ordering::Equal)
        .then(a.length().cmp(&b.length()))
}

impl WholeSuite {
    fn evaluated(ctx: &mut SearchContext<'_>, t: TestCase) -> Arc<(TestCase, ExecutionTrace)> {
        let trace = ctx.evaluate(&t).trace;
        Arc::new((t, trace))
    }

    fn random_suite(ctx: &mut SearchContext<'_>) -> Suite {
        let most = ctx.config.ws_initial_tests.max(1);
        let n = ctx.rng().gen_range(1..=most);
        let tests = (0..n)
            .map(|_| {
                let t = ctx.sample_test();
                WholeSuite::evaluated(ctx, t)
            })
            .collect();
        Suite {
            tests,
            fitness: f64::INFINITY,
        }
    }

    fn new_test(&self, ctx: &mut SearchContext<'_>) -> TestCase {
        if self.use_archive && !ctx.archive().is_empty() {
            let p = ctx.config.ws_archive_reuse.clamp(0.0, 1.0);
            if ctx.rng().gen_bool(p) {
                let n = ctx.archive().tests().len();
                let i = ctx.rng().gen_range(0..n);
                let parent = ctx.archive().tests()[i].clone();
                return ctx.mutate_test(&parent);
            }
        }
        ctx.sample_test()
    }

    fn mutate(&self, ctx: &mut SearchContext<'_>, suite: &mut Suite) {
        let p = 1.0 / suite.tests.len().max(1) as f64;
        for i in 0..suite.tests.len() {
            if ctx.rng().gen_bool(p) {
                let m = ctx.mutate_test(&suite.tests[i].0);
                suite.tests[i] = WholeSuite::evaluated(ctx, m);
            }
        }
        suite.tests.retain(|e| !e.0.is_empty());
        if suite.tests.len() < ctx.config.ws_max_tests && ctx.rng().gen_bool(1.0 / 3.0) {
            let t = self.new_test(ctx);
            suite.tests.push(WholeSuite::evaluated(ctx, t));
        }
    }

    fn report(ctx: &mut SearchContext<'_>, best: &Suite) {
        ctx.report_solution(best.tests.iter().map(|e| &e.1));
    }
}

impl GenerationStrategy for WholeSuite {
    fn name(&self) -> &str {
        if self.use_archive {
            "WHOLE_SUITE_ARCHIVE"
        } else {
            "WHOLE_SUITE"
        }
    }

    fn generate_tests(&mut self, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome {
        let size = ctx.config.population.max(2);
        let mut population: Vec<Suite> = (0..size).map(|_| WholeSuite::random_suite(ctx)).collect();
        let targets = self.targets(ctx);
        for s in &mut population {
            WholeSuite::score(ctx, s, &targets);
        }
        population.sort_by(ordering);
        if !self.use_archive {
            WholeSuite::report(ctx, &population[0]);
        }
        ctx.end_iteration();

        while !ctx.is_finished() {
            let bias = ctx.config.ws_rank_bias;
            let rate = ctx.config.crossover_rate;
            let mut next = vec![population[0].clone()];
            while next.len() < size {
                let a = rank_select(ctx.rng(), population.len(), bias);
                let b = rank_select(ctx.rng(), population.len(), bias);
                let (mut c1, mut c2) = (population[a].clone(), population[b].clone());
                if ctx.rng().gen_bool(rate) {
                    let r = ctx.rng().gen_range(0.0..=1.0);
                    let (t1, t2) = crate::testcase::splice_lists(&c1.tests, &c2.tests, r);
                    c1.tests = t1;
                    c2.tests = t2;
                }
                for mut child in [c1, c2] {
                    if next.len() < size {
                        self.mutate(ctx, &mut child);
                        next.push(child);
                    }
                }
            }
            let targets = self.targets(ctx);
            for s in &mut next {
                WholeSuite::score(ctx, s, &targets);
            }
            next.sort_by(ordering);
            population = next;
            if !self.use_archive {
                WholeSuite::report(ctx, &population[0]);
            }
            ctx.end_iteration();
        }

        if self.use_archive {
            ctx.archive_suite()
        } else {
            let best = population.swap_remove(0);
            TestSuiteChromosome::new(best.tests.into_iter().map(|e| e.0.clone()).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_selection_favours_the_front() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 10];
        for _ in 0..20_000 {
            counts[rank_select(&mut rng, 10, 1.7)] += 1;
        }
        assert!(counts[0] > counts[9] * 2);
        assert!(counts.iter().all(|&c| c > 0));
    }
}
