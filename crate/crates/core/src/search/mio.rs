use std::collections::BTreeMap;

use rand::Rng;

use super::{GenerationStrategy, SearchContext};
use crate::fitness::CoverageGoal;
use crate::testcase::{TestCase, TestSuiteChromosome};

#[derive(Debug, Default)]
struct Bucket {
    /// Tests with their fitness for this goal, best first.
    tests: Vec<(f64, TestCase)>,
    /// Times the goal was picked since its best fitness last improved.
    counter: u64,
}

/// One population per uncovered goal. Sampling probability and bucket
/// size shrink linearly until the focused phase, where only the best test
/// of each goal is mutated.
#[derive(Debug, Default)]
pub struct Mio {
    buckets: BTreeMap<CoverageGoal, Bucket>,
}

/// Bucket size and random sampling probability at `progress` ∈ [0, 1].
pub fn mio_schedule(n0: usize, pr0: f64, focus: f64, progress: f64) -> (usize, f64) {
    if progress >= focus || focus <= 0.0 {
        return (1, 0.0);
    }
    let t = progress / focus;
    let n = (n0 as f64 - (n0 as f64 - 1.0) * t).round().max(1.0) as usize;
    (n, pr0 * (1.0 - t))
}

impl Mio {
    pub fn largest_bucket(&self) -> usize {
        self.buckets.values().map(|b| b.tests.len()).max().unwrap_or(0)
    }

    fn pick_parent(&mut self, ctx: &mut SearchContext<'_>) -> Option<TestCase> {
        let goal = self
            .buckets
            .iter()
            .filter(|(g, b)| !b.tests.is_empty() && !ctx.archive().covers(g))
            .min_by_key(|(_, b)| b.counter)
            .map(|(g, _)| g.clone())?;
        let bucket = self.buckets.get_mut(&goal).unwrap();
        bucket.counter += 1;
        let i = ctx.rng().gen_range(0..bucket.tests.len());
        Some(bucket.tests[i].1.clone())
    }

    fn record(&mut self, ctx: &SearchContext<'_>, test: &TestCase, trace: &crate::interp::ExecutionTrace, n: usize) {
        for g in ctx.objectives() {
            if ctx.archive().covers(g) {
                self.buckets.remove(g);
                continue;
            }
            let h = ctx.fitness(g, trace);
            let b = self.buckets.entry(g.clone()).or_default();
            let best = b.tests.first().map_or(f64::INFINITY, |t| t.0);
            if h < best {
                b.counter = 0;
            }
            let full = b.tests.len() >= n;
            let worst = b.tests.last().map_or(f64::INFINITY, |t| t.0);
            if !full || h < worst {
                let pos = b.tests.partition_point(|(f, t)| *f < h || (*f == h && t.len() <= test.len()));
                b.tests.insert(pos, (h, test.clone()));
                b.tests.truncate(n);
            }
        }
    }
}

impl GenerationStrategy for Mio {
    fn name(&self) -> &str {
        "MIO"
    }

    fn generate_tests(&mut self, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome {
        self.buckets.clear();
        loop {
            for _ in 0..ctx.config.batch_size {
                let (n, pr) = mio_schedule(
                    ctx.config.mio_bucket_size,
                    ctx.config.mio_random_probability,
                    ctx.config.mio_focus,
                    ctx.progress(),
                );
                for b in self.buckets.values_mut() {
                    b.tests.truncate(n);
                }
                let sample = ctx.rng().gen_bool(pr.clamp(0.0, 1.0));
                let test = match if sample { None } else { self.pick_parent(ctx) } {
                    Some(parent) => ctx.mutate_test(&parent),
                    None => ctx.sample_test(),
                };
                let trace = ctx.evaluate(&test).trace;
                self.record(ctx, &test, &trace, n);
            }
            ctx.end_iteration();
            if ctx.is_finished() {
                break;
            }
        }
        ctx.archive_suite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_endpoints() {
        assert_eq!(mio_schedule(10, 0.5, 0.5, 0.0), (10, 0.5));
        assert_eq!(mio_schedule(10, 0.5, 0.5, 0.5), (1, 0.0));
        assert_eq!(mio_schedule(10, 0.5, 0.5, 0.9), (1, 0.0));
        let (n, pr) = mio_schedule(10, 0.5, 0.5, 0.25);
        assert!((n == 5 || n == 6) && (pr - 0.25).abs() < 1e-12);
    }
}
