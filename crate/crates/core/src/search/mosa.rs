use std::cmp::Ordering;

use rand::Rng;

use super::{GenerationStrategy, SearchContext};
use crate::fitness::CoverageGoal;
use crate::interp::ExecutionTrace;
use crate::testcase::{crossover_tests, TestCase, TestSuiteChromosome};

#[derive(Debug, Clone)]
struct Individual {
    test: TestCase,
    trace: ExecutionTrace,
}

/// Many-objective search over single tests. With `dynamic`, only goals
/// whose control-dependency parent is already covered are targeted.
#[derive(Debug, Clone, Copy)]
pub struct Mosa {
    dynamic: bool,
}

impl Mosa {
    pub fn mosa() -> Self {
        Mosa { dynamic: false }
    }

    pub fn dynamosa() -> Self {
        Mosa { dynamic: true }
    }
}

/// Goals the next generation is ranked on.
pub fn current_targets(ctx: &SearchContext<'_>, dynamic: bool) -> Vec<CoverageGoal> {
    let archive = ctx.archive();
    ctx.objectives()
        .iter()
        .filter(|g| !archive.covers(g))
        .filter(|g| !dynamic || ctx.goals().parent(g).is_none_or(|p| archive.covers(&p)))
        .cloned()
        .collect()
}

/// Front index and crowding distance of every individual.
pub fn rank_and_crowd(fitness: &[Vec<f64>], lengths: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let n = fitness.len();
    let mut rank = vec![usize::MAX; n];
    let goals = fitness.first().map_or(0, Vec::len);
    if goals == 0 {
        return (vec![0; n], vec![f64::INFINITY; n]);
    }

    // preference criterion: the best test for each goal forms front 0
    for k in 0..goals {
        let best = (0..n)
            .min_by(|&a, &b| {
                fitness[a][k]
                    .partial_cmp(&fitness[b][k])
                    .unwrap_or(Ordering::Equal)
                    .then(lengths[a].cmp(&lengths[b]))
            })
            .unwrap();
        rank[best] = 0;
    }

    let rest: Vec<usize> = (0..n).filter(|&i| rank[i] != 0).collect();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, &i) in rest.iter().enumerate() {
        for &j in &rest[x + 1..] {
            if dominates(&fitness[i], &fitness[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&fitness[j], &fitness[i]) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut current: Vec<usize> = rest.iter().copied().filter(|&i| dominated_by[i] == 0).collect();
    let mut front = 1;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = front;
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        front += 1;
    }

    let mut crowd = vec![0.0; n];
    for f in 0..front {
        let members: Vec<usize> = (0..n).filter(|&i| rank[i] == f).collect();
        crowding(&members, fitness, &mut crowd);
    }
    (rank, crowd)
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn crowding(members: &[usize], fitness: &[Vec<f64>], crowd: &mut [f64]) {
    if members.len() <= 2 {
        for &i in members {
            crowd[i] = f64::INFINITY;
        }
        return;
    }
    let goals = fitness[members[0]].len();
    let mut order = members.to_vec();
    for k in 0..goals {
        order.sort_by(|&a, &b| fitness[a][k].partial_cmp(&fitness[b][k]).unwrap_or(Ordering::Equal));
        let lo = fitness[order[0]][k];
        let hi = fitness[*order.last().unwrap()][k];
        crowd[order[0]] = f64::INFINITY;
        crowd[*order.last().unwrap()] = f64::INFINITY;
        if hi > lo {
            for w in 1..order.len() - 1 {
                crowd[order[w]] += (fitness[order[w + 1]][k] - fitness[order[w - 1]][k]) / (hi - lo);
            }
        }
    }
}

fn better(a: usize, b: usize, rank: &[usize], crowd: &[f64]) -> bool {
    rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b])
}

fn tournament<R: Rng>(rng: &mut R, size: usize, rank: &[usize], crowd: &[f64]) -> usize {
    let mut best = rng.gen_range(0..rank.len());
    for _ in 1..size {
        let c = rng.gen_range(0..rank.len());
        if better(c, best, rank, crowd) {
            best = c;
        }
    }
    best
}

fn fitness_matrix(ctx: &SearchContext<'_>, pop: &[Individual], targets: &[CoverageGoal]) -> Vec<Vec<f64>> {
    pop.iter()
        .map(|ind| targets.iter().map(|g| ctx.fitness(g, &ind.trace)).collect())
        .collect()
}

impl Mosa {
    fn evaluate(ctx: &mut SearchContext<'_>, test: TestCase) -> Individual {
        let trace = ctx.evaluate(&test).trace;
        Individual { test, trace }
    }
}

impl GenerationStrategy for Mosa {
    fn name(&self) -> &str {
        if self.dynamic {
            "DYNAMOSA"
        } else {
            "MOSA"
        }
    }

    fn generate_tests(&mut self, ctx: &mut SearchContext<'_>) -> TestSuiteChromosome {
        let size = ctx.config.population.max(1);
        let mut population: Vec<Individual> = (0..size)
            .map(|_| {
                let t = ctx.sample_test();
                Mosa::evaluate(ctx, t)
            })
            .collect();
        ctx.end_iteration();

        while !ctx.is_finished() {
            let targets = current_targets(ctx, self.dynamic);
            let lengths: Vec<usize> = population.iter().map(|i| i.test.len()).collect();
            let (rank, crowd) = rank_and_crowd(&fitness_matrix(ctx, &population, &targets), &lengths);

            let mut offspring = Vec::with_capacity(size);
            while offspring.len() < size {
                let k = ctx.config.tournament_size;
                let a = tournament(ctx.rng(), k, &rank, &crowd);
                let b = tournament(ctx.rng(), k, &rank, &crowd);
                let rate = ctx.config.crossover_rate;
                let (c1, c2) = if ctx.rng().gen_bool(rate) {
                    let r = ctx.rng().gen_range(0.0..=1.0);
                    let max_len = ctx.config.factory.max_length;
                    crossover_tests(&population[a].test, &population[b].test, r, max_len, ctx.rng())
                } else {
                    (population[a].test.clone(), population[b].test.clone())
                };
                for child in [c1, c2] {
                    if offspring.len() < size {
                        let m = ctx.mutate_test(&child);
                        offspring.push(Mosa::evaluate(ctx, m));
                    }
                }
            }

            population.extend(offspring);
            let targets = current_targets(ctx, self.dynamic);
            let lengths: Vec<usize> = population.iter().map(|i| i.test.len()).collect();
            let (rank, crowd) = rank_and_crowd(&fitness_matrix(ctx, &population, &targets), &lengths);
            let mut order: Vec<usize> = (0..population.len()).collect();
            order.sort_by(|&a, &b| {
                rank[a]
                    .cmp(&rank[b])
                    .then(crowd[b].partial_cmp(&crowd[a]).unwrap_or(Ordering::Equal))
                    .then(a.cmp(&b))
            });
            order.truncate(size);
            let mut slots: Vec<Option<Individual>> = population.into_iter().map(Some).collect();
            population = order.into_iter().map(|i| slots[i].take().unwrap()).collect();
            ctx.end_iteration();
        }
        ctx.archive_suite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_individual_is_rank_zero() {
        let (rank, _) = rank_and_crowd(&[vec![0.5, 0.9]], &[3]);
        assert_eq!(rank, vec![0]);
    }

    #[test]
    fn preference_criterion_prefers_closest_test() {
        let fitness = vec![vec![0.9, 0.5], vec![0.1, 0.6], vec![0.2, 0.7]];
        let (rank, _) = rank_and_crowd(&fitness, &[1, 1, 1]);
        assert_eq!(rank[1], 0);
        assert_eq!(rank[0], 0);
        assert!(rank[2] > 0);
    }

    #[test]
    fn ties_go_to_the_shorter_test() {
        let fitness = vec![vec![0.5], vec![0.5]];
        let (rank, _) = rank_and_crowd(&fitness, &[4, 2]);
        assert_eq!(rank, vec![1, 0]);
    }

    #[test]
    fn dominated_tests_sink() {
        let fitness = vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![0.6, 0.4], vec![0.9, 0.9]];
        let (rank, _) = rank_and_crowd(&fitness, &[1, 1, 1, 1]);
        assert_eq!(rank[0], 0);
        assert_eq!(rank[1], 1);
        assert_eq!(rank[2], 1);
        assert_eq!(rank[3], 2);
    }
}
