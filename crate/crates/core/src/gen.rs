//! Seeded random instances for the property suites, the falsifier and the
//! CLI self-check.
//!
//! Everything is driven by [`ChaCha8Rng`] so that a `(seed, stream)` pair
//! reproduces the same instance on every platform.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::integration::Integrand;
use crate::interval::{Cdf, StepMap};
use crate::monad::{BiIntegrand, KleisliMap, ProductSpace};
use crate::poset::{FinitePoset, MonotoneMap, PosetRef};
use crate::rational::{q, Q};
use crate::valuation::{dirac_at, SimpleValuation};

/// Denominator of generated weights.
pub const WEIGHT_GRID: i64 = 64;
/// Denominator of generated integrand values.
pub const VALUE_GRID: i64 = 12;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A poset with between `min` and `max` elements named `{name}0, {name}1…`.
///
/// Covers are proposed at random; a proposal closing a cycle is skipped,
/// which keeps the relation acyclic without rejection sampling.
pub fn random_poset(rng: &mut ChaCha8Rng, name: &str, min: usize, max: usize) -> FinitePoset {
    let n = rng.gen_range(min.max(1)..=max.max(min.max(1)));
    let prefix = name.to_lowercase();
    let ids: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let attempts = rng.gen_range(0..=n * n.saturating_sub(1) / 2);
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    let mut covers: Vec<(String, String)> = Vec::new();
    for _ in 0..attempts {
        let lo = rng.gen_range(0..n);
        let hi = rng.gen_range(0..n);
        if reach[hi][lo] || reach[lo][hi] {
            continue;
        }
        covers.push((ids[lo].clone(), ids[hi].clone()));
        let below: Vec<usize> = (0..n).filter(|&a| reach[a][lo]).collect();
        let above: Vec<usize> = (0..n).filter(|&b| reach[hi][b]).collect();
        for &a in &below {
            for &b in &above {
                reach[a][b] = true;
            }
        }
    }
    FinitePoset::build::<String>(name, &ids, &covers).expect("generated covers are acyclic")
}

/// `Σ (kᵢ/64) δ_{xᵢ}` on a random subset of atoms with `Σ kᵢ ≤ 64`. Half of
/// the draws use the full budget, so probability valuations are common.
pub fn random_valuation(rng: &mut ChaCha8Rng, poset: &PosetRef) -> SimpleValuation {
    let mut support: Vec<usize> = (0..poset.len()).collect();
    support.shuffle(rng);
    support.truncate(rng.gen_range(0..=poset.len()));
    let budget = if rng.gen_bool(0.5) { WEIGHT_GRID } else { rng.gen_range(0..=WEIGHT_GRID) };
    let weights = split_budget(rng, budget, support.len());
    SimpleValuation::from_indexed(poset, support.into_iter().zip(weights).map(|(i, k)| (i, q(k, WEIGHT_GRID))))
        .expect("weights sum to at most one")
}

fn split_budget(rng: &mut ChaCha8Rng, budget: i64, parts: usize) -> Vec<i64> {
    if parts == 0 {
        return Vec::new();
    }
    let mut cuts: Vec<i64> = (0..parts - 1).map(|_| rng.gen_range(0..=budget)).collect();
    cuts.push(0);
    cuts.push(budget);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Grid values `k/grid` made monotone by taking, at each element, the
/// maximum seed over its down-set.
fn monotone_completion(rng: &mut ChaCha8Rng, poset: &FinitePoset, grid: i64) -> Vec<Q> {
    let seeds: Vec<i64> = (0..poset.len()).map(|_| rng.gen_range(0..=grid)).collect();
    (0..poset.len())
        .map(|x| {
            let top = poset.down_set(x).ones().map(|y| seeds[y]).max().unwrap_or(0);
            q(top, grid)
        })
        .collect()
}

pub fn random_integrand(rng: &mut ChaCha8Rng, poset: &PosetRef) -> Integrand {
    let values = monotone_completion(rng, poset, VALUE_GRID);
    Integrand::new(poset, values).expect("monotone completion is monotone")
}

pub fn random_bi_integrand(rng: &mut ChaCha8Rng, space: &ProductSpace) -> BiIntegrand {
    let joint = random_integrand(rng, space.poset());
    BiIntegrand::from_joint(space, joint).expect("generated on the product poset")
}

/// A random monotone map, assigned along a linear extension. Each element
/// picks an image above the images of everything below it; when those
/// images have no common upper bound the draw restarts, and after a few
/// failures a constant map is returned.
pub fn random_monotone_map(rng: &mut ChaCha8Rng, source: &PosetRef, target: &PosetRef) -> MonotoneMap {
    let order = source.linear_extension();
    'attempt: for _ in 0..8 {
        let mut table = vec![usize::MAX; source.len()];
        for &x in &order {
            let candidates: Vec<usize> = (0..target.len())
                .filter(|&c| {
                    source
                        .down_set(x)
                        .ones()
                        .filter(|&y| y != x)
                        .all(|y| target.leq(table[y], c))
                })
                .collect();
            match candidates.choose(rng) {
                Some(&c) => table[x] = c,
                None => continue 'attempt,
            }
        }
        return MonotoneMap::new(source, target, table).expect("built monotone");
    }
    MonotoneMap::constant(source, target, rng.gen_range(0..target.len()))
}

/// A random Scott-continuous `f: C → V D` of the form
/// `f(x) = a·δ_{g(x)} + Σ_{y ≤ x} c_y ρ_y` with `g` monotone. Enlarging the
/// down-set only adds mass and `g` only moves mass upward, so the result is
/// monotone in the stochastic order.
pub fn random_kleisli_map(rng: &mut ChaCha8Rng, source: &PosetRef, target: &PosetRef) -> Result<KleisliMap> {
    let g = random_monotone_map(rng, source, target);
    let dirac_share = q(rng.gen_range(0..=WEIGHT_GRID), WEIGHT_GRID);
    let rest = Q::from_integer(1.into()) - &dirac_share;
    let bumps: Vec<SimpleValuation> = (0..source.len()).map(|_| random_valuation(rng, target)).collect();
    let tickets: Vec<i64> = (0..source.len()).map(|_| rng.gen_range(0..=4)).collect();
    let pool = tickets.iter().sum::<i64>().max(1);
    let table = (0..source.len())
        .map(|x| {
            let base = dirac_at(target, g.apply(x));
            let mut parts = vec![(dirac_share.clone(), &base)];
            for y in source.down_set(x).ones() {
                parts.push((&rest * q(tickets[y], pool), &bumps[y]));
            }
            SimpleValuation::mixture(target, parts)
        })
        .collect::<Result<Vec<_>>>()?;
    KleisliMap::new(source, target, table)
}

/// A piecewise-linear CDF with a few rational breakpoints, occasional jumps
/// (atoms) and possibly some missing mass.
pub fn random_cdf(rng: &mut ChaCha8Rng, name: &str) -> Cdf {
    let inner: usize = rng.gen_range(0..=4);
    let mut xs: Vec<Q> = (0..inner).map(|_| q(rng.gen_range(1..=23), 24)).collect();
    xs.push(q(0, 1));
    xs.push(q(1, 1));
    xs.sort();
    xs.dedup();
    let total = if rng.gen_bool(0.6) { 48 } else { rng.gen_range(0..=48) };
    // Two increments per breakpoint: the continuous rise before it (none
    // before 0) and the jump at it.
    let mut increments = split_budget(rng, total, 2 * xs.len());
    increments[1] += std::mem::take(&mut increments[0]);
    let mut points = Vec::with_capacity(xs.len());
    let mut running = 0;
    for (k, x) in xs.into_iter().enumerate() {
        running += increments[2 * k];
        let left = q(running, 48);
        running += increments[2 * k + 1];
        let right = q(running, 48);
        points.push((x, left, right));
    }
    Cdf::new(name, points).expect("generated CDF is well formed")
}

pub fn random_step_map(rng: &mut ChaCha8Rng, name: &str, target: &PosetRef, level: u32) -> StepMap {
    let cells = (0..1usize << level).map(|_| rng.gen_range(0..target.len())).collect();
    StepMap::new(name, target, level, cells).expect("cells index the target")
}

/// A chain `f₀ ≤ f₁ ≤ …` of step maps at increasing levels: each link
/// refines its predecessor and moves some cells upward.
pub fn random_step_chain(rng: &mut ChaCha8Rng, target: &PosetRef, start_level: u32, links: usize) -> Vec<StepMap> {
    let mut chain = vec![random_step_map(rng, "f0", target, start_level)];
    for link in 1..links {
        let prev = chain.last().expect("non-empty chain");
        let mut cells = prev.refine(prev.level() + 1).cells().to_vec();
        for cell in cells.iter_mut() {
            if rng.gen_bool(0.3) {
                let above: Vec<usize> = target.up_set(*cell).ones().collect();
                *cell = *above.choose(rng).expect("up-set contains the element itself");
            }
        }
        chain.push(StepMap::new(&format!("f{link}"), target, prev.level() + 1, cells).expect("cells index the target"));
    }
    chain
}
