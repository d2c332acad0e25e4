//! The sandpile engine: parallel update rule, stabilization and odometers.
//!
//! A vertex holding at least `p` grains is unstable; in one parallel step every
//! unstable vertex loses `p` grains and each of its out-neighbors gains one.
//! The parallel step index is the clock used everywhere else in the crate.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::grid::{Configuration, GridPoint, Neighborhood};

/// Default limit on parallel steps for [`stabilize`].
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Default limit on single firings for [`stabilize_sequential`].
pub const DEFAULT_FIRING_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    /// The budget ran out and the neighborhood only has collinear movement
    /// vectors, so convergence is not guaranteed at all.
    #[error("no convergence after {steps} steps: all movement vectors are collinear")]
    NonConvergent { steps: u64 },
    #[error("step budget of {steps} exhausted before stabilization")]
    BudgetExhausted { steps: u64 },
}

impl DynamicsError {
    fn exhausted(nb: &Neighborhood, steps: u64) -> Self {
        if nb.has_noncollinear_pair() {
            DynamicsError::BudgetExhausted { steps }
        } else {
            DynamicsError::NonConvergent { steps }
        }
    }
}

/// Per-vertex firing counts of a stabilization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Odometer {
    /// Vertices that fired at least once.
    pub fire_count: BTreeMap<GridPoint, u64>,
    /// Parallel steps (or single firings, for sequential runs) until stability.
    pub steps: u64,
}

impl Odometer {
    pub fn max_fire_count(&self) -> u64 {
        self.fire_count.values().copied().max().unwrap_or(0)
    }

    pub fn total_firings(&self) -> u64 {
        self.fire_count.values().sum()
    }
}

/// The set `Act(c)` of unstable vertices.
pub fn active_set(c: &Configuration, nb: &Neighborhood) -> BTreeSet<GridPoint> {
    let p = nb.p();
    c.iter().filter(|&(_, g)| g >= p).map(|(v, _)| v).collect()
}

/// Pointwise sum of two configurations.
pub fn add(c1: &Configuration, c2: &Configuration) -> Configuration {
    let mut sum = c1.clone();
    for (v, g) in c2.iter() {
        sum.add_grains(v, g);
    }
    sum
}

/// One application of the parallel rule. Returns the next configuration and
/// the vertices that fired, i.e. `Act(c)`.
pub fn parallel_step(c: &Configuration, nb: &Neighborhood) -> (Configuration, BTreeSet<GridPoint>) {
    let mut run = ParallelRun::new(c, nb);
    let fired = run.step().unwrap_or_default();
    (run.configuration(), fired.into_iter().collect())
}

/// Stabilizes `c` with the parallel rule.
///
/// `budget` bounds the number of parallel steps ([`DEFAULT_STEP_BUDGET`] when
/// `None`).
pub fn stabilize(
    c: &Configuration,
    nb: &Neighborhood,
    budget: Option<u64>,
) -> Result<(Configuration, Odometer), DynamicsError> {
    let budget = budget.unwrap_or(DEFAULT_STEP_BUDGET);
    let mut run = ParallelRun::new(c, nb);
    let mut fire_count: FxHashMap<GridPoint, u64> = FxHashMap::default();
    loop {
        if run.is_stable() {
            break;
        }
        if run.steps() >= budget {
            return Err(DynamicsError::exhausted(nb, run.steps()));
        }
        for v in run.step().expect("unstable run has a next step") {
            *fire_count.entry(v).or_insert(0) += 1;
        }
    }
    let odo = Odometer { fire_count: fire_count.into_iter().collect(), steps: run.steps() };
    Ok((run.configuration(), odo))
}

/// Stabilizes `c` by firing one unstable vertex at a time, chosen uniformly
/// at random with a generator seeded by `order_seed`.
///
/// `budget` bounds the number of single firings ([`DEFAULT_FIRING_BUDGET`]
/// when `None`). The odometer's `steps` counts firings.
pub fn stabilize_sequential(
    c: &Configuration,
    nb: &Neighborhood,
    order_seed: u64,
    budget: Option<u64>,
) -> Result<(Configuration, Odometer), DynamicsError> {
    let budget = budget.unwrap_or(DEFAULT_FIRING_BUDGET);
    let p = nb.p();
    let mut rng = ChaCha8Rng::seed_from_u64(order_seed);
    let mut grains: FxHashMap<GridPoint, u64> = c.iter().collect();
    let mut fire_count: FxHashMap<GridPoint, u64> = FxHashMap::default();

    // Unstable vertices in a vector with a position index, for O(1) random removal.
    let mut unstable: Vec<GridPoint> = c.iter().filter(|&(_, g)| g >= p).map(|(v, _)| v).collect();
    let mut position: FxHashMap<GridPoint, usize> =
        unstable.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut firings = 0u64;

    while !unstable.is_empty() {
        if firings >= budget {
            return Err(DynamicsError::exhausted(nb, firings));
        }
        let v = unstable[rng.gen_range(0..unstable.len())];
        firings += 1;
        *fire_count.entry(v).or_insert(0) += 1;
        let g = grains.get_mut(&v).expect("unstable vertex holds grains");
        *g -= p;
        if *g < p {
            let i = position.remove(&v).expect("indexed");
            unstable.swap_remove(i);
            if let Some(&moved) = unstable.get(i) {
                position.insert(moved, i);
            }
        }
        for u in nb.out_neighbors(v) {
            let g = grains.entry(u).or_insert(0);
            *g += 1;
            if *g == p {
                position.insert(u, unstable.len());
                unstable.push(u);
            }
        }
    }
    let stable = grains.into_iter().filter(|&(_, g)| g > 0).collect();
    Ok((stable, Odometer { fire_count: fire_count.into_iter().collect(), steps: firings }))
}

/// A parallel evolution `c, F(c), F²(c), ...` advanced one step at a time.
///
/// Only vertices that received grains in the previous step are rescanned, so
/// a step costs time proportional to the activity rather than the support.
pub struct ParallelRun<'a> {
    nb: &'a Neighborhood,
    grains: FxHashMap<GridPoint, u64>,
    active: Vec<GridPoint>,
    steps: u64,
}

impl<'a> ParallelRun<'a> {
    pub fn new(c: &Configuration, nb: &'a Neighborhood) -> Self {
        let p = nb.p();
        let active = c.iter().filter(|&(_, g)| g >= p).map(|(v, _)| v).collect();
        ParallelRun { nb, grains: c.iter().collect(), active, steps: 0 }
    }

    /// Number of steps applied so far (the current time `t`).
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_stable(&self) -> bool {
        self.active.is_empty()
    }

    /// `Act(F^t(c))` for the current time `t`, sorted.
    pub fn active(&self) -> &[GridPoint] {
        &self.active
    }

    pub fn grains(&self, v: GridPoint) -> u64 {
        self.grains.get(&v).copied().unwrap_or(0)
    }

    /// Fires the current active set and returns it, or `None` once stable.
    pub fn step(&mut self) -> Option<Vec<GridPoint>> {
        if self.active.is_empty() {
            return None;
        }
        let p = self.nb.p();
        let fired = std::mem::take(&mut self.active);
        let mut touched: FxHashSet<GridPoint> = FxHashSet::default();
        for &v in &fired {
            *self.grains.get_mut(&v).expect("active vertex holds grains") -= p;
            touched.insert(v);
        }
        for &v in &fired {
            for u in self.nb.out_neighbors(v) {
                *self.grains.entry(u).or_insert(0) += 1;
                touched.insert(u);
            }
        }
        let mut next: Vec<GridPoint> = touched.into_iter().filter(|v| self.grains[v] >= p).collect();
        next.sort_unstable();
        self.active = next;
        self.steps += 1;
        Some(fired)
    }

    pub fn configuration(&self) -> Configuration {
        self.grains.iter().filter(|&(_, &g)| g > 0).map(|(&v, &g)| (v, g)).collect()
    }
}
