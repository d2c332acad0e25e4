//! Firing graphs of avalanches and the construction that makes the two
//! firing graphs of a crossing vertex-disjoint.
//!
//! An arc `(v1, v2)` joins two fired cells when `v2` is an out-neighbor of
//! `v1` and `v1` fired at a strictly earlier parallel step.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dynamics::{add, ParallelRun, DEFAULT_STEP_BUDGET};
use crate::grid::{Configuration, GridPoint, Neighborhood};
use crate::verify::{verify_crossing, Border, CrossingReport, CrossingSpec};
use crate::DynamicsError;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiringGraph {
    /// First parallel step at which each fired cell fired.
    pub fire_time: BTreeMap<GridPoint, u64>,
    pub arcs: BTreeSet<(GridPoint, GridPoint)>,
}

impl FiringGraph {
    /// Builds the graph from fire times, adding every admissible arc.
    pub fn from_fire_times(fire_time: BTreeMap<GridPoint, u64>, nb: &Neighborhood) -> Self {
        let mut arcs = BTreeSet::new();
        for (&v1, &t1) in &fire_time {
            for v2 in nb.out_neighbors(v1) {
                if fire_time.get(&v2).is_some_and(|&t2| t1 < t2) {
                    arcs.insert((v1, v2));
                }
            }
        }
        FiringGraph { fire_time, arcs }
    }

    pub fn vertices(&self) -> BTreeSet<GridPoint> {
        self.fire_time.keys().copied().collect()
    }

    pub fn contains(&self, v: GridPoint) -> bool {
        self.fire_time.contains_key(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.fire_time.is_empty()
    }

    /// `N+_G(v)`.
    pub fn out_neighbors(&self, v: GridPoint) -> impl Iterator<Item = GridPoint> + '_ {
        let lo = (v, GridPoint::new(i64::MIN, i64::MIN));
        let hi = (v, GridPoint::new(i64::MAX, i64::MAX));
        self.arcs.range(lo..=hi).map(|&(_, w)| w)
    }

    /// `N-_G(v)`.
    pub fn in_neighbors(&self, v: GridPoint) -> impl Iterator<Item = GridPoint> + '_ {
        self.arcs.iter().filter(move |&&(_, w)| w == v).map(|&(u, _)| u)
    }
}

/// Stabilizes `c + seed` with the parallel rule and records when each cell
/// first fired.
pub fn extract_firing_graph(
    c: &Configuration,
    seed: &Configuration,
    nb: &Neighborhood,
) -> Result<FiringGraph, DynamicsError> {
    let start = add(c, seed);
    let mut run = ParallelRun::new(&start, nb);
    let mut fire_time = BTreeMap::new();
    while !run.is_stable() {
        if run.steps() >= DEFAULT_STEP_BUDGET {
            return Err(if nb.has_noncollinear_pair() {
                DynamicsError::BudgetExhausted { steps: run.steps() }
            } else {
                DynamicsError::NonConvergent { steps: run.steps() }
            });
        }
        let t = run.steps();
        for v in run.step().expect("run is unstable") {
            fire_time.entry(v).or_insert(t);
        }
    }
    Ok(FiringGraph::from_fire_times(fire_time, nb))
}

/// The west-to-east and north-to-south firing graphs of a configuration.
pub fn crossing_graphs(
    c: &Configuration,
    nb: &Neighborhood,
    spec: &CrossingSpec,
) -> Result<(FiringGraph, FiringGraph), DynamicsError> {
    let seed = |b: Border| Configuration::from_iter([(spec.cell(b), 1)]);
    Ok((extract_firing_graph(c, &seed(Border::West), nb)?, extract_firing_graph(c, &seed(Border::North), nb)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DisjointifyError {
    #[error("input is not a crossing")]
    NotACrossing(Box<CrossingReport>),
    #[error("transformed configuration is no longer a crossing")]
    OutputNotCrossing(Box<CrossingReport>),
    #[error("fired cells of the transformed configuration differ from the expected sets")]
    VertexSetMismatch,
    #[error("transformed configuration is unstable at {0}")]
    Unstable(GridPoint),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Removes the cells fired by both signals from a crossing.
///
/// Shared cells lose all their grains; every cell reached through arcs from
/// shared cells in only one of the two graphs gets back as many grains as it
/// had shared in-neighbors in that graph. The result is checked: it must be
/// stable, verify as a crossing, and its firing graphs must be exactly the
/// original ones minus the shared cells.
pub fn disjointify(
    c: &Configuration,
    nb: &Neighborhood,
    spec: &CrossingSpec,
) -> Result<Configuration, DisjointifyError> {
    let report = verify_crossing(c, nb, spec);
    if !report.verdict {
        return Err(DisjointifyError::NotACrossing(Box::new(report)));
    }
    let (g1, g2) = crossing_graphs(c, nb, spec)?;
    let (v1, v2) = (g1.vertices(), g2.vertices());
    let shared: BTreeSet<GridPoint> = v1.intersection(&v2).copied().collect();
    if shared.is_empty() {
        return Ok(c.clone());
    }
    let image = |g: &FiringGraph| -> BTreeSet<GridPoint> { shared.iter().flat_map(|&u| g.out_neighbors(u)).collect() };
    let (img1, img2) = (image(&g1), image(&g2));

    let mut out = c.clone();
    for &v in &shared {
        out.set(v, 0);
    }
    for (g, mine, theirs) in [(&g1, &img1, &img2), (&g2, &img2, &img1)] {
        for &v in mine.difference(theirs) {
            if shared.contains(&v) {
                continue;
            }
            let extra = g.in_neighbors(v).filter(|u| shared.contains(u)).count() as u64;
            out.add_grains(v, extra);
        }
    }

    if let Some((v, _)) = out.iter().find(|&(_, g)| g >= nb.p()) {
        return Err(DisjointifyError::Unstable(v));
    }
    let (h1, h2) = crossing_graphs(&out, nb, spec)?;
    let expected1: BTreeSet<GridPoint> = v1.difference(&shared).copied().collect();
    let expected2: BTreeSet<GridPoint> = v2.difference(&shared).copied().collect();
    if h1.vertices() != expected1 || h2.vertices() != expected2 {
        return Err(DisjointifyError::VertexSetMismatch);
    }
    let report = verify_crossing(&out, nb, spec);
    if !report.verdict {
        return Err(DisjointifyError::OutputNotCrossing(Box::new(report)));
    }
    Ok(out)
}
