//! Transporter, isolation and crossing checks on a square of side `n`.
//!
//! The square covers `(0, 0)..=(n-1, n-1)` with `x` growing eastward and `y`
//! growing southward, so the north border is the row `y = 0`. A signal is a
//! single grain dropped on a border cell of a stable configuration.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::ParallelRun;
use crate::grid::{Configuration, GridPoint, Neighborhood, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Border {
    North,
    East,
    South,
    West,
}

impl Border {
    /// The border across the square.
    pub fn opposite(self) -> Border {
        match self {
            Border::North => Border::South,
            Border::South => Border::North,
            Border::East => Border::West,
            Border::West => Border::East,
        }
    }

    /// Image under the transposition `(x, y) -> (y, x)`.
    pub fn transpose(self) -> Border {
        match self {
            Border::North => Border::West,
            Border::West => Border::North,
            Border::East => Border::South,
            Border::South => Border::East,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("square side must be positive")]
    EmptySquare,
    #[error("{border:?} index {index} is outside 0..{len}")]
    IndexOutOfRange { border: Border, index: i64, len: i64 },
}

/// A vector of `E_n`: the single 1 sits at `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitVector {
    pub n: i64,
    pub index: i64,
}

impl UnitVector {
    pub fn new(n: i64, index: i64) -> Option<Self> {
        (n > 0 && (0..n).contains(&index)).then_some(UnitVector { n, index })
    }

    /// The 0/1 entries of the vector.
    pub fn entries(&self) -> Vec<u8> {
        (0..self.n).map(|i| u8::from(i == self.index)).collect()
    }
}

/// The square and the four border indices of a crossing.
///
/// `width` and `height` coincide for the square crossings of the
/// definitions; rectangles are accepted by the verifier as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrossingSpec {
    pub width: i64,
    pub height: i64,
    pub north: i64,
    pub east: i64,
    pub south: i64,
    pub west: i64,
}

impl CrossingSpec {
    pub fn square(n: i64, north: i64, east: i64, south: i64, west: i64) -> Result<Self, SpecError> {
        CrossingSpec::rect(n, n, north, east, south, west)
    }

    pub fn rect(width: i64, height: i64, north: i64, east: i64, south: i64, west: i64) -> Result<Self, SpecError> {
        if width <= 0 || height <= 0 {
            return Err(SpecError::EmptySquare);
        }
        let spec = CrossingSpec { width, height, north, east, south, west };
        for border in [Border::North, Border::East, Border::South, Border::West] {
            let (index, len) = (spec.index(border), spec.border_len(border));
            if !(0..len).contains(&index) {
                return Err(SpecError::IndexOutOfRange { border, index, len });
            }
        }
        Ok(spec)
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    pub fn rect_area(&self) -> Rect {
        Rect { min: GridPoint::ORIGIN, max: GridPoint::new(self.width - 1, self.height - 1) }
    }

    pub fn index(&self, border: Border) -> i64 {
        match border {
            Border::North => self.north,
            Border::East => self.east,
            Border::South => self.south,
            Border::West => self.west,
        }
    }

    /// Number of cells along a border.
    pub fn border_len(&self, border: Border) -> i64 {
        match border {
            Border::North | Border::South => self.width,
            Border::East | Border::West => self.height,
        }
    }

    pub fn unit_vector(&self, border: Border) -> UnitVector {
        UnitVector { n: self.border_len(border), index: self.index(border) }
    }

    /// The cell holding the 1 of the positioned border vector.
    pub fn cell(&self, border: Border) -> GridPoint {
        let i = self.index(border);
        match border {
            Border::North => GridPoint::new(i, 0),
            Border::East => GridPoint::new(self.width - 1, i),
            Border::South => GridPoint::new(i, self.height - 1),
            Border::West => GridPoint::new(0, i),
        }
    }

    /// `true` when `v` lies on the given border line.
    pub fn on_border(&self, border: Border, v: GridPoint) -> bool {
        match border {
            Border::North => v.y == 0,
            Border::East => v.x == self.width - 1,
            Border::South => v.y == self.height - 1,
            Border::West => v.x == 0,
        }
    }

    /// Image under the transposition `(x, y) -> (y, x)`.
    pub fn transpose(&self) -> CrossingSpec {
        CrossingSpec {
            width: self.height,
            height: self.width,
            north: self.west,
            west: self.north,
            east: self.south,
            south: self.east,
        }
    }
}

/// The configuration `N(e)`, `E(e)`, `S(e)` or `W(e)`: one grain on the
/// border cell selected by the spec.
pub fn positioning(spec: &CrossingSpec, border: Border) -> Configuration {
    Configuration::from_iter([(spec.cell(border), 1)])
}

/// Why an avalanche left the setting where every cell fires at most once.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingleFiringViolation {
    #[error("cell {x},{y} fired twice (second time at step {t})")]
    FiredTwice { x: i64, y: i64, t: u64 },
    #[error("cell {x},{y} outside the square fired at step {t}")]
    FiredOutside { x: i64, y: i64, t: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("configuration is not stable at {0}")]
    NotStable(GridPoint),
    #[error("configuration has grains outside the square at {0}")]
    OutsideSquare(GridPoint),
    #[error("entry border must be west or north, got {0:?}")]
    BadEntry(Border),
    #[error(transparent)]
    SingleFiring(#[from] SingleFiringViolation),
}

/// The evolution `Act(F^t(c + seed))` for `t = 0, 1, ...` until stability.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Avalanche {
    pub act: Vec<Vec<GridPoint>>,
}

impl Avalanche {
    pub fn fire_times(&self) -> BTreeMap<GridPoint, u64> {
        let mut times = BTreeMap::new();
        for (t, cells) in self.act.iter().enumerate() {
            for &v in cells {
                times.entry(v).or_insert(t as u64);
            }
        }
        times
    }

    pub fn fired(&self) -> BTreeSet<GridPoint> {
        self.act.iter().flatten().copied().collect()
    }
}

/// Checks that `c` is stable and supported inside the spec's rectangle.
pub fn check_input(c: &Configuration, nb: &Neighborhood, spec: &CrossingSpec) -> Result<(), VerifyError> {
    let area = spec.rect_area();
    if let Some(v) = c.support().find(|v| !area.contains(*v)) {
        return Err(VerifyError::OutsideSquare(v));
    }
    if let Some((v, _)) = c.iter().find(|&(_, g)| g >= nb.p()) {
        return Err(VerifyError::NotStable(v));
    }
    Ok(())
}

/// Runs `c + seed` step by step, enforcing that every cell fires at most once
/// and only inside the spec's rectangle. Under those rules the run lasts at
/// most one step per cell of the rectangle.
pub fn avalanche(
    c: &Configuration,
    nb: &Neighborhood,
    spec: &CrossingSpec,
    seed: GridPoint,
) -> Result<Avalanche, VerifyError> {
    check_input(c, nb, spec)?;
    let mut start = c.clone();
    start.add_grains(seed, 1);
    let area = spec.rect_area();
    let mut run = ParallelRun::new(&start, nb);
    let mut seen = BTreeSet::new();
    let mut act = Vec::new();
    while !run.is_stable() {
        let t = run.steps();
        for &v in run.active() {
            if !area.contains(v) {
                return Err(SingleFiringViolation::FiredOutside { x: v.x, y: v.y, t }.into());
            }
            if !seen.insert(v) {
                return Err(SingleFiringViolation::FiredTwice { x: v.x, y: v.y, t }.into());
            }
        }
        act.push(run.step().expect("run is unstable"));
    }
    Ok(Avalanche { act })
}

/// The step at which the active set is exactly `{target}`, if any.
pub fn singleton_time(av: &Avalanche, target: GridPoint) -> Option<u64> {
    av.act.iter().position(|a| a.as_slice() == [target]).map(|t| t as u64)
}

/// First firing on the forbidden border line.
pub fn first_on_border(av: &Avalanche, spec: &CrossingSpec, border: Border) -> Option<(u64, GridPoint)> {
    av.act
        .iter()
        .enumerate()
        .find_map(|(t, a)| a.iter().find(|v| spec.on_border(border, **v)).map(|v| (t as u64, *v)))
}

/// The border a signal must not touch: south for west entries, east for north
/// entries.
pub fn forbidden_border(entry: Border) -> Result<Border, VerifyError> {
    match entry {
        Border::West => Ok(Border::South),
        Border::North => Ok(Border::East),
        other => Err(VerifyError::BadEntry(other)),
    }
}

/// Outcome of a transporter check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transport {
    pub holds: bool,
    /// Step at which the exit cell fires alone.
    pub witness: Option<u64>,
    pub avalanche: Avalanche,
}

/// Is `c` a transporter from `entry` (west or north) to the opposite border?
pub fn verify_transporter(
    c: &Configuration,
    nb: &Neighborhood,
    spec: &CrossingSpec,
    entry: Border,
) -> Result<Transport, VerifyError> {
    forbidden_border(entry)?;
    let av = avalanche(c, nb, spec, spec.cell(entry))?;
    let witness = singleton_time(&av, spec.cell(entry.opposite()));
    Ok(Transport { holds: witness.is_some(), witness, avalanche: av })
}

/// Outcome of an isolation check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isolation {
    pub holds: bool,
    pub violation: Option<(u64, GridPoint)>,
}

/// Is the `entry` signal (west or north) isolated from its forbidden border?
pub fn verify_isolation(
    c: &Configuration,
    nb: &Neighborhood,
    spec: &CrossingSpec,
    entry: Border,
) -> Result<Isolation, VerifyError> {
    let forbidden = forbidden_border(entry)?;
    let av = avalanche(c, nb, spec, spec.cell(entry))?;
    let violation = first_on_border(&av, spec, forbidden);
    Ok(Isolation { holds: violation.is_none(), violation })
}

/// The five conditions of a crossing, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub stable: bool,
    pub west_to_east: bool,
    pub west_isolated_south: bool,
    pub north_to_south: bool,
    /// The north signal never fires a cell of the east border.
    pub north_isolated_east: bool,
    pub verdict: bool,
    /// Step at which the east exit fires alone.
    pub west_to_east_time: Option<u64>,
    pub north_to_south_time: Option<u64>,
    /// First `[t, x, y]` firing on the south border after a west grain.
    pub west_violation: Option<[i64; 3]>,
    pub north_violation: Option<[i64; 3]>,
    /// Input problems or broken single-firing behavior, if any.
    pub problems: Vec<String>,
}

impl CrossingReport {
    /// The report of the transposed configuration.
    pub fn transpose(&self) -> CrossingReport {
        CrossingReport {
            stable: self.stable,
            west_to_east: self.north_to_south,
            west_isolated_south: self.north_isolated_east,
            north_to_south: self.west_to_east,
            north_isolated_east: self.west_isolated_south,
            verdict: self.verdict,
            west_to_east_time: self.north_to_south_time,
            north_to_south_time: self.west_to_east_time,
            west_violation: self.north_violation.map(|[t, x, y]| [t, y, x]),
            north_violation: self.west_violation.map(|[t, x, y]| [t, y, x]),
            problems: self.problems.clone(),
        }
    }
}

/// Checks all five crossing conditions. Never fails: problems land in the
/// report and make the verdict false.
pub fn verify_crossing(c: &Configuration, nb: &Neighborhood, spec: &CrossingSpec) -> CrossingReport {
    let mut report = CrossingReport {
        stable: c.is_stable(nb),
        west_to_east: false,
        west_isolated_south: false,
        north_to_south: false,
        north_isolated_east: false,
        verdict: false,
        west_to_east_time: None,
        north_to_south_time: None,
        west_violation: None,
        north_violation: None,
        problems: Vec::new(),
    };
    if let Err(e) = check_input(c, nb, spec) {
        report.problems.push(e.to_string());
        return report;
    }
    for entry in [Border::West, Border::North] {
        match avalanche(c, nb, spec, spec.cell(entry)) {
            Ok(av) => {
                let time = singleton_time(&av, spec.cell(entry.opposite()));
                let forbidden = forbidden_border(entry).expect("west and north are entries");
                let violation = first_on_border(&av, spec, forbidden).map(|(t, v)| [t as i64, v.x, v.y]);
                if entry == Border::West {
                    report.west_to_east = time.is_some();
                    report.west_to_east_time = time;
                    report.west_isolated_south = violation.is_none();
                    report.west_violation = violation;
                } else {
                    report.north_to_south = time.is_some();
                    report.north_to_south_time = time;
                    report.north_isolated_east = violation.is_none();
                    report.north_violation = violation;
                }
            }
            Err(e) => report.problems.push(format!("{entry:?} signal: {e}")),
        }
    }
    report.verdict = report.stable
        && report.west_to_east
        && report.west_isolated_south
        && report.north_to_south
        && report.north_isolated_east;
    report
}
