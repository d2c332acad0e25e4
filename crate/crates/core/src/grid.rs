//! Lattice points, movement vectors, neighborhoods and finite configurations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

/// A vertex of the integer grid. `x` grows eastward, `y` grows southward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const ORIGIN: GridPoint = GridPoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        GridPoint { x, y }
    }

    /// The displacement leading from `self` to `other`.
    pub fn to(self, other: GridPoint) -> MovementVector {
        MovementVector::new(other.x - self.x, other.y - self.y)
    }

    pub fn dist2(self, other: GridPoint) -> i64 {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        dx * dx + dy * dy
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i64, i64)> for GridPoint {
    fn from((x, y): (i64, i64)) -> Self {
        GridPoint { x, y }
    }
}

/// A displacement on the grid; firing sends one grain along each movement
/// vector of the neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MovementVector {
    pub dx: i64,
    pub dy: i64,
}

impl MovementVector {
    pub const fn new(dx: i64, dy: i64) -> Self {
        MovementVector { dx, dy }
    }

    pub fn is_zero(self) -> bool {
        self.dx == 0 && self.dy == 0
    }

    /// z-component of the cross product; zero iff the vectors are collinear.
    pub fn cross(self, other: MovementVector) -> i64 {
        self.dx * other.dy - self.dy * other.dx
    }

    pub fn dot(self, other: MovementVector) -> i64 {
        self.dx * other.dx + self.dy * other.dy
    }

    pub fn norm2(self) -> i64 {
        self.dot(self)
    }

    pub fn scale(self, k: i64) -> MovementVector {
        MovementVector::new(self.dx * k, self.dy * k)
    }
}

impl From<(i64, i64)> for MovementVector {
    fn from((dx, dy): (i64, i64)) -> Self {
        MovementVector { dx, dy }
    }
}

impl Neg for MovementVector {
    type Output = MovementVector;
    fn neg(self) -> MovementVector {
        MovementVector::new(-self.dx, -self.dy)
    }
}

impl Add<MovementVector> for GridPoint {
    type Output = GridPoint;
    fn add(self, v: MovementVector) -> GridPoint {
        GridPoint::new(self.x + v.dx, self.y + v.dy)
    }
}

impl Sub<MovementVector> for GridPoint {
    type Output = GridPoint;
    fn sub(self, v: MovementVector) -> GridPoint {
        GridPoint::new(self.x - v.dx, self.y - v.dy)
    }
}

impl Add for MovementVector {
    type Output = MovementVector;
    fn add(self, v: MovementVector) -> MovementVector {
        MovementVector::new(self.dx + v.dx, self.dy + v.dy)
    }
}

impl Sub for MovementVector {
    type Output = MovementVector;
    fn sub(self, v: MovementVector) -> MovementVector {
        MovementVector::new(self.dx - v.dx, self.dy - v.dy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeighborhoodError {
    #[error("a neighborhood needs at least one movement vector")]
    Empty,
    #[error("the null vector (0, 0) is not a movement vector")]
    ContainsOrigin,
}

/// A finite uniform neighborhood `N+`. Vectors are kept sorted and unique;
/// the firing threshold `p` is the number of vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Neighborhood {
    vectors: Vec<MovementVector>,
}

impl Neighborhood {
    pub fn new<I>(vectors: I) -> Result<Self, NeighborhoodError>
    where
        I: IntoIterator,
        I::Item: Into<MovementVector>,
    {
        let mut vectors: Vec<MovementVector> = vectors.into_iter().map(Into::into).collect();
        if vectors.iter().any(|v| v.is_zero()) {
            return Err(NeighborhoodError::ContainsOrigin);
        }
        vectors.sort_unstable();
        vectors.dedup();
        if vectors.is_empty() {
            return Err(NeighborhoodError::Empty);
        }
        Ok(Neighborhood { vectors })
    }

    /// Von Neumann neighborhood of the given radius (`|dx| + |dy| <= radius`).
    pub fn von_neumann(radius: i64) -> Self {
        Self::from_predicate(radius, |dx, dy| dx.abs() + dy.abs() <= radius)
    }

    /// Moore neighborhood of the given radius (`max(|dx|, |dy|) <= radius`).
    pub fn moore(radius: i64) -> Self {
        Self::from_predicate(radius, |dx, dy| dx.abs().max(dy.abs()) <= radius)
    }

    fn from_predicate(radius: i64, keep: impl Fn(i64, i64) -> bool) -> Self {
        assert!(radius >= 1, "radius must be positive");
        let vectors = (-radius..=radius)
            .flat_map(|dx| (-radius..=radius).map(move |dy| (dx, dy)))
            .filter(|&(dx, dy)| (dx, dy) != (0, 0) && keep(dx, dy))
            .map(MovementVector::from);
        Neighborhood::new(vectors).expect("radius >= 1 gives a non-empty neighborhood")
    }

    /// Firing threshold: the number of movement vectors.
    pub fn p(&self) -> u64 {
        self.vectors.len() as u64
    }

    pub fn vectors(&self) -> &[MovementVector] {
        &self.vectors
    }

    pub fn contains(&self, v: MovementVector) -> bool {
        self.vectors.binary_search(&v).is_ok()
    }

    /// Out-neighbors `N+(v) = N+ + v`.
    pub fn out_neighbors(&self, v: GridPoint) -> impl Iterator<Item = GridPoint> + '_ {
        self.vectors.iter().map(move |&d| v + d)
    }

    /// In-neighbors `N-(v)`: the cells having `v` among their out-neighbors.
    pub fn in_neighbors(&self, v: GridPoint) -> impl Iterator<Item = GridPoint> + '_ {
        self.vectors.iter().map(move |&d| v - d)
    }

    /// `true` when `to` receives a grain whenever `from` fires.
    pub fn reaches(&self, from: GridPoint, to: GridPoint) -> bool {
        self.contains(from.to(to))
    }

    pub fn has_noncollinear_pair(&self) -> bool {
        let first = self.vectors[0];
        self.vectors.iter().any(|&v| first.cross(v) != 0)
    }

    /// Central symmetric image `N-`.
    pub fn inverse(&self) -> Neighborhood {
        Neighborhood::new(self.vectors.iter().map(|&v| -v)).expect("negation keeps the vectors valid")
    }

    /// Image under the transposition `(dx, dy) -> (dy, dx)`.
    pub fn transpose(&self) -> Neighborhood {
        Neighborhood::new(self.vectors.iter().map(|v| MovementVector::new(v.dy, v.dx)))
            .expect("transposition keeps the vectors valid")
    }

    /// Longest movement vector, ties broken by the greater `(dx, dy)`.
    pub fn longest(&self) -> MovementVector {
        *self
            .vectors
            .iter()
            .max_by_key(|v| (v.norm2(), v.dx, v.dy))
            .expect("neighborhoods are non-empty")
    }

    /// `true` when the neighborhood is the same as its inverse.
    pub fn is_symmetric(&self) -> bool {
        self.vectors.iter().all(|&v| self.contains(-v))
    }
}

/// Inclusive axis-aligned rectangle of grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub min: GridPoint,
    pub max: GridPoint,
}

impl Rect {
    pub fn square(side: i64) -> Rect {
        Rect { min: GridPoint::ORIGIN, max: GridPoint::new(side - 1, side - 1) }
    }

    pub fn contains(&self, v: GridPoint) -> bool {
        (self.min.x..=self.max.x).contains(&v.x) && (self.min.y..=self.max.y).contains(&v.y)
    }

    pub fn width(&self) -> i64 {
        self.max.x - self.min.x + 1
    }

    pub fn height(&self) -> i64 {
        self.max.y - self.min.y + 1
    }
}

/// A finitely supported assignment of grains to grid points.
///
/// Cells holding zero grains are never stored, so two configurations are
/// equal exactly when they assign the same number of grains everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Configuration {
    grains: BTreeMap<GridPoint, u64>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: GridPoint) -> u64 {
        self.grains.get(&v).copied().unwrap_or(0)
    }

    pub fn set(&mut self, v: GridPoint, grains: u64) {
        if grains == 0 {
            self.grains.remove(&v);
        } else {
            self.grains.insert(v, grains);
        }
    }

    pub fn add_grains(&mut self, v: GridPoint, grains: u64) {
        if grains > 0 {
            *self.grains.entry(v).or_insert(0) += grains;
        }
    }

    pub fn total(&self) -> u64 {
        self.grains.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.grains.is_empty()
    }

    /// Number of non-empty cells.
    pub fn len(&self) -> usize {
        self.grains.len()
    }

    /// Non-empty cells in lexicographic order, with their grain counts.
    pub fn iter(&self) -> impl Iterator<Item = (GridPoint, u64)> + '_ {
        self.grains.iter().map(|(&v, &g)| (v, g))
    }

    pub fn support(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.grains.keys().copied()
    }

    pub fn bounding_box(&self) -> Option<Rect> {
        let mut cells = self.support();
        let first = cells.next()?;
        let (mut min, mut max) = (first, first);
        for v in cells {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        Some(Rect { min, max })
    }

    pub fn is_stable(&self, nb: &Neighborhood) -> bool {
        self.grains.values().all(|&g| g < nb.p())
    }

    pub fn translate(&self, by: MovementVector) -> Configuration {
        self.iter().map(|(v, g)| (v + by, g)).collect()
    }

    /// Image under the transposition `(x, y) -> (y, x)`.
    pub fn transpose(&self) -> Configuration {
        self.iter().map(|(v, g)| (GridPoint::new(v.y, v.x), g)).collect()
    }
}

impl FromIterator<(GridPoint, u64)> for Configuration {
    fn from_iter<T: IntoIterator<Item = (GridPoint, u64)>>(iter: T) -> Self {
        let mut c = Configuration::new();
        for (v, g) in iter {
            c.add_grains(v, g);
        }
        c
    }
}

impl<const K: usize> From<[((i64, i64), u64); K]> for Configuration {
    fn from(cells: [((i64, i64), u64); K]) -> Self {
        cells.into_iter().map(|(v, g)| (GridPoint::from(v), g)).collect()
    }
}
