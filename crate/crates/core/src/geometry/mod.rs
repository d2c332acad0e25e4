//! Continuous shapes and their discretization into neighborhoods.
//!
//! A shape is a finite union of closed disks and closed convex polygons with
//! rational data. Scaling by a ratio `r` turns it into the neighborhood of
//! lattice points `(x, y) != (0, 0)` with `(x / r, y / r)` in the shape; every
//! membership test is exact.

mod rational;

pub use rational::*;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::grid::{GridPoint, Neighborhood};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("a shape needs at least one primitive")]
    NoPrimitives,
    #[error("disk radius must be positive")]
    NonPositiveRadius,
    #[error("a polygon needs at least 3 vertices")]
    TooFewVertices,
    #[error("polygon is not convex")]
    NotConvex,
    #[error("scaling ratio must be positive")]
    NonPositiveRatio,
    #[error("shape is flat (primitive {index} has zero area)")]
    FlatShape { index: usize },
    #[error("the zero vector has no orthogonal direction")]
    ZeroVector,
    #[error("the shape projects to zero length orthogonally to the given vector")]
    ZeroProjection,
    #[error("discretization at this ratio is empty")]
    EmptyNeighborhood,
}

/// A closed disk or a closed convex polygon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    Disk { center: Point, radius: Rational },
    /// Counterclockwise vertices. Collinear vertex lists are kept and behave
    /// as the segment they span.
    Polygon { vertices: Vec<Point> },
}

impl Primitive {
    pub fn disk(center: Point, radius: Rational) -> Result<Self, GeometryError> {
        if !radius.is_positive() {
            return Err(GeometryError::NonPositiveRadius);
        }
        Ok(Primitive::Disk { center, radius })
    }

    /// Builds a convex polygon; the vertex order is normalised to
    /// counterclockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices);
        }
        if double_area(&vertices).is_negative() {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
            let edge = b.sub(a);
            if vertices.iter().any(|p| edge.cross(&p.sub(a)).is_negative()) {
                return Err(GeometryError::NotConvex);
            }
        }
        Ok(Primitive::Polygon { vertices })
    }

    pub fn has_positive_area(&self) -> bool {
        match self {
            Primitive::Disk { .. } => true,
            Primitive::Polygon { vertices } => !double_area(vertices).is_zero(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Primitive::Disk { center, radius } => p.sub(center).norm2() <= radius * radius,
            Primitive::Polygon { vertices } => {
                if self.has_positive_area() {
                    let n = vertices.len();
                    (0..n).all(|i| {
                        let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
                        !b.sub(a).cross(&p.sub(a)).is_negative()
                    })
                } else {
                    let (a, b) = segment_ends(vertices);
                    let ab = b.sub(&a);
                    ab.cross(&p.sub(&a)).is_zero()
                        && !ab.dot(&p.sub(&a)).is_negative()
                        && !ab.dot(&p.sub(&b)).is_positive()
                }
            }
        }
    }

    pub fn negate(&self) -> Primitive {
        match self {
            Primitive::Disk { center, radius } => Primitive::Disk { center: center.neg(), radius: radius.clone() },
            // Central symmetry preserves orientation.
            Primitive::Polygon { vertices } => Primitive::Polygon { vertices: vertices.iter().map(Point::neg).collect() },
        }
    }

    pub fn translate(&self, by: &Point) -> Primitive {
        match self {
            Primitive::Disk { center, radius } => Primitive::Disk { center: center.add(by), radius: radius.clone() },
            Primitive::Polygon { vertices } => Primitive::Polygon { vertices: vertices.iter().map(|v| v.add(by)).collect() },
        }
    }

    /// A triangle of positive area inside the primitive, if any.
    pub fn fat_triangle(&self) -> Option<[Point; 3]> {
        match self {
            Primitive::Disk { center, radius } => {
                let r = radius.clone();
                Some([
                    center.add(&Point::new(r.clone(), rat(0))),
                    center.add(&Point::new(rat(0), r.clone())),
                    center.add(&Point::new(-r, rat(0))),
                ])
            }
            Primitive::Polygon { vertices } => {
                let a = &vertices[0];
                for i in 1..vertices.len() {
                    for j in i + 1..vertices.len() {
                        if !vertices[i].sub(a).cross(&vertices[j].sub(a)).is_zero() {
                            return Some([a.clone(), vertices[i].clone(), vertices[j].clone()]);
                        }
                    }
                }
                None
            }
        }
    }

    /// Exact bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        match self {
            Primitive::Disk { center, radius } => (
                Point::new(&center.x - radius, &center.y - radius),
                Point::new(&center.x + radius, &center.y + radius),
            ),
            Primitive::Polygon { vertices } => {
                let xs = vertices.iter().map(|v| &v.x);
                let ys = vertices.iter().map(|v| &v.y);
                (
                    Point::new(xs.clone().min().unwrap().clone(), ys.clone().min().unwrap().clone()),
                    Point::new(xs.max().unwrap().clone(), ys.max().unwrap().clone()),
                )
            }
        }
    }

    /// Radius of a disk guaranteed to lie inside the primitive (zero for
    /// flat polygons), together with its center.
    fn inscribed_disk(&self) -> (Point, Rational) {
        match self {
            Primitive::Disk { center, radius } => (center.clone(), radius.clone()),
            Primitive::Polygon { vertices } => {
                let Some(tri) = self.fat_triangle() else {
                    return (vertices[0].clone(), rat(0));
                };
                let g = Point::new(
                    (&tri[0].x + &tri[1].x + &tri[2].x) / rat(3),
                    (&tri[0].y + &tri[1].y + &tri[2].y) / rat(3),
                );
                // Distance from g to each edge line, with the edge length
                // over-estimated by its L1 norm to stay rational.
                let n = vertices.len();
                let rho = (0..n)
                    .filter_map(|i| {
                        let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
                        let e = b.sub(a);
                        let l1 = e.x.abs() + e.y.abs();
                        (!l1.is_zero()).then(|| e.cross(&g.sub(a)).abs() / l1)
                    })
                    .min()
                    .expect("a fat polygon has edges");
                (g, rho)
            }
        }
    }
}

fn segment_ends(vertices: &[Point]) -> (Point, Point) {
    let min = vertices.iter().min_by(|a, b| a.lex_cmp(b)).unwrap().clone();
    let max = vertices.iter().max_by(|a, b| a.lex_cmp(b)).unwrap().clone();
    (min, max)
}

/// A bounded region of the plane: union of closed primitives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    primitives: Vec<Primitive>,
}

impl Shape {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self, GeometryError> {
        if primitives.is_empty() {
            return Err(GeometryError::NoPrimitives);
        }
        Ok(Shape { primitives })
    }

    /// The closed disk of the given center and radius.
    pub fn disk(center: Point, radius: Rational) -> Result<Self, GeometryError> {
        Shape::new(vec![Primitive::disk(center, radius)?])
    }

    /// The closed unit disk centered at the origin.
    pub fn unit_disk() -> Self {
        Shape::disk(Point::zero(), rat(1)).expect("radius 1 is positive")
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        Shape::new(vec![Primitive::polygon(vertices)?])
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.primitives.iter().any(|q| q.contains(p))
    }

    pub fn union(&self, other: &Shape) -> Shape {
        let mut primitives = self.primitives.clone();
        primitives.extend(other.primitives.iter().cloned());
        Shape { primitives }
    }

    pub fn translate(&self, by: &Point) -> Shape {
        Shape { primitives: self.primitives.iter().map(|p| p.translate(by)).collect() }
    }

    /// The central symmetric image `s-`.
    pub fn inverse(&self) -> Shape {
        Shape { primitives: self.primitives.iter().map(Primitive::negate).collect() }
    }

    /// One positive-area triangle per primitive, or the index of the first
    /// flat primitive.
    pub fn non_flat_witness(&self) -> Result<Vec<[Point; 3]>, GeometryError> {
        self.primitives
            .iter()
            .enumerate()
            .map(|(index, p)| p.fat_triangle().ok_or(GeometryError::FlatShape { index }))
            .collect()
    }

    pub fn is_non_flat(&self) -> bool {
        self.non_flat_witness().is_ok()
    }

    fn require_non_flat(&self) -> Result<(), GeometryError> {
        self.non_flat_witness().map(|_| ())
    }

    /// Exact bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut it = self.primitives.iter().map(Primitive::bounds);
        let (mut lo, mut hi) = it.next().expect("shapes are non-empty");
        for (l, h) in it {
            lo = Point::new(lo.x.min(l.x), lo.y.min(l.y));
            hi = Point::new(hi.x.max(h.x), hi.y.max(h.y));
        }
        (lo, hi)
    }

    /// A farthest point from the origin, ties broken by greater `x` then
    /// greater `y`. Exact for polygon vertices and for disks whose center
    /// has rational length (or lies at the origin); otherwise the returned
    /// point is an exact point of the circle whose direction is within
    /// `2^-40` of the true one.
    pub fn longest_vector(&self) -> Result<Point, GeometryError> {
        self.require_non_flat()?;
        let candidates = self.primitives.iter().flat_map(|p| match p {
            Primitive::Disk { center, radius } => {
                let dir = if center.is_zero() { Point::from_ints(1, 0) } else { center.clone() };
                vec![circle_point_toward(center, radius, &dir)]
            }
            Primitive::Polygon { vertices } => vertices.clone(),
        });
        Ok(candidates
            .max_by(|a, b| a.norm2().cmp(&b.norm2()).then_with(|| a.lex_cmp(b)))
            .expect("shapes are non-empty"))
    }

    /// A shape point maximising `|p . h_perp|`, where `h_perp` is `h` turned a
    /// quarter. Ties are broken by greater `x`, then greater `y`.
    pub fn max_orthogonal_vector(&self, h: &Point) -> Result<Point, GeometryError> {
        if h.is_zero() {
            return Err(GeometryError::ZeroVector);
        }
        let perp = h.perp();
        let candidates = self.primitives.iter().flat_map(|p| match p {
            Primitive::Disk { center, radius } => vec![
                circle_point_toward(center, radius, &perp),
                circle_point_toward(center, radius, &perp.neg()),
            ],
            Primitive::Polygon { vertices } => vertices.clone(),
        });
        let best = candidates
            .max_by(|a, b| {
                a.dot(&perp).abs().cmp(&b.dot(&perp).abs()).then_with(|| a.lex_cmp(b))
            })
            .expect("shapes are non-empty");
        if best.dot(&perp).is_zero() {
            return Err(GeometryError::ZeroProjection);
        }
        Ok(best)
    }
}

/// Sign of `a x + b y + c`, evaluated exactly.
#[derive(Debug, Clone)]
struct IntLinear {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    small: Option<(i128, i128, i128)>,
}

impl IntLinear {
    /// From rational coefficients, scaled to integers.
    fn new(a: Rational, b: Rational, c: Rational) -> Self {
        let d = a.denom().lcm(b.denom()).lcm(c.denom());
        let scale = |q: Rational| (q * Rational::from_integer(d.clone())).to_integer();
        let (a, b, c) = (scale(a), scale(b), scale(c));
        let small = match (a.to_i128(), b.to_i128(), c.to_i128()) {
            (Some(a), Some(b), Some(c)) => Some((a, b, c)),
            _ => None,
        };
        IntLinear { a, b, c, small }
    }

    fn sign(&self, x: i64, y: i64) -> Ordering {
        if let Some((a, b, c)) = self.small {
            let v = a
                .checked_mul(x as i128)
                .and_then(|ax| b.checked_mul(y as i128).and_then(|by| ax.checked_add(by)))
                .and_then(|s| s.checked_add(c));
            if let Some(v) = v {
                return v.cmp(&0);
            }
        }
        (&self.a * x + &self.b * y + &self.c).cmp(&BigInt::zero())
    }
}

/// `(d x - a)^2 + (d y - b)^2 <= c2`, evaluated exactly.
#[derive(Debug, Clone)]
struct IntDisk {
    d: BigInt,
    a: BigInt,
    b: BigInt,
    c2: BigInt,
    small: Option<(i128, i128, i128, i128)>,
}

impl IntDisk {
    fn contains(&self, x: i64, y: i64) -> bool {
        if let Some((d, a, b, c2)) = self.small {
            let term = |v: i64, o: i128| d.checked_mul(v as i128).and_then(|dv| dv.checked_sub(o)).and_then(|t| t.checked_mul(t));
            if let (Some(u), Some(w)) = (term(x, a), term(y, b)) {
                if let Some(s) = u.checked_add(w) {
                    return s <= c2;
                }
            }
        }
        let u = &self.d * x - &self.a;
        let w = &self.d * y - &self.b;
        &u * &u + &w * &w <= self.c2
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    Disk(IntDisk),
    HalfPlanes(Vec<IntLinear>),
    Segment { line: IntLinear, ends: [IntLinear; 2] },
}

/// A shape scaled by a ratio, compiled for fast exact lattice membership.
#[derive(Debug, Clone)]
pub struct ScaledShape {
    parts: Vec<Compiled>,
    x_range: (i64, i64),
    y_range: (i64, i64),
}

impl ScaledShape {
    pub fn new(shape: &Shape, r: &Rational) -> Result<Self, GeometryError> {
        if !r.is_positive() {
            return Err(GeometryError::NonPositiveRatio);
        }
        let parts = shape.primitives.iter().map(|p| compile(p, r)).collect();
        let (lo, hi) = shape.bounds();
        Ok(ScaledShape {
            parts,
            x_range: (floor_to_i64(&(&lo.x * r)), ceil_to_i64(&(&hi.x * r))),
            y_range: (floor_to_i64(&(&lo.y * r)), ceil_to_i64(&(&hi.y * r))),
        })
    }

    /// `true` when `(v.x / r, v.y / r)` lies in the shape.
    pub fn contains(&self, v: GridPoint) -> bool {
        self.parts.iter().any(|part| match part {
            Compiled::Disk(d) => d.contains(v.x, v.y),
            Compiled::HalfPlanes(hs) => hs.iter().all(|h| h.sign(v.x, v.y) != Ordering::Less),
            Compiled::Segment { line, ends } => {
                line.sign(v.x, v.y) == Ordering::Equal && ends.iter().all(|h| h.sign(v.x, v.y) != Ordering::Less)
            }
        })
    }

    /// All lattice points of the scaled shape, origin included, sorted.
    pub fn lattice_points(&self) -> Vec<GridPoint> {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let mut out = Vec::new();
        for x in x0..=x1 {
            for y in y0..=y1 {
                let v = GridPoint::new(x, y);
                if self.contains(v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

fn compile(p: &Primitive, r: &Rational) -> Compiled {
    match p {
        Primitive::Disk { center, radius } => {
            let (cx, cy, rr) = (&center.x * r, &center.y * r, radius * r);
            let d = cx.denom().lcm(cy.denom()).lcm(rr.denom());
            let dq = Rational::from_integer(d.clone());
            let a = (cx * &dq).to_integer();
            let b = (cy * &dq).to_integer();
            let c = (rr * &dq).to_integer();
            let c2 = &c * &c;
            let small = match (d.to_i128(), a.to_i128(), b.to_i128(), c2.to_i128()) {
                (Some(d), Some(a), Some(b), Some(c2)) => Some((d, a, b, c2)),
                _ => None,
            };
            Compiled::Disk(IntDisk { d, a, b, c2, small })
        }
        Primitive::Polygon { vertices } if p.has_positive_area() => {
            let n = vertices.len();
            let planes = (0..n)
                .filter_map(|i| {
                    let (v, w) = (&vertices[i], &vertices[(i + 1) % n]);
                    let e = w.sub(v);
                    (!e.is_zero()).then(|| edge_plane(&e, v, r))
                })
                .collect();
            Compiled::HalfPlanes(planes)
        }
        Primitive::Polygon { vertices } => {
            let (a, b) = segment_ends(vertices);
            let ab = b.sub(&a);
            // Through a, direction ab: cross(ab, p - r a) = 0, then
            // dot(ab, p - r a) >= 0 and dot(-ab, p - r b) >= 0.
            let line = edge_plane(&ab, &a, r);
            let dot_plane = |dir: &Point, base: &Point| {
                let base = base.scale(r);
                IntLinear::new(dir.x.clone(), dir.y.clone(), -dir.dot(&base))
            };
            Compiled::Segment { line, ends: [dot_plane(&ab, &a), dot_plane(&ab.neg(), &b)] }
        }
    }
}

/// `cross(e, p - r v) >= 0` as a linear form in the lattice point `p`.
fn edge_plane(e: &Point, v: &Point, r: &Rational) -> IntLinear {
    let rv = v.scale(r);
    IntLinear::new(-e.y.clone(), e.x.clone(), &e.y * &rv.x - &e.x * &rv.y)
}

/// The neighborhood `{(x, y) != (0, 0) : (x / r, y / r) in shape}`.
pub fn discretize(shape: &Shape, r: &Rational) -> Result<Neighborhood, GeometryError> {
    let points = ScaledShape::new(shape, r)?.lattice_points();
    let vectors: Vec<(i64, i64)> = points.into_iter().filter(|v| *v != GridPoint::ORIGIN).map(|v| (v.x, v.y)).collect();
    Neighborhood::new(vectors).map_err(|_| GeometryError::EmptyNeighborhood)
}

/// Number of movement vectors `|discretize(shape, r)|`, zero when empty.
pub fn count_at(shape: &Shape, r: &Rational) -> Result<usize, GeometryError> {
    let points = ScaledShape::new(shape, r)?.lattice_points();
    Ok(points.into_iter().filter(|v| *v != GridPoint::ORIGIN).count())
}

/// `true` when the discretized parts are pairwise disjoint and their union is
/// the discretized whole.
pub fn partition_check(parts: &[Shape], whole: &Shape, r: &Rational) -> Result<bool, GeometryError> {
    let whole = ScaledShape::new(whole, r)?.lattice_points();
    let mut seen = std::collections::BTreeSet::new();
    for part in parts {
        for v in ScaledShape::new(part, r)?.lattice_points() {
            if v == GridPoint::ORIGIN {
                continue;
            }
            if !seen.insert(v) {
                return Ok(false);
            }
        }
    }
    let whole: std::collections::BTreeSet<GridPoint> = whole.into_iter().filter(|v| *v != GridPoint::ORIGIN).collect();
    Ok(seen == whole)
}

/// A ratio `r0` with `|discretize(shape, r)| >= k` for every `r >= r0`.
///
/// The search doubles `r` until the count reaches `k`, then checks a band
/// of ratios above it. Beyond the band, the count is bounded below by the
/// lattice points of a square inscribed in some primitive, which grows with
/// `r`; the band always reaches that guaranteed regime.
pub fn find_ratio_for_count(shape: &Shape, k: usize) -> Result<Rational, GeometryError> {
    shape.require_non_flat()?;
    if k == 0 {
        return Ok(rat(1));
    }
    let guaranteed = guaranteed_ratio(shape, k);
    let mut r0 = ratio(1, 16);
    loop {
        while count_at(shape, &r0)? < k {
            r0 = &r0 * rat(2);
        }
        let top = (&r0 * rat(4)).max(guaranteed.clone());
        if band_holds(shape, k, &r0, &top)? {
            return Ok(r0);
        }
        r0 = &r0 * rat(2);
    }
}

/// Samples `[lo, hi]` on a grid fine enough that consecutive samples differ
/// by at most `1/64` of `lo` and checks the count at each.
fn band_holds(shape: &Shape, k: usize, lo: &Rational, hi: &Rational) -> Result<bool, GeometryError> {
    let step = lo / rat(64);
    let mut r = lo.clone();
    while &r <= hi {
        if count_at(shape, &r)? < k {
            return Ok(false);
        }
        r = &r + &step;
    }
    Ok(count_at(shape, hi)? >= k)
}

/// Ratio above which an inscribed square of some primitive holds more
/// than `k` lattice points at every scale.
fn guaranteed_ratio(shape: &Shape, k: usize) -> Rational {
    // A closed square of side s contains at least floor(s)^2 lattice points;
    // a disk of radius rho contains the square of side 1.4 rho.
    let side = Rational::from_integer(BigInt::from(k + 1).sqrt() + 2);
    shape
        .primitives
        .iter()
        .map(|p| p.inscribed_disk().1)
        .filter(|rho| rho.is_positive())
        .map(|rho| &side / (ratio(7, 5) * rho))
        .min()
        .expect("non-flat shapes have a primitive with positive area")
}

/// Pseudo-random ratio in `[lo, hi]` with a denominator of 1024.
pub fn sample_ratio<R: Rng>(rng: &mut R, lo: &Rational, hi: &Rational) -> Rational {
    let t = ratio(rng.gen_range(0..=1024), 1024);
    lo + (hi - lo) * t
}

/// `true` when `N+` equals the lattice points of its convex hull (origin
/// aside), i.e. it is the discretization of a convex shape.
pub fn is_convex_neighborhood(nb: &Neighborhood) -> bool {
    let pts: Vec<(i64, i64)> = nb.vectors().iter().map(|v| (v.dx, v.dy)).collect();
    let hull = convex_hull(&pts);
    let (x0, x1) = (pts.iter().map(|p| p.0).min().unwrap(), pts.iter().map(|p| p.0).max().unwrap());
    let (y0, y1) = (pts.iter().map(|p| p.1).min().unwrap(), pts.iter().map(|p| p.1).max().unwrap());
    for x in x0..=x1 {
        for y in y0..=y1 {
            if (x, y) == (0, 0) || !in_hull(&hull, (x, y)) {
                continue;
            }
            if !nb.contains(crate::grid::MovementVector::new(x, y)) {
                return false;
            }
        }
    }
    true
}

fn cross3(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; counterclockwise, collinear points dropped.
fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross3(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross3(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn in_hull(hull: &[(i64, i64)], p: (i64, i64)) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == p,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            cross3(a, b, p) == 0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
        }
        n => (0..n).all(|i| cross3(hull[i], hull[(i + 1) % n], p) >= 0),
    }
}

/// `true` when the part of the shape inside the open quarter-plane
/// `{p : p . u > 0, p . w > 0}` has positive area. `u` and `w` must be
/// orthogonal and non-zero.
pub fn quadrant_has_area(shape: &Shape, u: &Point, w: &Point) -> bool {
    shape.primitives.iter().any(|prim| match prim {
        Primitive::Disk { center, radius } => {
            // Squared distance from the center to the closed quadrant, in the
            // orthonormal frame (u / |u|, w / |w|).
            let (cu, cw) = (center.dot(u), center.dot(w));
            let (nu, nw) = (u.norm2(), w.norm2());
            let d2 = match (cu.is_positive(), cw.is_positive()) {
                (true, true) => rat(0),
                (false, true) => &cu * &cu / nu,
                (true, false) => &cw * &cw / nw,
                (false, false) => &cu * &cu / nu + &cw * &cw / nw,
            };
            d2 < radius * radius
        }
        Primitive::Polygon { vertices } => {
            let clipped = clip_half_plane(vertices, u, &rat(0));
            let clipped = clip_half_plane(&clipped, w, &rat(0));
            clipped.len() >= 3 && !double_area(&clipped).is_zero()
        }
    })
}

/// Convex polygons, one per primitive meeting the quadrant with positive
/// area, covering part of `shape` inside the closed quadrant. Disks are
/// replaced by an inscribed rational polygon first.
pub fn quadrant_pieces(shape: &Shape, u: &Point, w: &Point) -> Vec<Vec<Point>> {
    shape
        .primitives
        .iter()
        .filter_map(|prim| {
            let poly = match prim {
                Primitive::Disk { center, radius } => inscribed_polygon(center, radius),
                Primitive::Polygon { vertices } => vertices.clone(),
            };
            let clipped = clip_half_plane(&poly, u, &rat(0));
            let clipped = clip_half_plane(&clipped, w, &rat(0));
            (clipped.len() >= 3 && double_area(&clipped).is_positive()).then_some(clipped)
        })
        .collect()
}

/// The sampled ratios `step, 2 step, ...` up to `max`.
pub fn ratio_grid(step: &Rational, max: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut r = step.clone();
    while &r <= max {
        out.push(r.clone());
        r = &r + step;
    }
    out
}

impl Shape {
    /// Bounding radius: every point of the shape has norm at most this.
    pub fn bounding_radius(&self) -> Rational {
        let (lo, hi) = self.bounds();
        let m = [lo.x, lo.y, hi.x, hi.y].into_iter().map(|q| q.abs()).max().unwrap();
        m * rat(2)
    }
}
