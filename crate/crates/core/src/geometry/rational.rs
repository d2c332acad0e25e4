//! Exact rational points and the few planar primitives built on them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational number {0:?}: expected an integer, a decimal or p/q")]
pub struct ParseRationalError(pub String);

/// Parses `"3"`, `"-0.25"`, `"7.25"` or `"29/4"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
    if !digits_ok(int_part) || !digits_ok(frac_part) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&digits).map_err(|_| err())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Nearest integer, halves rounded away from zero.
pub fn round_to_i64(q: &Rational) -> i64 {
    let r = q.round();
    i64::try_from(r.to_integer()).expect("coordinate fits in i64")
}

pub fn floor_to_i64(q: &Rational) -> i64 {
    i64::try_from(q.floor().to_integer()).expect("coordinate fits in i64")
}

pub fn ceil_to_i64(q: &Rational) -> i64 {
    i64::try_from(q.ceil().to_integer()).expect("coordinate fits in i64")
}

/// Rational lower approximation of `sqrt(q)` with `2^-bits` absolute
/// precision; exact when `q` is the square of a rational.
pub fn sqrt_floor(q: &Rational, bits: u32) -> Rational {
    assert!(!q.is_negative(), "square root of a negative number");
    let (n, d) = (q.numer(), q.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        return Rational::new(sn, sd);
    }
    let scale = BigInt::one() << (2 * bits as usize);
    let scaled = (n * scale) / d;
    Rational::new(scaled.sqrt(), BigInt::one() << bits as usize)
}

/// A point (or vector) of the real plane with rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(rat(x), rat(y))
    }

    pub fn zero() -> Self {
        Point::from_ints(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn neg(&self) -> Point {
        Point::new(-&self.x, -&self.y)
    }

    pub fn scale(&self, k: &Rational) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    pub fn dot(&self, o: &Point) -> Rational {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn cross(&self, o: &Point) -> Rational {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn norm2(&self) -> Rational {
        self.dot(self)
    }

    /// The vector rotated a quarter turn: `(-y, x)`.
    pub fn perp(&self) -> Point {
        Point::new(-&self.y, self.x.clone())
    }

    pub fn transpose(&self) -> Point {
        Point::new(self.y.clone(), self.x.clone())
    }

    /// Lexicographic order on `(x, y)`.
    pub fn lex_cmp(&self, o: &Point) -> Ordering {
        self.x.cmp(&o.x).then_with(|| self.y.cmp(&o.y))
    }

    /// Nearest lattice point.
    pub fn round(&self) -> (i64, i64) {
        (round_to_i64(&self.x), round_to_i64(&self.y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.x), format_rational(&self.y))
    }
}

/// Point of the circle of the given center and radius whose direction from
/// the center approximates `dir`. The result lies exactly on the circle
/// (rational parametrisation); it points exactly along `dir` whenever the
/// length of `dir` is rational.
pub fn circle_point_toward(center: &Point, radius: &Rational, dir: &Point) -> Point {
    assert!(!dir.is_zero(), "direction must be non-zero");
    if dir.x.is_negative() {
        let mirrored = circle_point_toward(&Point::zero(), radius, &dir.neg());
        return center.sub(&mirrored);
    }
    // t = tan(theta / 2) = y / (|d| + x), finite since x >= 0 and d != 0.
    let len = sqrt_floor(&dir.norm2(), 48);
    let t = &dir.y / (len + &dir.x);
    center.add(&unit_circle(&t).scale(radius))
}

/// `((1 - t^2) / (1 + t^2), 2t / (1 + t^2))`, a rational point of the unit circle.
pub fn unit_circle(t: &Rational) -> Point {
    let t2 = t * t;
    let den = rat(1) + &t2;
    Point::new((rat(1) - &t2) / &den, (rat(2) * t) / den)
}

/// Vertices (counterclockwise) of a polygon inscribed in the given circle.
pub fn inscribed_polygon(center: &Point, radius: &Rational) -> Vec<Point> {
    const STEPS: i64 = 8;
    let mut right: Vec<Point> = (-STEPS..STEPS).map(|j| unit_circle(&ratio(j, STEPS))).collect();
    let left: Vec<Point> = right.iter().map(Point::neg).collect();
    right.extend(left);
    right.into_iter().map(|p| center.add(&p.scale(radius))).collect()
}

/// Twice the signed area of a polygon (positive when counterclockwise).
pub fn double_area(poly: &[Point]) -> Rational {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(&poly[(i + 1) % n])).fold(rat(0), |a, b| a + b)
}

/// Area centroid of a polygon with non-zero area.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let a = double_area(poly);
    assert!(!a.is_zero(), "centroid of a degenerate polygon");
    let (mut cx, mut cy) = (rat(0), rat(0));
    for i in 0..n {
        let (p, q) = (&poly[i], &poly[(i + 1) % n]);
        let w = p.cross(q);
        cx += (&p.x + &q.x) * &w;
        cy += (&p.y + &q.y) * &w;
    }
    let k = a * rat(3);
    Point::new(cx / &k, cy / k)
}

/// Keeps the part of a convex polygon where `normal . p >= offset`.
pub fn clip_half_plane(poly: &[Point], normal: &Point, offset: &Rational) -> Vec<Point> {
    let n = poly.len();
    let side = |p: &Point| normal.dot(p) - offset;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (p, q) = (&poly[i], &poly[(i + 1) % n]);
        let (sp, sq) = (side(p), side(q));
        if !sp.is_negative() {
            out.push(p.clone());
        }
        if (sp.is_negative() && sq.is_positive()) || (sp.is_positive() && sq.is_negative()) {
            let t = &sp / (&sp - &sq);
            out.push(p.add(&q.sub(p).scale(&t)));
        }
    }
    out
}

/// `true` when the open segments `]a, b[` and `]c, d[` share a point.
pub fn open_segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let ab = b.sub(a);
    let cd = d.sub(c);
    let denom = ab.cross(&cd);
    if denom.is_zero() {
        // Parallel: they meet only when collinear with overlapping interiors.
        if !ab.cross(&c.sub(a)).is_zero() {
            return false;
        }
        let len = ab.norm2();
        if len.is_zero() || cd.norm2().is_zero() {
            return false;
        }
        let t_c = ab.dot(&c.sub(a)) / &len;
        let t_d = ab.dot(&d.sub(a)) / &len;
        let (lo, hi) = if t_c <= t_d { (t_c, t_d) } else { (t_d, t_c) };
        return lo < rat(1) && hi > rat(0);
    }
    let ac = c.sub(a);
    let t = ac.cross(&cd) / &denom;
    let u = ac.cross(&ab) / &denom;
    let (zero, one) = (rat(0), rat(1));
    t > zero && t < one && u > zero && u < one
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("7.25").unwrap(), ratio(29, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("29/4").unwrap(), ratio(29, 4));
        assert_eq!(parse_rational("3").unwrap(), rat(3));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        for bad in ["", "x", "1/0", "1.2.3", "-", "1e3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formatting_round_trips() {
        for q in [ratio(29, 4), rat(-3), ratio(-1, 3), rat(0)] {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
        assert_eq!(format_rational(&ratio(6, 4)), "3/2");
    }

    #[test]
    fn square_roots() {
        assert_eq!(sqrt_floor(&ratio(9, 4), 20), ratio(3, 2));
        let s = sqrt_floor(&rat(2), 30);
        assert!(&s * &s <= rat(2));
        let above = &s + ratio(1, 1 << 29);
        assert!(&above * &above > rat(2));
    }

    #[test]
    fn circle_points_are_exact() {
        let c = Point::from_ints(1, -2);
        let r = ratio(3, 2);
        for dir in [(1, 0), (0, 1), (-1, 0), (0, -1), (3, 4), (-5, 2), (1, 1)] {
            let p = circle_point_toward(&c, &r, &Point::from_ints(dir.0, dir.1));
            assert_eq!(p.sub(&c).norm2(), &r * &r);
        }
        let p = circle_point_toward(&Point::zero(), &rat(5), &Point::from_ints(3, 4));
        assert_eq!(p, Point::from_ints(3, 4));
        let p = circle_point_toward(&Point::zero(), &rat(1), &Point::from_ints(-2, 0));
        assert_eq!(p, Point::from_ints(-1, 0));
    }

    #[test]
    fn inscribed_polygon_is_ccw_and_on_circle() {
        let poly = inscribed_polygon(&Point::zero(), &rat(2));
        assert!(double_area(&poly) > rat(0));
        assert!(poly.iter().all(|p| p.norm2() == rat(4)));
    }

    #[test]
    fn clipping_a_square() {
        let sq = vec![Point::from_ints(0, 0), Point::from_ints(2, 0), Point::from_ints(2, 2), Point::from_ints(0, 2)];
        let half = clip_half_plane(&sq, &Point::from_ints(1, 0), &rat(1));
        assert_eq!(double_area(&half), rat(4));
        assert_eq!(centroid(&half), Point::new(ratio(3, 2), rat(1)));
        assert!(clip_half_plane(&sq, &Point::from_ints(1, 0), &rat(3)).is_empty());
    }

    #[test]
    fn segment_intersection() {
        let p = |x, y| Point::from_ints(x, y);
        assert!(open_segments_intersect(&p(0, 0), &p(2, 2), &p(0, 2), &p(2, 0)));
        assert!(!open_segments_intersect(&p(0, 0), &p(1, 1), &p(1, 1), &p(2, 0)));
        assert!(!open_segments_intersect(&p(0, 0), &p(2, 0), &p(0, 1), &p(2, 1)));
        assert!(open_segments_intersect(&p(0, 0), &p(2, 0), &p(1, 0), &p(3, 0)));
        assert!(!open_segments_intersect(&p(0, 0), &p(1, 0), &p(1, 0), &p(3, 0)));
    }
}
