//! Exact rational geometry.
//!
//! Every predicate here is evaluated on [`Rational`] coordinates with no
//! tolerance. Lengths are compared in squared form so they stay rational.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational, always kept in canonical form.
pub type Rational = BigRational;

/// Builds `num/den` as a canonical rational.
///
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Formats a rational as `"num/den"`, including a `/1` for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| err())?;
    let d = BigInt::from_str(d).map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Serde adapter for a single rational stored as a `"num/den"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(int(x), int(y))
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn scale(&self, k: &Rational) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    /// `self + t * (other - self)`.
    pub fn lerp(&self, other: &Point, t: &Rational) -> Point {
        self.add(&other.sub(self).scale(t))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.x), to_f64(&self.y))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [format_rational(&self.x), format_rational(&self.y)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[String; 2]>::deserialize(d)?;
        Ok(Point::new(
            parse_rational(&x).map_err(D::Error::custom)?,
            parse_rational(&y).map_err(D::Error::custom)?,
        ))
    }
}

/// Lossy conversion, used only for rendering and for choosing construction
/// parameters that are audited exactly afterwards.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Closed line segment with distinct endpoints.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    /// Panics if `a == b`.
    pub fn new(a: Point, b: Point) -> Self {
        assert!(a != b, "degenerate segment at {a:?}");
        Self { a, b }
    }

    pub fn direction(&self) -> Point {
        self.b.sub(&self.a)
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}–{:?}", self.a, self.b)
    }
}

impl Serialize for Segment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [&self.a, &self.b].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Segment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[Point; 2]>::deserialize(d)?;
        if a == b {
            return Err(D::Error::custom("segment endpoints coincide"));
        }
        Ok(Segment { a, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
    Collinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    On,
}

pub fn cross(u: &Point, v: &Point) -> Rational {
    &u.x * &v.y - &u.y * &v.x
}

pub fn dot(u: &Point, v: &Point) -> Rational {
    &u.x * &v.x + &u.y * &v.y
}

/// Twice the signed area of `pqr`.
pub fn orient_det(p: &Point, q: &Point, r: &Point) -> Rational {
    cross(&q.sub(p), &r.sub(p))
}

pub fn orientation(p: &Point, q: &Point, r: &Point) -> Orientation {
    let d = orient_det(p, q, r);
    if d.is_positive() {
        Orientation::CounterClockwise
    } else if d.is_negative() {
        Orientation::Clockwise
    } else {
        Orientation::Collinear
    }
}

/// Classifies `p` against the carrier line of `s`, oriented from `s.a` to `s.b`.
pub fn side_of_line(p: &Point, s: &Segment) -> Side {
    match orientation(&s.a, &s.b, p) {
        Orientation::CounterClockwise => Side::Left,
        Orientation::Clockwise => Side::Right,
        Orientation::Collinear => Side::On,
    }
}

fn sign(r: &Rational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

/// Whether `p`, known to be collinear with `s`, lies within its bounding box.
fn within_box(p: &Point, s: &Segment) -> bool {
    let (lx, hx) = if s.a.x <= s.b.x { (&s.a.x, &s.b.x) } else { (&s.b.x, &s.a.x) };
    let (ly, hy) = if s.a.y <= s.b.y { (&s.a.y, &s.b.y) } else { (&s.b.y, &s.a.y) };
    lx <= &p.x && &p.x <= hx && ly <= &p.y && &p.y <= hy
}

pub fn point_on_segment(p: &Point, s: &Segment) -> bool {
    orient_det(&s.a, &s.b, p).is_zero() && within_box(p, s)
}

/// True iff the interiors of `s` and `t` cross transversally.
pub fn segments_cross_properly(s: &Segment, t: &Segment) -> bool {
    let d1 = sign(&orient_det(&s.a, &s.b, &t.a));
    let d2 = sign(&orient_det(&s.a, &s.b, &t.b));
    let d3 = sign(&orient_det(&t.a, &t.b, &s.a));
    let d4 = sign(&orient_det(&t.a, &t.b, &s.b));
    d1 * d2 < 0 && d3 * d4 < 0
}

/// The unique interior crossing point of two segments, if they cross properly.
pub fn segments_properly_cross(s: &Segment, t: &Segment) -> Option<Point> {
    if !segments_cross_properly(s, t) {
        return None;
    }
    line_intersection(s, t)
}

/// Intersection of the carrier lines of `s` and `t`, or `None` when parallel.
pub fn line_intersection(s: &Segment, t: &Segment) -> Option<Point> {
    let r = s.direction();
    let q = t.direction();
    let denom = cross(&r, &q);
    if denom.is_zero() {
        return None;
    }
    let u = cross(&t.a.sub(&s.a), &q) / denom;
    Some(s.a.lerp(&s.b, &u))
}

/// True iff the closed segments share at least one point.
pub fn segments_conflict(s: &Segment, t: &Segment) -> bool {
    let d1 = sign(&orient_det(&s.a, &s.b, &t.a));
    let d2 = sign(&orient_det(&s.a, &s.b, &t.b));
    let d3 = sign(&orient_det(&t.a, &t.b, &s.a));
    let d4 = sign(&orient_det(&t.a, &t.b, &s.b));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_box(&t.a, s))
        || (d2 == 0 && within_box(&t.b, s))
        || (d3 == 0 && within_box(&s.a, t))
        || (d4 == 0 && within_box(&s.b, t))
}

pub fn dist_sq(p: &Point, q: &Point) -> Rational {
    let d = p.sub(q);
    dot(&d, &d)
}

pub fn point_segment_dist_sq(p: &Point, s: &Segment) -> Rational {
    let d = s.direction();
    let len = dot(&d, &d);
    let t = dot(&p.sub(&s.a), &d) / &len;
    if !t.is_positive() {
        dist_sq(p, &s.a)
    } else if t >= Rational::one() {
        dist_sq(p, &s.b)
    } else {
        // squared distance to the carrier line
        let c = cross(&d, &p.sub(&s.a));
        &c * &c / len
    }
}

/// A point in homogeneous integer form `(x/w, y/w)` with `w > 0`. Predicates
/// on these avoid the gcd normalisation of rational arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPoint {
    pub x: BigInt,
    pub y: BigInt,
    pub w: BigInt,
}

impl From<&Point> for HPoint {
    fn from(p: &Point) -> Self {
        let w = p.x.denom().lcm(p.y.denom());
        let x = p.x.numer() * (&w / p.x.denom());
        let y = p.y.numer() * (&w / p.y.denom());
        HPoint { x, y, w }
    }
}

/// Sign of [`orient_det`] for homogeneous points.
pub fn orient_sign(p: &HPoint, q: &HPoint, r: &HPoint) -> i8 {
    let d = &p.x * (&q.y * &r.w - &q.w * &r.y) - &p.y * (&q.x * &r.w - &q.w * &r.x)
        + &p.w * (&q.x * &r.y - &q.y * &r.x);
    match d.sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
    }
}

/// Homogeneous form of `triangulation::segment_separates`.
pub fn separates_h(a: &HPoint, b: &HPoint, p: &HPoint, q: &HPoint) -> bool {
    if orient_sign(a, b, p) * orient_sign(a, b, q) >= 0 {
        return false;
    }
    orient_sign(p, q, a) * orient_sign(p, q, b) <= 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Point {
        Point::from_ints(x, y)
    }

    fn seg(a: (i64, i64), b: (i64, i64)) -> Segment {
        Segment::new(p(a.0, a.1), p(b.0, b.1))
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(orientation(&p(0, 0), &p(1, 0), &p(0, 1)), Orientation::CounterClockwise);
        assert_eq!(orientation(&p(0, 0), &p(1, 1), &p(2, 2)), Orientation::Collinear);
        assert_eq!(orientation(&p(0, 0), &p(2, 0), &p(1, -1)), Orientation::Clockwise);
    }

    #[test]
    fn proper_crossing_examples() {
        assert_eq!(segments_properly_cross(&seg((0, 0), (2, 2)), &seg((0, 2), (2, 0))), Some(p(1, 1)));
        assert_eq!(segments_properly_cross(&seg((0, 0), (1, 0)), &seg((2, 1), (3, 1))), None);
        assert_eq!(segments_properly_cross(&seg((0, 0), (2, 0)), &seg((2, 0), (3, 1))), None);
    }

    #[test]
    fn conflict_examples() {
        assert!(segments_conflict(&seg((0, 0), (2, 2)), &seg((0, 2), (2, 0))));
        assert!(!segments_conflict(&seg((0, 0), (1, 0)), &seg((2, 1), (3, 1))));
        assert!(segments_conflict(&seg((0, 0), (2, 0)), &seg((1, 0), (3, 0))));
        assert!(segments_conflict(&seg((0, 0), (2, 0)), &seg((2, 0), (3, 1))));
        assert!(!segments_conflict(&seg((0, 0), (1, 0)), &seg((2, 0), (3, 0))));
    }

    #[test]
    fn point_on_segment_examples() {
        let s = seg((0, 0), (2, 2));
        assert!(point_on_segment(&p(1, 1), &s));
        assert!(!point_on_segment(&p(3, 3), &s));
        assert!(!point_on_segment(&p(1, 0), &s));
    }

    #[test]
    fn side_examples() {
        let s = seg((0, 0), (1, 0));
        assert_eq!(side_of_line(&p(0, 1), &s), Side::Left);
        assert_eq!(side_of_line(&p(0, -1), &s), Side::Right);
        assert_eq!(side_of_line(&p(5, 0), &s), Side::On);
    }

    #[test]
    fn distances() {
        assert_eq!(dist_sq(&p(0, 0), &p(1, 0)), int(1));
        assert_eq!(dist_sq(&p(0, 0), &p(1, 1)), int(2));
        assert_eq!(dist_sq(&p(0, 0), &p(3, 4)), int(25));
        let s = seg((0, 0), (2, 0));
        assert_eq!(point_segment_dist_sq(&p(1, 1), &s), int(1));
        assert_eq!(point_segment_dist_sq(&p(3, 1), &s), int(2));
        assert_eq!(point_segment_dist_sq(&p(1, 0), &s), int(0));
    }

    #[test]
    fn rational_text_form() {
        assert_eq!(format_rational(&rat(3, 4)), "3/4");
        assert_eq!(format_rational(&int(-2)), "-2/1");
        assert_eq!(format_rational(&rat(6, -8)), "-3/4");
        assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn homogeneous_orientation_matches() {
        let pts = [Point::new(rat(1, 3), rat(2, 7)), Point::new(rat(-5, 6), rat(1, 2)), Point::new(rat(4, 9), rat(-3, 14)), Point::from_ints(2, 2)];
        for a in &pts {
            for b in &pts {
                for c in &pts {
                    let want = match orientation(a, b, c) {
                        Orientation::CounterClockwise => 1,
                        Orientation::Clockwise => -1,
                        Orientation::Collinear => 0,
                    };
                    assert_eq!(orient_sign(&a.into(), &b.into(), &c.into()), want);
                }
            }
        }
        let m = Point::new(rat(1, 2), rat(1, 2));
        let h: HPoint = (&m).into();
        assert_eq!((h.x.clone(), h.w.clone()), (BigInt::from(1), BigInt::from(2)));
    }
}
