//! Triangulations of planar point sets: validation, exhaustive enumeration,
//! the forbidden-edge decision search, and the exact MaxMin solver built on it.

use std::collections::BTreeSet;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::geom::{
    dist_sq, orient_det, orientation, point_on_segment, segments_cross_properly, Orientation,
    Point, Rational, Segment,
};

/// Default cap on the number of points for exhaustive search.
pub const DEFAULT_POINT_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TriangulationError {
    #[error("all points are collinear")]
    AllCollinear,
    #[error("point set has {points} points, above the search cap of {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("more than {limit} triangulations")]
    LimitExceeded { limit: usize },
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("duplicate point {0:?}")]
    DuplicatePoint(Point),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self, TriangulationError> {
        let mut seen = BTreeSet::new();
        for p in &points {
            if !seen.insert(p) {
                return Err(TriangulationError::DuplicatePoint(p.clone()));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn segment(&self, e: Edge) -> Segment {
        Segment::new(self.points[e.i].clone(), self.points[e.j].clone())
    }

    pub fn edge_len_sq(&self, e: Edge) -> Rational {
        dist_sq(&self.points[e.i], &self.points[e.j])
    }
}

impl std::ops::Index<usize> for PointSet {
    type Output = Point;
    fn index(&self, i: usize) -> &Point {
        &self.points[i]
    }
}

/// An undirected edge between two point indices, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
}

impl Edge {
    /// Panics if `a == b`.
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "edge endpoints must differ");
        if a < b {
            Self { i: a, j: b }
        } else {
            Self { i: b, j: a }
        }
    }

    pub fn has_endpoint(&self, v: usize) -> bool {
        self.i == v || self.j == v
    }
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.i, self.j].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        if a == b {
            return Err(serde::de::Error::custom("edge endpoints must differ"));
        }
        Ok(Edge::new(a, b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub edges: BTreeSet<Edge>,
    pub hull_size: usize,
}

impl Triangulation {
    /// Squared length of the shortest edge.
    pub fn min_edge_sq(&self, ps: &PointSet) -> Rational {
        self.edges
            .iter()
            .map(|&e| ps.edge_len_sq(e))
            .min()
            .expect("a triangulation has at least one edge")
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    /// Bounded faces: 3-cycles of the edge graph with no point inside.
    pub fn triangles(&self, ps: &PointSet) -> Vec<[usize; 3]> {
        let n = ps.len();
        let mut adj = vec![BTreeSet::new(); n];
        for e in &self.edges {
            adj[e.i].insert(e.j);
            adj[e.j].insert(e.i);
        }
        let mut out = Vec::new();
        for a in 0..n {
            for &b in adj[a].range(a + 1..) {
                for &c in adj[b].range(b + 1..) {
                    if !adj[a].contains(&c) {
                        continue;
                    }
                    let empty = (0..n)
                        .filter(|&k| k != a && k != b && k != c)
                        .all(|k| !strictly_inside(&ps[k], &ps[a], &ps[b], &ps[c]));
                    if empty {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }
}

fn strictly_inside(p: &Point, a: &Point, b: &Point, c: &Point) -> bool {
    let o = orientation(a, b, c);
    o != Orientation::Collinear
        && orientation(a, b, p) == o
        && orientation(b, c, p) == o
        && orientation(c, a, p) == o
}

/// Counterclockwise convex hull. Points lying on hull edges are reported as
/// hull vertices, since every triangulation must use the subdivided edges.
pub fn convex_hull(ps: &PointSet) -> Result<Vec<usize>, TriangulationError> {
    let n = ps.len();
    if n < 3 {
        return Err(TriangulationError::TooFewPoints(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (&ps[a].x, &ps[a].y).cmp(&(&ps[b].x, &ps[b].y)));

    // Andrew's monotone chain, strict corners only.
    let mut lower: Vec<usize> = Vec::new();
    for &i in &order {
        while lower.len() >= 2
            && orientation(&ps[lower[lower.len() - 2]], &ps[lower[lower.len() - 1]], &ps[i])
                != Orientation::CounterClockwise
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        while upper.len() >= 2
            && orientation(&ps[upper[upper.len() - 2]], &ps[upper[upper.len() - 1]], &ps[i])
                != Orientation::CounterClockwise
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    let corners: Vec<usize> = lower.into_iter().chain(upper).collect();
    if corners.len() < 3 {
        return Err(TriangulationError::AllCollinear);
    }

    let mut hull = Vec::new();
    for k in 0..corners.len() {
        let a = corners[k];
        let b = corners[(k + 1) % corners.len()];
        let s = Segment::new(ps[a].clone(), ps[b].clone());
        let mut on_edge: Vec<usize> = (0..n)
            .filter(|&m| m != a && m != b && point_on_segment(&ps[m], &s))
            .collect();
        on_edge.sort_by_key(|&m| dist_sq(&ps[a], &ps[m]));
        hull.push(a);
        hull.extend(on_edge);
    }
    Ok(hull)
}

fn hull_edges(hull: &[usize]) -> Vec<Edge> {
    (0..hull.len())
        .map(|k| Edge::new(hull[k], hull[(k + 1) % hull.len()]))
        .collect()
}

/// Number of edges every triangulation of `n` points with `h` hull vertices has.
pub fn expected_edge_count(n: usize, h: usize) -> usize {
    3 * n - h - 3
}

pub fn expected_triangle_count(n: usize, h: usize) -> usize {
    2 * n - h - 2
}

/// Whether the open segment of `e` contains no other point of the set.
fn is_admissible_edge(ps: &PointSet, e: Edge) -> bool {
    let s = ps.segment(e);
    (0..ps.len())
        .filter(|&k| k != e.i && k != e.j)
        .all(|k| !point_on_segment(&ps[k], &s))
}

pub fn is_valid_triangulation(ps: &PointSet, edges: &BTreeSet<Edge>) -> bool {
    let Ok(hull) = convex_hull(ps) else {
        return false;
    };
    let n = ps.len();
    if edges.len() != expected_edge_count(n, hull.len()) {
        return false;
    }
    if edges.iter().any(|e| e.j >= n || !is_admissible_edge(ps, *e)) {
        return false;
    }
    if hull_edges(&hull).iter().any(|h| !edges.contains(h)) {
        return false;
    }
    let segs: Vec<Segment> = edges.iter().map(|&e| ps.segment(e)).collect();
    for a in 0..segs.len() {
        for b in a + 1..segs.len() {
            if segments_cross_properly(&segs[a], &segs[b]) {
                return false;
            }
        }
    }
    true
}

/// Strict separation of `p` from `q` by edge `e`: `p` and `q` lie strictly on
/// opposite sides of the carrier of `e`, and the crossing with `pq` falls on
/// the closed segment `e`.
pub fn separates(e: Edge, p: usize, q: usize, ps: &PointSet) -> bool {
    let (a, b) = (&ps[e.i], &ps[e.j]);
    segment_separates(a, b, &ps[p], &ps[q])
}

/// Point-level form of [`separates`].
pub fn segment_separates(a: &Point, b: &Point, p: &Point, q: &Point) -> bool {
    let sp = orient_det(a, b, p);
    let sq = orient_det(a, b, q);
    if !((sp.is_positive() && sq.is_negative()) || (sp.is_negative() && sq.is_positive())) {
        return false;
    }
    let sa = orient_det(p, q, a);
    let sb = orient_det(p, q, b);
    !(sa.is_positive() && sb.is_positive() || sa.is_negative() && sb.is_negative())
}

/// A pair that breaks the edge-iff-unseparated equivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationViolation {
    pub p: usize,
    pub q: usize,
    pub in_triangulation: bool,
    pub separated: bool,
}

/// Checks, for every point pair, that the pair is an edge exactly when no
/// edge of `t` separates it. Returns every counterexample.
pub fn lemma2_audit(ps: &PointSet, t: &Triangulation) -> Vec<SeparationViolation> {
    let n = ps.len();
    let mut out = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            let in_t = t.contains(Edge::new(p, q));
            let separated = t
                .edges
                .iter()
                .any(|&e| !e.has_endpoint(p) && !e.has_endpoint(q) && separates(e, p, q, ps));
            if in_t == separated {
                out.push(SeparationViolation { p, q, in_triangulation: in_t, separated });
            }
        }
    }
    out
}

/// Fixed-width bitset over candidate-edge indices.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, k: usize) {
        self.0[k / 64] |= 1 << (k % 64);
    }
    fn get(&self, k: usize) -> bool {
        self.0[k / 64] >> (k % 64) & 1 == 1
    }
    fn intersects(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).any(|(a, b)| a & b != 0)
    }
}

/// Candidate edges in canonical (lexicographic) order together with their
/// pairwise crossing relation.
struct SearchSpace {
    edges: Vec<Edge>,
    crossings: Vec<Bits>,
    forced: Vec<bool>,
    target: usize,
    hull_size: usize,
}

impl SearchSpace {
    fn build(ps: &PointSet, forbidden: &BTreeSet<Edge>) -> Result<Option<Self>, TriangulationError> {
        let hull = convex_hull(ps)?;
        let hull_set: BTreeSet<Edge> = hull_edges(&hull).into_iter().collect();
        if hull_set.iter().any(|h| forbidden.contains(h)) {
            return Ok(None);
        }
        let n = ps.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let e = Edge::new(i, j);
                if !forbidden.contains(&e) && is_admissible_edge(ps, e) {
                    edges.push(e);
                }
            }
        }
        let segs: Vec<Segment> = edges.iter().map(|&e| ps.segment(e)).collect();
        let mut crossings = vec![Bits::new(edges.len()); edges.len()];
        for a in 0..edges.len() {
            for b in a + 1..edges.len() {
                if segments_cross_properly(&segs[a], &segs[b]) {
                    crossings[a].set(b);
                    crossings[b].set(a);
                }
            }
        }
        let forced = edges.iter().map(|e| hull_set.contains(e)).collect();
        Ok(Some(Self {
            edges,
            crossings,
            forced,
            target: expected_edge_count(n, hull.len()),
            hull_size: hull.len(),
        }))
    }

    /// Depth-first search over include/exclude decisions in canonical order.
    /// `visit` returns `false` to stop the search.
    fn search(&self, visit: &mut dyn FnMut(&[usize]) -> bool) {
        let mut chosen = Vec::with_capacity(self.target);
        let mut mask = Bits::new(self.edges.len());
        self.step(0, &mut chosen, &mut mask, visit);
    }

    fn step(
        &self,
        k: usize,
        chosen: &mut Vec<usize>,
        blocked: &mut Bits,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if chosen.len() == self.target {
            return visit(chosen);
        }
        if k == self.edges.len() || chosen.len() + (self.edges.len() - k) < self.target {
            return true;
        }
        if blocked.get(k) {
            return self.step(k + 1, chosen, blocked, visit);
        }
        // include
        let saved = blocked.clone();
        for (w, c) in blocked.0.iter_mut().zip(&self.crossings[k].0) {
            *w |= c;
        }
        chosen.push(k);
        let go_on = self.step(k + 1, chosen, blocked, visit);
        chosen.pop();
        *blocked = saved;
        if !go_on {
            return false;
        }
        // exclude: only sound if some later, still-available edge can cross it
        if self.forced[k] {
            return true;
        }
        let mut later = Bits::new(self.edges.len());
        for m in k + 1..self.edges.len() {
            if !blocked.get(m) {
                later.set(m);
            }
        }
        if !self.crossings[k].intersects(&later) {
            return true;
        }
        self.step(k + 1, chosen, blocked, visit)
    }

    fn to_triangulation(&self, chosen: &[usize]) -> Triangulation {
        Triangulation {
            edges: chosen.iter().map(|&k| self.edges[k]).collect(),
            hull_size: self.hull_size,
        }
    }
}

fn check_cap(ps: &PointSet, cap: usize) -> Result<(), TriangulationError> {
    if ps.len() > cap {
        return Err(TriangulationError::TooLarge { points: ps.len(), cap });
    }
    if ps.len() < 3 {
        return Err(TriangulationError::TooFewPoints(ps.len()));
    }
    Ok(())
}

/// Every triangulation of `ps`, each exactly once, in canonical order.
pub fn enumerate_triangulations(
    ps: &PointSet,
    limit: usize,
    cap: usize,
) -> Result<Vec<Triangulation>, TriangulationError> {
    check_cap(ps, cap)?;
    let space = SearchSpace::build(ps, &BTreeSet::new())?.expect("no forbidden edges");
    let mut out = Vec::new();
    let mut exceeded = false;
    space.search(&mut |chosen| {
        if out.len() == limit {
            exceeded = true;
            return false;
        }
        out.push(space.to_triangulation(chosen));
        true
    });
    if exceeded {
        return Err(TriangulationError::LimitExceeded { limit });
    }
    Ok(out)
}

/// The first triangulation in canonical order that uses no forbidden edge.
pub fn triangulation_exists_avoiding(
    ps: &PointSet,
    forbidden: &BTreeSet<Edge>,
    cap: usize,
) -> Result<Option<Triangulation>, TriangulationError> {
    check_cap(ps, cap)?;
    let Some(space) = SearchSpace::build(ps, forbidden)? else {
        return Ok(None);
    };
    let mut found = None;
    space.search(&mut |chosen| {
        found = Some(space.to_triangulation(chosen));
        false
    });
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxMinResult {
    pub optimum_sq: Rational,
    pub witness: Triangulation,
}

/// Exact MaxMin-length triangulation by binary search over the realised
/// squared edge lengths, each probe answered by the forbidden-edge search.
pub fn maxmin_triangulation(ps: &PointSet, cap: usize) -> Result<MaxMinResult, TriangulationError> {
    check_cap(ps, cap)?;
    convex_hull(ps)?;
    let n = ps.len();
    let mut lengths: Vec<Rational> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            lengths.push(ps.edge_len_sq(Edge::new(i, j)));
        }
    }
    lengths.sort();
    lengths.dedup();

    let probe = |c: &Rational| -> Result<Option<Triangulation>, TriangulationError> {
        let mut forbidden = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                let e = Edge::new(i, j);
                if &ps.edge_len_sq(e) < c {
                    forbidden.insert(e);
                }
            }
        }
        triangulation_exists_avoiding(ps, &forbidden, cap)
    };

    let mut best = probe(&lengths[0])?.expect("an unconstrained point set is triangulable");
    // invariant: lengths[lo] feasible, lengths[hi] infeasible (hi may be one past the end)
    let (mut lo, mut hi) = (0usize, lengths.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match probe(&lengths[mid])? {
            Some(t) => {
                best = t;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    if lo > 0 && best.min_edge_sq(ps) < lengths[lo] {
        best = probe(&lengths[lo])?.expect("threshold was feasible");
    }
    Ok(MaxMinResult { optimum_sq: best.min_edge_sq(ps), witness: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn pts(v: &[(i64, i64)]) -> PointSet {
        PointSet::new(v.iter().map(|&(x, y)| Point::from_ints(x, y)).collect()).unwrap()
    }

    fn square() -> PointSet {
        pts(&[(0, 0), (1, 0), (1, 1), (0, 1)])
    }

    fn edges(v: &[(usize, usize)]) -> BTreeSet<Edge> {
        v.iter().map(|&(a, b)| Edge::new(a, b)).collect()
    }

    #[test]
    fn hull_examples() {
        assert_eq!(convex_hull(&square()).unwrap().len(), 4);
        let with_inner = pts(&[(0, 0), (4, 0), (4, 4), (0, 4), (1, 2)]);
        let h = convex_hull(&with_inner).unwrap();
        assert_eq!(h.len(), 4);
        assert!(!h.contains(&4));
        assert_eq!(convex_hull(&pts(&[(0, 0), (1, 1), (2, 2)])), Err(TriangulationError::AllCollinear));
    }

    #[test]
    fn hull_keeps_points_on_edges() {
        let ps = pts(&[(0, 0), (2, 0), (2, 2), (0, 2), (1, 0), (0, 1), (1, 1)]);
        let h = convex_hull(&ps).unwrap();
        assert_eq!(h.len(), 6);
        assert_eq!(h, vec![0, 4, 1, 2, 3, 5]);
    }

    #[test]
    fn validity_examples() {
        let sq = square();
        assert!(is_valid_triangulation(&sq, &edges(&[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])));
        assert!(!is_valid_triangulation(&sq, &edges(&[(0, 1), (1, 2), (2, 3), (0, 3)])));
        assert!(!is_valid_triangulation(
            &sq,
            &edges(&[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)])
        ));
    }

    #[test]
    fn enumeration_small() {
        let tri = pts(&[(0, 0), (4, 0), (0, 3)]);
        assert_eq!(enumerate_triangulations(&tri, 100, 12).unwrap().len(), 1);
        assert_eq!(enumerate_triangulations(&square(), 100, 12).unwrap().len(), 2);
        assert_eq!(
            enumerate_triangulations(&square(), 1, 12),
            Err(TriangulationError::LimitExceeded { limit: 1 })
        );
        let many = pts(&[(0, 0), (1, 0), (2, 1), (3, 3), (1, 5), (0, 4)]);
        assert!(matches!(
            enumerate_triangulations(&many, 100, 5),
            Err(TriangulationError::TooLarge { points: 6, cap: 5 })
        ));
    }

    #[test]
    fn avoiding_examples() {
        let sq = square();
        let t = triangulation_exists_avoiding(&sq, &edges(&[(0, 2)]), 12).unwrap().unwrap();
        assert!(t.contains(Edge::new(1, 3)));
        assert!(triangulation_exists_avoiding(&sq, &edges(&[(0, 2), (1, 3)]), 12).unwrap().is_none());
        assert!(triangulation_exists_avoiding(&sq, &BTreeSet::new(), 12).unwrap().is_some());
        assert!(triangulation_exists_avoiding(&sq, &edges(&[(0, 1)]), 12).unwrap().is_none());
    }

    #[test]
    fn maxmin_examples() {
        let tri = pts(&[(0, 0), (4, 0), (0, 3)]);
        assert_eq!(maxmin_triangulation(&tri, 12).unwrap().optimum_sq, crate::geom::int(9));
        assert_eq!(maxmin_triangulation(&square(), 12).unwrap().optimum_sq, crate::geom::int(1));
    }

    #[test]
    fn separation_examples() {
        let sq = square();
        assert!(separates(Edge::new(0, 2), 3, 1, &sq));
        assert!(!separates(Edge::new(0, 1), 3, 2, &sq));
        // e = (0,0)-(2,0) touches segment pq at p = (1,0)
        let touch = pts(&[(0, 0), (2, 0), (1, 0), (1, 2)]);
        assert!(!separates(Edge::new(0, 1), 2, 3, &touch));
    }

    #[test]
    fn collinear_interior_point_blocks_edge() {
        let ps = pts(&[(0, 0), (1, 0), (2, 0), (1, 2)]);
        let all = enumerate_triangulations(&ps, 10, 12).unwrap();
        assert_eq!(all.len(), 1);
        assert!(!all[0].contains(Edge::new(0, 2)));
        assert!(lemma2_audit(&ps, &all[0]).is_empty());
    }

    #[test]
    fn lemma2_on_square() {
        let sq = square();
        for t in enumerate_triangulations(&sq, 10, 12).unwrap() {
            assert!(lemma2_audit(&sq, &t).is_empty());
        }
    }
}
