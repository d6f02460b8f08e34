//! Straight-line spine drawing of the variable–clause incidence graph.
//!
//! Variables sit on the x-axis at even integer abscissae. Each clause vertex
//! sits above or below the spine, centred over the span of its variables at an
//! integer height level, and is joined to its variables by straight legs.

use serde::{Deserialize, Serialize};

use super::ReductionError;
use crate::cnf::{ClauseSide, Cnf3, LayoutHints};
use crate::geom::{int, orient_det, point_on_segment, segments_conflict, Point, Rational, Segment};

/// Default constant `K` in the scale factor `K * n^2`.
pub const SCALE_CONSTANT: i64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEdge {
    pub var: usize,
    pub clause: usize,
    /// Position of the literal inside its clause.
    pub literal: usize,
    pub positive: bool,
    pub segment: Segment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceLayout {
    pub var_pos: Vec<Point>,
    pub clause_pos: Vec<Point>,
    pub clause_side: Vec<ClauseSide>,
    pub edges: Vec<LayoutEdge>,
    /// Product of all scale factors applied so far.
    #[serde(with = "crate::geom::rational_str")]
    pub scale: Rational,
}

impl IncidenceLayout {
    pub fn vertices(&self) -> impl Iterator<Item = &Point> {
        self.var_pos.iter().chain(&self.clause_pos)
    }

    /// Pairs of legs that cross, overlap or run through a foreign vertex.
    pub fn crossing_defects(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for a in 0..self.edges.len() {
            for b in a + 1..self.edges.len() {
                if legs_clash(&self.edges[a].segment, &self.edges[b].segment) {
                    bad.push((a, b));
                }
            }
        }
        bad
    }
}

/// Two legs clash unless they are disjoint or meet only in one shared endpoint.
fn legs_clash(s: &Segment, t: &Segment) -> bool {
    let shared = [(&s.a, &t.a, &s.b, &t.b), (&s.a, &t.b, &s.b, &t.a), (&s.b, &t.a, &s.a, &t.b), (&s.b, &t.b, &s.a, &t.a)]
        .into_iter()
        .find(|(p, q, _, _)| p == q);
    match shared {
        Some((_, _, other_s, other_t)) => {
            // same-direction collinear legs overlap near the shared endpoint
            point_on_segment(other_t, s) || point_on_segment(other_s, t)
        }
        None => segments_conflict(s, t),
    }
}

fn leg_hits_vertex(leg: &Segment, vertices: &[&Point]) -> bool {
    vertices
        .iter()
        .any(|v| **v != leg.a && **v != leg.b && point_on_segment(v, leg))
}

struct Placement {
    side: ClauseSide,
    level: u32,
}

/// Lays the incidence graph out on a spine. Hinted clauses keep their side
/// (and level, if given); the rest are placed greedily, narrowest span first,
/// at the lowest level and side that keeps the drawing planar.
pub fn layout_incidence_graph(cnf: &Cnf3, hints: Option<&LayoutHints>) -> Result<IncidenceLayout, ReductionError> {
    let empty = LayoutHints::default();
    let hints = hints.unwrap_or(&empty);
    let spine: Vec<usize> = hints.spine.clone().unwrap_or_else(|| (0..cnf.num_vars).collect());
    let mut rank = vec![0i64; cnf.num_vars];
    for (r, &v) in spine.iter().enumerate() {
        rank[v] = r as i64;
    }
    let var_pos: Vec<Point> = (0..cnf.num_vars).map(|v| Point::from_ints(2 * rank[v], 0)).collect();

    let spans: Vec<(i64, i64)> = cnf
        .clauses
        .iter()
        .map(|c| {
            let xs = c.iter().map(|l| 2 * rank[l.var]);
            (xs.clone().min().unwrap_or(0), xs.max().unwrap_or(0))
        })
        .collect();

    let mut order: Vec<usize> = (0..cnf.clauses.len()).collect();
    order.sort_by_key(|&c| (!hints.clauses.contains_key(&c), spans[c].1 - spans[c].0, c));

    let max_level = 2 * cnf.clauses.len() as u32 + 2;
    let mut placed: Vec<Option<Placement>> = (0..cnf.clauses.len()).map(|_| None).collect();

    for &c in &order {
        let (sides, levels): (Vec<ClauseSide>, Vec<u32>) = match hints.clauses.get(&c) {
            Some(h) => (vec![h.side], h.level.map_or_else(|| (1..=max_level).collect(), |l| vec![l])),
            None => (vec![ClauseSide::Above, ClauseSide::Below], (1..=max_level).collect()),
        };
        let mut ok = None;
        'search: for &level in &levels {
            for &side in &sides {
                placed[c] = Some(Placement { side, level });
                if partial_is_planar(cnf, &var_pos, &spans, &placed) {
                    ok = Some(());
                    break 'search;
                }
            }
        }
        if ok.is_none() {
            placed[c] = None;
            return Err(ReductionError::NotPlanarWithHints { clause: c });
        }
    }

    let placed: Vec<Placement> = placed.into_iter().map(|p| p.expect("all clauses placed")).collect();
    let clause_pos: Vec<Point> = (0..cnf.clauses.len()).map(|c| apex(&spans[c], &placed[c])).collect();
    let mut edges = Vec::new();
    for (c, clause) in cnf.clauses.iter().enumerate() {
        for (k, l) in clause.iter().enumerate() {
            edges.push(LayoutEdge {
                var: l.var,
                clause: c,
                literal: k,
                positive: l.positive,
                segment: Segment::new(var_pos[l.var].clone(), clause_pos[c].clone()),
            });
        }
    }
    Ok(IncidenceLayout {
        var_pos,
        clause_pos,
        clause_side: placed.iter().map(|p| p.side).collect(),
        edges,
        scale: int(1),
    })
}

fn apex(span: &(i64, i64), p: &Placement) -> Point {
    let y = match p.side {
        ClauseSide::Above => p.level as i64,
        ClauseSide::Below => -(p.level as i64),
    };
    Point::from_ints((span.0 + span.1) / 2, y)
}

fn partial_is_planar(cnf: &Cnf3, var_pos: &[Point], spans: &[(i64, i64)], placed: &[Option<Placement>]) -> bool {
    let apexes: Vec<Option<Point>> = placed
        .iter()
        .enumerate()
        .map(|(c, p)| p.as_ref().map(|p| apex(&spans[c], p)))
        .collect();
    let mut vertices: Vec<&Point> = var_pos.iter().collect();
    for a in apexes.iter().flatten() {
        if vertices.contains(&a) {
            return false;
        }
        vertices.push(a);
    }
    let mut legs = Vec::new();
    for (c, clause) in cnf.clauses.iter().enumerate() {
        if let Some(a) = &apexes[c] {
            for l in clause {
                legs.push(Segment::new(var_pos[l.var].clone(), a.clone()));
            }
        }
    }
    for (i, leg) in legs.iter().enumerate() {
        if leg_hits_vertex(leg, &vertices) {
            return false;
        }
        if legs[i + 1..].iter().any(|o| legs_clash(leg, o)) {
            return false;
        }
    }
    true
}

/// Multiplies every coordinate by `K * n^2` with the default `K`.
pub fn scale_layout(l: &IncidenceLayout, n: usize) -> IncidenceLayout {
    scale_layout_with(l, n, SCALE_CONSTANT)
}

pub fn scale_layout_with(l: &IncidenceLayout, n: usize, constant: i64) -> IncidenceLayout {
    let n = n as i64;
    let k = int(constant * n * n);
    let sc = |p: &Point| p.scale(&k);
    IncidenceLayout {
        var_pos: l.var_pos.iter().map(sc).collect(),
        clause_pos: l.clause_pos.iter().map(sc).collect(),
        clause_side: l.clause_side.clone(),
        edges: l
            .edges
            .iter()
            .map(|e| LayoutEdge { segment: Segment::new(sc(&e.segment.a), sc(&e.segment.b)), ..e.clone() })
            .collect(),
        scale: &l.scale * &k,
    }
}

/// Smallest squared distance between two distinct layout vertices.
pub fn min_vertex_dist_sq(l: &IncidenceLayout) -> Option<Rational> {
    let v: Vec<&Point> = l.vertices().collect();
    let mut best: Option<Rational> = None;
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            let d = crate::geom::dist_sq(v[a], v[b]);
            if best.as_ref().is_none_or(|x| &d < x) {
                best = Some(d);
            }
        }
    }
    best
}

/// Exact check that no leg runs through another leg's direction at a vertex.
pub fn has_degenerate_directions(l: &IncidenceLayout) -> bool {
    for a in 0..l.edges.len() {
        for b in a + 1..l.edges.len() {
            let (ea, eb) = (&l.edges[a], &l.edges[b]);
            if ea.var == eb.var {
                let da = ea.segment.b.sub(&ea.segment.a);
                let db = eb.segment.b.sub(&eb.segment.a);
                let d = orient_det(&Point::from_ints(0, 0), &da, &db);
                if num_traits::Zero::is_zero(&d) && num_traits::Signed::is_positive(&crate::geom::dot(&da, &db)) {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{figure_formula, ClauseHint};

    #[test]
    fn single_clause_layout() {
        let cnf = Cnf3::from_dimacs_clauses(3, &[&[1, 2, -3]]).unwrap();
        let l = layout_incidence_graph(&cnf, None).unwrap();
        assert_eq!(l.var_pos.len(), 3);
        assert_eq!(l.edges.len(), 3);
        assert_eq!(l.clause_side, vec![ClauseSide::Above]);
        assert!(l.crossing_defects().is_empty());
    }

    #[test]
    fn figure_layout_uses_both_sides() {
        let l = layout_incidence_graph(&figure_formula(), None).unwrap();
        assert_eq!(l.edges.len(), 9);
        assert!(l.crossing_defects().is_empty());
        assert!(l.clause_side.contains(&ClauseSide::Above));
        assert!(l.clause_side.contains(&ClauseSide::Below));
        assert!(!has_degenerate_directions(&l));
    }

    #[test]
    fn forced_crossing_is_rejected() {
        // (x1 ∨ x3) and (x2 ∨ x4) interleave; pinning both above forces a crossing
        let cnf = Cnf3::from_dimacs_clauses(4, &[&[1, 3], &[2, 4]]).unwrap();
        let mut hints = LayoutHints::default();
        hints.clauses.insert(0, ClauseHint { side: ClauseSide::Above, level: Some(1) });
        hints.clauses.insert(1, ClauseHint { side: ClauseSide::Above, level: Some(1) });
        assert_eq!(
            layout_incidence_graph(&cnf, Some(&hints)),
            Err(ReductionError::NotPlanarWithHints { clause: 1 })
        );
        // without hints the greedy layout separates them
        assert!(layout_incidence_graph(&cnf, None).is_ok());
    }

    #[test]
    fn scaling() {
        let cnf = Cnf3::from_dimacs_clauses(4, &[&[1, 2, 3, ], &[-4]]).unwrap();
        let l = layout_incidence_graph(&cnf, None).unwrap();
        let s = scale_layout(&l, 4);
        assert_eq!(s.scale, int(64));
        assert!(min_vertex_dist_sq(&s).unwrap() >= int(64 * 64));

        let empty = layout_incidence_graph(&Cnf3::new(0, vec![]).unwrap(), None).unwrap();
        assert_eq!(scale_layout(&empty, 4).edges, empty.edges);
        assert!(scale_layout(&empty, 4).var_pos.is_empty());
    }
}
