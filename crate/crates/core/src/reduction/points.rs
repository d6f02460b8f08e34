//! From a covering instance to a point set: perturbation, clearance, ε-pairs.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gadget::{angle_of, unit_vector};
use super::ReductionError;
use crate::cds::CdsInstance;
use crate::geom::{
    dist_sq, dot, int, line_intersection, orient_sign, point_on_segment, point_segment_dist_sq, separates_h, to_f64, HPoint,
    Point, Rational, Segment,
};
use crate::triangulation::{segment_separates, Edge, PointSet};

/// Number of perturbation schedules tried before giving up.
pub const PERTURB_SCHEDULES: u64 = 8;

/// Distinct points of `Q ∪ T` (stabber endpoints first, then targets) and,
/// for each, the stabbers whose endpoint set or covered targets contain it.
struct PointTable {
    points: Vec<Point>,
    hpoints: Vec<HPoint>,
    members: Vec<Vec<usize>>,
}

impl PointTable {
    fn new(inst: &CdsInstance) -> Self {
        let mut points: Vec<Point> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let intern = |p: &Point, s: Option<usize>, points: &mut Vec<Point>, members: &mut Vec<Vec<usize>>| {
            let id = match points.iter().position(|q| q == p) {
                Some(i) => i,
                None => {
                    points.push(p.clone());
                    members.push(Vec::new());
                    points.len() - 1
                }
            };
            if let Some(s) = s {
                if !members[id].contains(&s) {
                    members[id].push(s);
                }
            }
            id
        };
        for (s, seg) in inst.stabbers().iter().enumerate() {
            intern(&seg.a, Some(s), &mut points, &mut members);
            intern(&seg.b, Some(s), &mut points, &mut members);
        }
        for (t, p) in inst.targets().iter().enumerate() {
            let id = intern(p, None, &mut points, &mut members);
            for &s in inst.covering(t) {
                if !members[id].contains(&s) {
                    members[id].push(s);
                }
            }
        }
        let hpoints = points.iter().map(HPoint::from).collect();
        Self { points, hpoints, members }
    }

    fn allowed(&self, i: usize, j: usize, k: usize) -> bool {
        self.members[i]
            .iter()
            .any(|s| self.members[j].contains(s) && self.members[k].contains(s))
    }

    /// First collinear triple not explained by a single stabber.
    fn stray_collinearity(&self) -> Option<[usize; 3]> {
        let n = self.points.len();
        let h = &self.hpoints;
        (0..n).into_par_iter().find_map_first(|i| {
            for j in i + 1..n {
                for k in j + 1..n {
                    if orient_sign(&h[i], &h[j], &h[k]) == 0 && !self.allowed(i, j, k) {
                        return Some([i, j, k]);
                    }
                }
            }
            None
        })
    }
}

/// Moves every free point of the instance by a small rational offset and
/// re-derives the dependent ones, so that the only collinear triples left are
/// a stabber with points it covers. Targets on exactly two stabbers are
/// recomputed as their crossing; any other target is moved itself and the
/// stabbers through it are re-aimed at its new position.
pub fn perturb(inst: &CdsInstance) -> Result<CdsInstance, ReductionError> {
    perturb_from(inst, 0)
}

/// As [`perturb`], trying schedules `first..first + PERTURB_SCHEDULES`.
pub fn perturb_from(inst: &CdsInstance, first: u64) -> Result<CdsInstance, ReductionError> {
    let mut last = String::new();
    for schedule in first..first.saturating_add(PERTURB_SCHEDULES) {
        match perturb_with_schedule(inst, schedule) {
            Ok(p) => match audit_perturbation(inst, &p) {
                Ok(()) => return Ok(p),
                Err(e) => last = e,
            },
            Err(e) => last = e,
        }
    }
    Err(ReductionError::AuditFailed(last))
}

pub fn perturb_with_schedule(inst: &CdsInstance, schedule: u64) -> Result<CdsInstance, String> {
    let n = (2 * inst.stabbers().len() + inst.targets().len()).max(3) as i64;
    let unit = Rational::new(BigInt::one(), BigInt::from(n * n));
    let mut rng = ChaCha8Rng::seed_from_u64(schedule);
    let mut k = 0u32;
    let mut offset = || {
        let (a, b) = loop {
            let a: i64 = rng.gen_range(-1..=1);
            let b: i64 = rng.gen_range(-1..=1);
            if a != 0 || b != 0 {
                break (a, b);
            }
        };
        let mag = &unit / Rational::from_integer(BigInt::one() << k);
        k += 1;
        Point::new(int(a) * &mag, int(b) * &mag)
    };

    let pinned: Vec<bool> = (0..inst.targets().len()).map(|t| inst.covering(t).len() != 2).collect();
    let mut pin_of: Vec<Option<usize>> = vec![None; inst.stabbers().len()];
    for t in 0..inst.targets().len() {
        if pinned[t] {
            for &s in inst.covering(t) {
                if pin_of[s].replace(t).is_some() {
                    return Err(format!("stabber {s} carries two pinned targets"));
                }
            }
        }
    }

    let mut ends: Vec<(Point, Option<Point>)> = Vec::new();
    for (s, seg) in inst.stabbers().iter().enumerate() {
        let a = seg.a.add(&offset());
        let b = if pin_of[s].is_none() { Some(seg.b.add(&offset())) } else { None };
        ends.push((a, b));
    }
    let mut targets: Vec<Option<Point>> = vec![None; inst.targets().len()];
    for (t, p) in inst.targets().iter().enumerate() {
        if pinned[t] {
            targets[t] = Some(p.add(&offset()));
        }
    }
    let mut stabbers = Vec::new();
    for (s, seg) in inst.stabbers().iter().enumerate() {
        let (a, b) = &ends[s];
        let b = match (b, pin_of[s]) {
            (Some(b), _) => b.clone(),
            (None, Some(t)) => {
                let d = seg.b.sub(&seg.a);
                let mu = dot(&inst.targets()[t].sub(&seg.a), &d) / dot(&d, &d);
                if mu.is_zero() {
                    return Err(format!("target {t} is an endpoint of stabber {s}"));
                }
                let tp = targets[t].as_ref().expect("pinned target moved");
                a.add(&tp.sub(a).scale(&mu.recip()))
            }
            (None, None) => unreachable!(),
        };
        if *a == b {
            return Err(format!("stabber {s} collapsed"));
        }
        stabbers.push(Segment::new(a.clone(), b));
    }
    for t in 0..inst.targets().len() {
        if targets[t].is_none() {
            let c = inst.covering(t);
            let p = line_intersection(&stabbers[c[0]], &stabbers[c[1]])
                .ok_or_else(|| format!("stabbers of target {t} became parallel"))?;
            targets[t] = Some(p);
        }
    }
    Ok(CdsInstance::new(stabbers, targets.into_iter().map(|t| t.expect("target placed")).collect()))
}

/// Checks that a perturbed copy keeps every coverage and conflict relation
/// and has no collinear triple other than a stabber with its own points.
pub fn audit_perturbation(orig: &CdsInstance, p: &CdsInstance) -> Result<(), String> {
    if orig.stabbers().len() != p.stabbers().len() || orig.targets().len() != p.targets().len() {
        return Err("size changed".into());
    }
    for t in 0..orig.targets().len() {
        if orig.covering(t) != p.covering(t) {
            return Err(format!("coverage of target {t} changed"));
        }
    }
    let m = orig.stabbers().len();
    for a in 0..m {
        for b in a + 1..m {
            if orig.conflict(a, b) != p.conflict(a, b) {
                return Err(format!("conflict {a}-{b} changed"));
            }
        }
    }
    let table = PointTable::new(p);
    if table.points.len() != 2 * m + p.targets().len() {
        return Err("points coincide".into());
    }
    if let Some(t) = table.stray_collinearity() {
        return Err(format!("collinear points {t:?}"));
    }
    Ok(())
}

fn seg_dist_sq_f64(r: (f64, f64), p: (f64, f64), q: (f64, f64)) -> f64 {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let t = ((r.0 - p.0) * dx + (r.1 - p.1) * dy) / (dx * dx + dy * dy);
    let t = t.clamp(0.0, 1.0);
    let (ex, ey) = (p.0 + t * dx - r.0, p.1 + t * dy - r.1);
    ex * ex + ey * ey
}

/// Exact squared clearance: the minimum squared distance from a point of
/// `Q ∪ T` to a segment spanned by two other points that does not contain it.
/// Candidates are screened in floating point and the minimum is then
/// evaluated exactly.
pub fn compute_clearance(inst: &CdsInstance) -> Result<Rational, ReductionError> {
    let table = PointTable::new(inst);
    let (pts, h) = (&table.points, &table.hpoints);
    let f: Vec<(f64, f64)> = pts.iter().map(Point::to_f64).collect();
    let n = pts.len();
    if n < 3 {
        return Err(ReductionError::Invariant("fewer than three points".into()));
    }
    // (approximate distance, p, q, r) per scanned triple
    let scanned: Vec<Result<Vec<(f64, usize, usize, usize)>, [usize; 3]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                for r in 0..n {
                    if r == i || r == j {
                        continue;
                    }
                    if orient_sign(&h[i], &h[j], &h[r]) == 0 {
                        if !table.allowed(i, j, r) {
                            let mut t = [i, j, r];
                            t.sort_unstable();
                            return Err(t);
                        }
                        if point_on_segment(&pts[r], &Segment::new(pts[i].clone(), pts[j].clone())) {
                            continue;
                        }
                    }
                    out.push((seg_dist_sq_f64(f[r], f[i], f[j]), i, j, r));
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for s in scanned {
        all.extend(s.map_err(ReductionError::DegenerateCollinearity)?);
    }
    let exact = |&(_, i, j, r): &(f64, usize, usize, usize)| {
        point_segment_dist_sq(&pts[r], &Segment::new(pts[i].clone(), pts[j].clone()))
    };
    let approx_min = all.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let cutoff = approx_min * (1.0 + 1e-6) + 1e-12;
    let best = all
        .iter()
        .filter(|c| c.0 <= cutoff)
        .map(exact)
        .min()
        .expect("some candidate");
    let rel = (to_f64(&best) - approx_min).abs() / approx_min.max(f64::MIN_POSITIVE);
    if rel > 1e-9 {
        // floating point screening is unreliable here; fall back to a full exact scan
        return Ok(all.iter().map(exact).min().expect("some candidate"));
    }
    Ok(best)
}

/// Polynomial `coeff * n^exp`, written as `n^2`, `3*n^2`, `n` or `7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapPoly {
    pub coeff: u64,
    pub exp: u32,
}

impl GapPoly {
    pub fn eval(&self, n: usize) -> BigInt {
        BigInt::from(self.coeff) * BigInt::from(n).pow(self.exp)
    }
}

impl fmt::Display for GapPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coeff, self.exp) {
            (c, 0) => write!(f, "{c}"),
            (1, 1) => write!(f, "n"),
            (1, e) => write!(f, "n^{e}"),
            (c, 1) => write!(f, "{c}*n"),
            (c, e) => write!(f, "{c}*n^{e}"),
        }
    }
}

impl FromStr for GapPoly {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || format!("cannot parse gap polynomial `{s}`");
        let (coeff, rest) = match s.split_once('*') {
            Some((c, r)) => (c.parse().map_err(|_| bad())?, r.to_string()),
            None if s.starts_with('n') => (1, s.clone()),
            None => return Ok(GapPoly { coeff: s.parse().map_err(|_| bad())?, exp: 0 }),
        };
        let exp = match rest.as_str() {
            "n" => 1,
            r => r.strip_prefix("n^").and_then(|e| e.parse().ok()).ok_or_else(bad)?,
        };
        if coeff == 0 {
            return Err(bad());
        }
        Ok(GapPoly { coeff, exp })
    }
}

fn pow4(e: i64) -> Rational {
    let p = BigInt::one() << (2 * e.unsigned_abs());
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

fn log2_estimate(r: &Rational) -> i64 {
    r.numer().bits() as i64 - r.denom().bits() as i64
}

/// Squared ε for clearance `delta_sq`: ε is the largest power of two with
/// `ε <= δ/4`, or `ε <= δ/(2p)` when a gap value `p` is given.
pub fn choose_epsilon(delta_sq: &Rational, gap: Option<&BigInt>) -> Rational {
    assert!(delta_sq.is_positive(), "clearance must be positive");
    let bound = match gap {
        None => delta_sq / int(16),
        Some(p) => delta_sq / Rational::from_integer(BigInt::from(4) * p * p),
    };
    let mut e = log2_estimate(&bound).div_euclid(2) + 1;
    while pow4(e) > bound {
        e -= 1;
    }
    while pow4(e + 1) <= bound {
        e += 1;
    }
    pow4(e)
}

fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsPair {
    pub t1: usize,
    pub t2: usize,
    /// Index of the source target in the covering instance.
    pub target_index: usize,
    pub target: Point,
    /// Stabber indices covering the source target.
    pub covering: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointInstance {
    pub points: PointSet,
    /// Point-index pair of every stabber, in stabber order.
    pub stabber_edges: Vec<Edge>,
    pub pairs: Vec<EpsPair>,
    #[serde(with = "crate::geom::rational_str")]
    pub epsilon_sq: Rational,
    #[serde(with = "crate::geom::rational_str")]
    pub delta_sq: Rational,
    #[serde(with = "crate::geom::rational_str")]
    pub threshold_sq: Rational,
}

impl PointInstance {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pair_edges(&self) -> Vec<Edge> {
        self.pairs.iter().map(|p| Edge::new(p.t1, p.t2)).collect()
    }

    /// Violated invariants, as readable messages.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.epsilon_sq >= self.delta_sq {
            out.push("epsilon_sq >= delta_sq".to_string());
        }
        if !(self.epsilon_sq < self.threshold_sq && self.threshold_sq <= self.delta_sq) {
            out.push("threshold_sq outside (epsilon_sq, delta_sq]".to_string());
        }
        let pts = self.points.points();
        let mut partner = vec![usize::MAX; pts.len()];
        for (k, pr) in self.pairs.iter().enumerate() {
            if dist_sq(&pts[pr.t1], &pts[pr.t2]) != self.epsilon_sq {
                out.push(format!("pair {k} is not at distance epsilon"));
            }
            for &s in &pr.covering {
                let e = self.stabber_edges[s];
                if !segment_separates(&pts[e.i], &pts[e.j], &pts[pr.t1], &pts[pr.t2]) {
                    out.push(format!("stabber {s} does not separate pair {k}"));
                }
            }
            partner[pr.t1] = pr.t2;
            partner[pr.t2] = pr.t1;
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if partner[i] != j && dist_sq(&pts[i], &pts[j]) <= self.threshold_sq {
                    out.push(format!("points {i} and {j} are within the threshold"));
                }
            }
        }
        out
    }
}

/// Number of points `split_targets` produces for `inst`.
pub fn point_count(inst: &CdsInstance) -> usize {
    let mut q: Vec<&Point> = Vec::new();
    for s in inst.stabbers() {
        for p in [&s.a, &s.b] {
            if !q.contains(&p) {
                q.push(p);
            }
        }
    }
    q.len() + 2 * inst.targets().len()
}

/// Replaces every target by two points at distance exactly ε, placed on
/// opposite sides of all covering stabbers along the bisector of the widest
/// sector around the target.
pub fn split_targets(inst: &CdsInstance, epsilon_sq: &Rational, delta_sq: &Rational) -> Result<PointInstance, ReductionError> {
    let eps = exact_sqrt(epsilon_sq)
        .ok_or_else(|| ReductionError::InvalidEpsilon(format!("{} is not a rational square", crate::geom::format_rational(epsilon_sq))))?;
    if epsilon_sq >= delta_sq || !epsilon_sq.is_positive() {
        return Err(ReductionError::InvalidEpsilon("need 0 < epsilon_sq < delta_sq".into()));
    }
    let half = eps / int(2);

    let mut points: Vec<Point> = Vec::new();
    let id = |p: &Point, points: &mut Vec<Point>| match points.iter().position(|q| q == p) {
        Some(i) => i,
        None => {
            points.push(p.clone());
            points.len() - 1
        }
    };
    let stabber_edges: Vec<Edge> = inst
        .stabbers()
        .iter()
        .map(|s| Edge::new(id(&s.a, &mut points), id(&s.b, &mut points)))
        .collect();

    let mut pairs = Vec::new();
    for (t, target) in inst.targets().iter().enumerate() {
        let cov = inst.covering(t);
        for (i, &a) in cov.iter().enumerate() {
            for &b in &cov[i + 1..] {
                if crate::geom::cross(&inst.stabbers()[a].direction(), &inst.stabbers()[b].direction()).is_zero() {
                    return Err(ReductionError::SectorDegeneracy { target: t });
                }
            }
        }
        let mut rays: Vec<f64> = cov
            .iter()
            .flat_map(|&s| {
                let a = angle_of(&inst.stabbers()[s].direction()).rem_euclid(PI);
                [a, a + PI]
            })
            .collect();
        let phi = if rays.is_empty() {
            0.0
        } else {
            rays.sort_by(f64::total_cmp);
            let mut best = (rays[0] + 2.0 * PI - rays[rays.len() - 1], rays[rays.len() - 1]);
            for w in rays.windows(2) {
                if w[1] - w[0] > best.0 {
                    best = (w[1] - w[0], w[0]);
                }
            }
            best.1 + best.0 / 2.0
        };
        let off = unit_vector(phi).scale(&half);
        let p1 = target.add(&off);
        let p2 = target.sub(&off);
        let i1 = points.len();
        points.push(p1);
        points.push(p2);
        pairs.push(EpsPair { t1: i1, t2: i1 + 1, target_index: t, target: target.clone(), covering: cov.to_vec() });
    }
    let points = PointSet::new(points).map_err(|e| ReductionError::Invariant(e.to_string()))?;
    let pi = PointInstance {
        points,
        stabber_edges,
        pairs,
        epsilon_sq: epsilon_sq.clone(),
        delta_sq: delta_sq.clone(),
        threshold_sq: epsilon_sq * int(4),
    };
    let bad = pi.invariant_violations();
    if bad.is_empty() {
        Ok(pi)
    } else {
        Err(ReductionError::Invariant(bad.join("; ")))
    }
}

/// Perturbs, measures the clearance, picks ε and splits the targets.
/// Returns the perturbed covering instance alongside the point instance.
pub fn build_point_instance(
    inst: &CdsInstance,
    gap: Option<&GapPoly>,
) -> Result<(CdsInstance, PointInstance), ReductionError> {
    build_point_instance_seeded(inst, gap, 0)
}

/// As [`build_point_instance`] with the perturbation schedules starting at `seed`.
pub fn build_point_instance_seeded(
    inst: &CdsInstance,
    gap: Option<&GapPoly>,
    seed: u64,
) -> Result<(CdsInstance, PointInstance), ReductionError> {
    let perturbed = perturb_from(inst, seed)?;
    let delta_sq = compute_clearance(&perturbed)?;
    let p = gap.map(|g| g.eval(point_count(&perturbed)));
    let eps_sq = choose_epsilon(&delta_sq, p.as_ref());
    let pi = split_targets(&perturbed, &eps_sq, &delta_sq)?;
    Ok((perturbed, pi))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessViolation {
    pub pair: usize,
    pub p: usize,
    pub q: usize,
    /// Both `p` and `q` lie on (or stand in for targets on) one stabber
    /// covering the pair's source target.
    pub along_covering_stabber: bool,
}

/// Every segment between two instance points that separates an ε-pair must
/// be a stabber covering the pair's target. Returns all counterexamples.
pub fn separation_soundness_audit(pi: &PointInstance) -> Vec<SoundnessViolation> {
    let pts: Vec<HPoint> = pi.points.points().iter().map(HPoint::from).collect();
    let n = pts.len();
    let stabber_of: std::collections::HashMap<Edge, usize> =
        pi.stabber_edges.iter().enumerate().map(|(s, e)| (*e, s)).collect();
    // stabbers each point belongs to: endpoints, and pair points via their target
    let mut on: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (s, e) in pi.stabber_edges.iter().enumerate() {
        on[e.i].insert(s);
        on[e.j].insert(s);
    }
    for pr in &pi.pairs {
        on[pr.t1].extend(pr.covering.iter().copied());
        on[pr.t2].extend(pr.covering.iter().copied());
    }
    pi.pairs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, pr)| {
            let mut found = Vec::new();
            for p in 0..n {
                for q in p + 1..n {
                    if (p == pr.t1 || p == pr.t2) && (q == pr.t1 || q == pr.t2) {
                        continue;
                    }
                    if !separates_h(&pts[p], &pts[q], &pts[pr.t1], &pts[pr.t2]) {
                        continue;
                    }
                    let e = Edge::new(p, q);
                    if stabber_of.get(&e).is_some_and(|s| pr.covering.contains(s)) {
                        continue;
                    }
                    let along = pr.covering.iter().any(|s| on[p].contains(s) && on[q].contains(s));
                    found.push(SoundnessViolation { pair: k, p, q, along_covering_stabber: along });
                }
            }
            found
        })
        .collect()
}
