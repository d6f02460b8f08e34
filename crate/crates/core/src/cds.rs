//! Covering by Disjoint Segments: pick pairwise disjoint stabbers so that every
//! target point lies on at least one chosen stabber.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{point_on_segment, segments_conflict, Point, Segment};
use crate::reduction::{GadgetCertificate, Parity};

/// Default stabber cap for [`solve_bruteforce`].
pub const DEFAULT_STABBER_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CdsError {
    #[error("instance has {stabbers} stabbers, above the brute-force cap of {cap}")]
    TooLarge { stabbers: usize, cap: usize },
    #[error("certificate does not describe this instance: {0}")]
    CertificateMismatch(String),
}

/// Stabbers and targets with the coverage relation precomputed from exact
/// predicates. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdsInstance {
    stabbers: Vec<Segment>,
    targets: Vec<Point>,
    coverage: Vec<Vec<usize>>,
    conflicts: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
struct CdsInstanceFile {
    stabbers: Vec<Segment>,
    targets: Vec<Point>,
}

impl Serialize for CdsInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CdsInstanceFile { stabbers: self.stabbers.clone(), targets: self.targets.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CdsInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = CdsInstanceFile::deserialize(d)?;
        Ok(CdsInstance::new(f.stabbers, f.targets))
    }
}

impl CdsInstance {
    pub fn new(stabbers: Vec<Segment>, targets: Vec<Point>) -> Self {
        let coverage = targets
            .iter()
            .map(|t| (0..stabbers.len()).filter(|&s| point_on_segment(t, &stabbers[s])).collect())
            .collect();
        let m = stabbers.len();
        let mut conflicts = vec![vec![false; m]; m];
        for a in 0..m {
            for b in a + 1..m {
                let c = segments_conflict(&stabbers[a], &stabbers[b]);
                conflicts[a][b] = c;
                conflicts[b][a] = c;
            }
        }
        Self { stabbers, targets, coverage, conflicts }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn stabbers(&self) -> &[Segment] {
        &self.stabbers
    }

    pub fn targets(&self) -> &[Point] {
        &self.targets
    }

    /// Stabber indices containing target `t`, ascending.
    pub fn covering(&self, t: usize) -> &[usize] {
        &self.coverage[t]
    }

    pub fn conflict(&self, a: usize, b: usize) -> bool {
        self.conflicts[a][b]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Defect {
    /// The target lies on no stabber at all.
    UncoveredByConstruction { target: usize },
    /// The target lies on a single stabber, so it is not an intersection point.
    NotAnIntersectionPoint { target: usize, stabber: usize },
    DuplicateTarget { first: usize, second: usize },
    DuplicateStabber { first: usize, second: usize },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::UncoveredByConstruction { target } => {
                write!(f, "uncovered-by-construction: target {target}")
            }
            Defect::NotAnIntersectionPoint { target, stabber } => {
                write!(f, "not an intersection point: target {target} lies only on stabber {stabber}")
            }
            Defect::DuplicateTarget { first, second } => {
                write!(f, "duplicate target: {first} and {second}")
            }
            Defect::DuplicateStabber { first, second } => {
                write!(f, "duplicate stabber: {first} and {second}")
            }
        }
    }
}

pub fn validate_instance(inst: &CdsInstance) -> Vec<Defect> {
    validate_instance_allowing(inst, &BTreeSet::new())
}

/// Like [`validate_instance`], but targets in `single_cover_ok` may lie on a
/// single stabber.
pub fn validate_instance_allowing(inst: &CdsInstance, single_cover_ok: &BTreeSet<usize>) -> Vec<Defect> {
    let mut out = Vec::new();
    for (t, cov) in inst.coverage.iter().enumerate() {
        match cov.as_slice() {
            [] => out.push(Defect::UncoveredByConstruction { target: t }),
            [s] if !single_cover_ok.contains(&t) => {
                out.push(Defect::NotAnIntersectionPoint { target: t, stabber: *s })
            }
            _ => {}
        }
    }
    for a in 0..inst.targets.len() {
        for b in a + 1..inst.targets.len() {
            if inst.targets[a] == inst.targets[b] {
                out.push(Defect::DuplicateTarget { first: a, second: b });
            }
        }
    }
    for a in 0..inst.stabbers.len() {
        for b in a + 1..inst.stabbers.len() {
            let (s, t) = (&inst.stabbers[a], &inst.stabbers[b]);
            if (s.a == t.a && s.b == t.b) || (s.a == t.b && s.b == t.a) {
                out.push(Defect::DuplicateStabber { first: a, second: b });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CdsSolution {
    pub chosen: BTreeSet<usize>,
}

impl CdsSolution {
    pub fn new(chosen: impl IntoIterator<Item = usize>) -> Self {
        Self { chosen: chosen.into_iter().collect() }
    }
}

pub fn verify_solution(inst: &CdsInstance, sol: &CdsSolution) -> bool {
    if sol.chosen.iter().any(|&s| s >= inst.stabbers.len()) {
        return false;
    }
    let chosen: Vec<usize> = sol.chosen.iter().copied().collect();
    for (k, &a) in chosen.iter().enumerate() {
        if chosen[k + 1..].iter().any(|&b| inst.conflict(a, b)) {
            return false;
        }
    }
    inst.coverage.iter().all(|cov| cov.iter().any(|s| sol.chosen.contains(s)))
}

/// Target-driven backtracking: branch on the stabbers covering the first
/// uncovered target, with targets ordered by fewest covering stabbers.
pub fn solve_bruteforce(inst: &CdsInstance, cap: usize) -> Result<Option<CdsSolution>, CdsError> {
    if inst.stabbers.len() > cap {
        return Err(CdsError::TooLarge { stabbers: inst.stabbers.len(), cap });
    }
    let mut order: Vec<usize> = (0..inst.targets.len()).collect();
    order.sort_by_key(|&t| (inst.coverage[t].len(), t));
    let mut chosen = Vec::new();
    if backtrack(inst, &order, &mut chosen) {
        Ok(Some(CdsSolution::new(chosen)))
    } else {
        Ok(None)
    }
}

fn backtrack(inst: &CdsInstance, order: &[usize], chosen: &mut Vec<usize>) -> bool {
    let next = order
        .iter()
        .find(|&&t| !inst.coverage[t].iter().any(|s| chosen.contains(s)));
    let Some(&t) = next else {
        return true;
    };
    for &s in &inst.coverage[t] {
        if chosen.iter().any(|&c| inst.conflict(c, s)) {
            continue;
        }
        chosen.push(s);
        if backtrack(inst, order, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Search restricted to compiled instances: one parity class per variable
/// and one clause segment per clause.
pub fn solve_structured(inst: &CdsInstance, cert: &GadgetCertificate) -> Result<Option<CdsSolution>, CdsError> {
    cert.check_against(inst).map_err(CdsError::CertificateMismatch)?;

    let var_sets: Vec<[Vec<usize>; 2]> = cert
        .variables
        .iter()
        .map(|g| [g.segments_of(Parity::Even), g.segments_of(Parity::Odd)])
        .collect();
    let mut chosen: Vec<usize> = Vec::new();
    let found = assign_variables(inst, cert, &var_sets, 0, &mut chosen);
    Ok(found.then(|| CdsSolution::new(chosen)))
}

fn compatible(inst: &CdsInstance, chosen: &[usize], s: usize) -> bool {
    chosen.iter().all(|&c| !inst.conflict(c, s))
}

fn assign_variables(
    inst: &CdsInstance,
    cert: &GadgetCertificate,
    var_sets: &[[Vec<usize>; 2]],
    v: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if v == var_sets.len() {
        return pick_clauses(inst, cert, 0, chosen);
    }
    for class in &var_sets[v] {
        if class.iter().all(|&s| compatible(inst, chosen, s)) {
            let mark = chosen.len();
            chosen.extend(class);
            if assign_variables(inst, cert, var_sets, v + 1, chosen) {
                return true;
            }
            chosen.truncate(mark);
        }
    }
    false
}

fn pick_clauses(inst: &CdsInstance, cert: &GadgetCertificate, c: usize, chosen: &mut Vec<usize>) -> bool {
    let Some(clause) = cert.clauses.get(c) else {
        return true;
    };
    for &s in &clause.segments {
        if compatible(inst, chosen, s) {
            chosen.push(s);
            if pick_clauses(inst, cert, c + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: (i64, i64), b: (i64, i64)) -> Segment {
        Segment::new(Point::from_ints(a.0, a.1), Point::from_ints(b.0, b.1))
    }

    pub(crate) fn x_instance() -> CdsInstance {
        CdsInstance::new(vec![seg((0, 0), (2, 2)), seg((0, 2), (2, 0))], vec![Point::from_ints(1, 1)])
    }

    fn three_crossing() -> CdsInstance {
        let stabbers = vec![seg((0, 0), (6, 0)), seg((1, -1), (4, 5)), seg((5, -1), (2, 5))];
        let mut targets = Vec::new();
        for a in 0..3 {
            for b in a + 1..3 {
                targets.push(crate::geom::segments_properly_cross(&stabbers[a], &stabbers[b]).unwrap());
            }
        }
        CdsInstance::new(stabbers, targets)
    }

    #[test]
    fn validation() {
        assert!(validate_instance(&x_instance()).is_empty());
        let lonely = CdsInstance::new(vec![seg((0, 0), (2, 2))], vec![Point::from_ints(5, 5)]);
        assert_eq!(validate_instance(&lonely), vec![Defect::UncoveredByConstruction { target: 0 }]);
        let single = CdsInstance::new(vec![seg((0, 0), (2, 2))], vec![Point::from_ints(1, 1)]);
        assert_eq!(
            validate_instance(&single),
            vec![Defect::NotAnIntersectionPoint { target: 0, stabber: 0 }]
        );
        assert!(validate_instance_allowing(&single, &BTreeSet::from([0])).is_empty());
        assert_eq!(
            Defect::UncoveredByConstruction { target: 0 }.to_string(),
            "uncovered-by-construction: target 0"
        );
    }

    #[test]
    fn verification() {
        let x = x_instance();
        assert!(verify_solution(&x, &CdsSolution::new([0])));
        assert!(verify_solution(&x, &CdsSolution::new([1])));
        assert!(!verify_solution(&x, &CdsSolution::new([0, 1])));
        assert!(!verify_solution(&x, &CdsSolution::new([])));
        assert!(!verify_solution(&x, &CdsSolution::new([7])));
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(solve_bruteforce(&x_instance(), 24).unwrap(), Some(CdsSolution::new([0])));
        let tri = three_crossing();
        assert!(validate_instance(&tri).is_empty());
        assert_eq!(solve_bruteforce(&tri, 24).unwrap(), None);
        assert_eq!(solve_bruteforce(&CdsInstance::empty(), 24).unwrap(), Some(CdsSolution::default()));
        assert_eq!(
            solve_bruteforce(&tri, 2),
            Err(CdsError::TooLarge { stabbers: 3, cap: 2 })
        );
    }

    #[test]
    fn json_round_trip_recomputes_coverage() {
        let x = x_instance();
        let text = serde_json::to_string(&x).unwrap();
        assert_eq!(
            text,
            r#"{"stabbers":[[["0/1","0/1"],["2/1","2/1"]],[["0/1","2/1"],["2/1","0/1"]]],"targets":[["1/1","1/1"]]}"#
        );
        let back: CdsInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, x);
        assert_eq!(back.covering(0), &[0, 1]);
    }
}
