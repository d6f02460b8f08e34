//! Oracles and end-to-end checks across SAT, covering and triangulation.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cds::{solve_bruteforce, solve_structured, verify_solution, CdsError, CdsInstance, CdsSolution, DEFAULT_STABBER_CAP};
use crate::cnf::{Cnf3, Lit};
use crate::geom::{segments_properly_cross, Point, Segment};
use crate::reduction::points::{compute_clearance, point_count};
use crate::reduction::{
    build_point_instance, choose_epsilon, compile_3sat_to_cds, decode_solution, perturb, split_targets, PointInstance,
    ReductionError,
};
use crate::triangulation::{
    enumerate_triangulations, segment_separates, triangulation_exists_avoiding, Edge, Triangulation, TriangulationError,
    DEFAULT_POINT_CAP,
};

pub const SAT_VAR_CAP: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("formula has {0} variables, above the brute-force cap of {SAT_VAR_CAP}")]
    TooLarge(usize),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Cds(#[from] CdsError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
}

/// Lexicographically first model (false before true, `x1` most significant).
pub fn sat_bruteforce(cnf: &Cnf3) -> Result<Option<Vec<bool>>, HarnessError> {
    let n = cnf.num_vars;
    if n > SAT_VAR_CAP {
        return Err(HarnessError::TooLarge(n));
    }
    for mask in 0u32..(1u32 << n) {
        let a: Vec<bool> = (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect();
        if cnf.eval(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub id: String,
    pub sat: bool,
    pub cds_feasible: bool,
    /// Absent when the point instance is above the triangulation cap.
    pub triangulation_feasible: Option<bool>,
    pub points: Option<usize>,
    pub consistent: bool,
    /// Reasons for inconsistency, empty when consistent.
    pub notes: Vec<String>,
}

/// Stabber edges of `t` that separate some ε-pair.
pub fn cover_from_triangulation(pi: &PointInstance, t: &Triangulation) -> CdsSolution {
    let pts = pi.points.points();
    let mut chosen = BTreeSet::new();
    for (s, e) in pi.stabber_edges.iter().enumerate() {
        if t.contains(*e)
            && pi
                .pairs
                .iter()
                .any(|p| segment_separates(&pts[e.i], &pts[e.j], &pts[p.t1], &pts[p.t2]))
        {
            chosen.insert(s);
        }
    }
    CdsSolution { chosen }
}

/// Edges of length at most ε, which a triangulation has to avoid.
pub fn short_edges(pi: &PointInstance) -> BTreeSet<Edge> {
    let n = pi.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let e = Edge::new(i, j);
            if pi.points.edge_len_sq(e) <= pi.epsilon_sq {
                out.insert(e);
            }
        }
    }
    out
}

pub fn end_to_end_check(id: &str, cnf: &Cnf3) -> Result<EquivalenceReport, HarnessError> {
    let mut notes = Vec::new();
    let sat = sat_bruteforce(cnf)?;
    let (inst, cert) = compile_3sat_to_cds(cnf, None)?;

    let structured = solve_structured(&inst, &cert)?;
    let mut cds_feasible = structured.is_some();
    if let Some(sol) = &structured {
        if !verify_solution(&inst, sol) {
            notes.push("structured cover fails verification".into());
        }
    }
    if inst.stabbers().len() <= DEFAULT_STABBER_CAP {
        let brute = solve_bruteforce(&inst, DEFAULT_STABBER_CAP)?;
        if brute.is_some() != cds_feasible {
            notes.push("brute-force and structured solvers disagree".into());
        }
        cds_feasible = brute.is_some();
        if let Some(sol) = brute {
            if let Err(e) = decode_solution(&cert, &sol) {
                notes.push(format!("brute-force cover does not decode: {e}"));
            }
        }
    }
    if let Some(sol) = &structured {
        match decode_solution(&cert, sol) {
            Ok(a) if !cnf.eval(&a) => notes.push("decoded assignment is not a model".into()),
            Ok(_) => {}
            Err(e) => notes.push(format!("structured cover does not decode: {e}")),
        }
    }

    let mut triangulation_feasible = None;
    let mut points = None;
    if point_count(&inst) <= DEFAULT_POINT_CAP && !inst.targets().is_empty() {
        let (perturbed, pi) = build_point_instance(&inst, None)?;
        points = Some(pi.len());
        let t = triangulation_exists_avoiding(&pi.points, &short_edges(&pi), DEFAULT_POINT_CAP)?;
        if let Some(t) = &t {
            if !verify_solution(&perturbed, &cover_from_triangulation(&pi, t)) {
                notes.push("triangulation does not induce a cover".into());
            }
        }
        triangulation_feasible = Some(t.is_some());
    }

    let sat = sat.is_some();
    if sat != cds_feasible || triangulation_feasible.is_some_and(|t| t != sat) {
        notes.push("feasibility differs between levels".into());
    }
    Ok(EquivalenceReport {
        id: id.to_string(),
        sat,
        cds_feasible,
        triangulation_feasible,
        points,
        consistent: notes.is_empty(),
        notes,
    })
}

/// Random formula with 1..=`max_vars` variables and 0..=`max_clauses`
/// clauses, deterministic per seed.
pub fn random_small_planar_cnf(seed: u64, max_vars: usize, max_clauses: usize) -> Cnf3 {
    let max_vars = max_vars.clamp(1, 3);
    let max_clauses = max_clauses.min(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_vars = rng.gen_range(1..=max_vars);
    let num_clauses = rng.gen_range(0..=max_clauses);
    let mut clauses = Vec::new();
    for _ in 0..num_clauses {
        let len = rng.gen_range(1..=num_vars.min(3));
        let mut vars: Vec<usize> = (0..num_vars).collect();
        let mut clause = Vec::new();
        for _ in 0..len {
            let v = vars.swap_remove(rng.gen_range(0..vars.len()));
            clause.push(Lit { var: v, positive: rng.gen_bool(0.5) });
        }
        clause.sort();
        clauses.push(clause);
    }
    Cnf3::new(num_vars, clauses).expect("generated formula is well formed")
}

/// Reports for seeds `0..count`, computed in parallel and returned in seed order.
pub fn check_seeds(count: u64) -> Vec<Result<EquivalenceReport, String>> {
    (0..count)
        .into_par_iter()
        .map(|seed| {
            let f = random_small_planar_cnf(seed, 3, 2);
            end_to_end_check(&format!("seed-{seed}"), &f).map_err(|e| format!("seed-{seed}: {e}"))
        })
        .collect()
}

fn seg(a: (i64, i64), b: (i64, i64)) -> Segment {
    Segment::new(Point::from_ints(a.0, a.1), Point::from_ints(b.0, b.1))
}

/// Stabbers at their crossings, taking all pairwise proper crossings as targets.
pub fn crossing_instance(stabbers: Vec<Segment>) -> CdsInstance {
    let mut targets = Vec::new();
    for a in 0..stabbers.len() {
        for b in a + 1..stabbers.len() {
            if let Some(p) = segments_properly_cross(&stabbers[a], &stabbers[b]) {
                targets.push(p);
            }
        }
    }
    CdsInstance::new(stabbers, targets)
}

/// Three pairwise crossing stabbers with a target at every crossing.
pub fn negative_gadget_cds() -> CdsInstance {
    crossing_instance(vec![seg((0, 0), (6, 0)), seg((1, -1), (4, 5)), seg((5, -1), (2, 5))])
}

/// Two stabbers crossing at one target.
pub fn x_fixture_cds() -> CdsInstance {
    crossing_instance(vec![seg((0, 0), (4, 4)), seg((0, 4), (4, 0))])
}

/// Splits the targets of a fixture, perturbing only if it is degenerate.
pub fn fixture_point_instance(inst: &CdsInstance) -> Result<PointInstance, ReductionError> {
    let inst = match compute_clearance(inst) {
        Ok(_) => inst.clone(),
        Err(ReductionError::DegenerateCollinearity(_)) => perturb(inst)?,
        Err(e) => return Err(e),
    };
    let delta_sq = compute_clearance(&inst)?;
    split_targets(&inst, &choose_epsilon(&delta_sq, None), &delta_sq)
}

/// The 12-point point instance of [`negative_gadget_cds`].
pub fn negative_gadget_instance() -> PointInstance {
    fixture_point_instance(&negative_gadget_cds()).expect("fixture is well formed")
}

pub fn x_fixture_instance() -> PointInstance {
    fixture_point_instance(&x_fixture_cds()).expect("fixture is well formed")
}

/// Whether every triangulation avoiding the short edges induces a cover.
pub fn triangulations_induce_covers(inst: &CdsInstance, pi: &PointInstance, limit: usize) -> Result<bool, HarnessError> {
    let short = short_edges(pi);
    for t in enumerate_triangulations(&pi.points, limit, DEFAULT_POINT_CAP)? {
        if t.edges.is_disjoint(&short) && !verify_solution(inst, &cover_from_triangulation(pi, &t)) {
            return Ok(false);
        }
    }
    Ok(true)
}
