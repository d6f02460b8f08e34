//! Planar 3SAT → covering by disjoint segments → point set.

pub mod gadget;
pub mod layout;
pub mod points;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cds::{validate_instance_allowing, CdsInstance, CdsSolution};
use crate::cnf::{Cnf3, LayoutHints};
use crate::geom::{int, rat, Point, Rational, Segment};

pub use gadget::{build_variable_cycle, clause_segment, VariableCycle};
pub use layout::{layout_incidence_graph, scale_layout, IncidenceLayout, LayoutEdge};
pub use points::{
    build_point_instance, build_point_instance_seeded, choose_epsilon, compute_clearance, perturb, separation_soundness_audit, split_targets,
    EpsPair, GapPoly, PointInstance, SoundnessViolation,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("no planar spine layout found (clause {clause} cannot be placed)")]
    NotPlanarWithHints { clause: usize },
    #[error("variable {var} has two incident edges in the same direction")]
    DegenerateDirections { var: usize },
    #[error("crossing audit failed: {0}")]
    CrossingAudit(String),
    #[error("assignment has {got} values, formula has {want} variables")]
    AssignmentLength { got: usize, want: usize },
    #[error("assignment does not satisfy clause {clause}")]
    NotSatisfying { clause: usize },
    #[error("cover mixes parities on variable {var}")]
    MixedParity { var: usize },
    #[error("decoded assignment violates clause {clause}")]
    DecodedUnsatisfied { clause: usize },
    #[error("unexpected collinear points {0:?}")]
    DegenerateCollinearity([usize; 3]),
    #[error("perturbation audit failed: {0}")]
    AuditFailed(String),
    #[error("target {target} lies on two stabbers with the same carrier line")]
    SectorDegeneracy { target: usize },
    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),
    #[error("point instance invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn index(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Parity of the cycle side a literal's clause segment crosses.
    pub fn crossed_by(positive: bool) -> Parity {
        if positive {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity class chosen for a variable with value `value`.
    pub fn chosen_for(value: bool) -> Parity {
        if value {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableGadget {
    pub var: usize,
    /// Stabber indices in cycle order.
    pub segments: Vec<usize>,
    pub parities: Vec<Parity>,
    pub corner_targets: Vec<usize>,
}

impl VariableGadget {
    pub fn segments_of(&self, p: Parity) -> Vec<usize> {
        self.segments
            .iter()
            .zip(&self.parities)
            .filter(|(_, q)| **q == p)
            .map(|(s, _)| *s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceRecord {
    pub clause: usize,
    pub var: usize,
    pub positive: bool,
    pub clause_segment: usize,
    pub crossed_segment: usize,
    pub crossed_parity: Parity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseGadget {
    pub clause: usize,
    /// Stabber indices, one per literal in clause order.
    pub segments: Vec<usize>,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetCertificate {
    pub formula: Cnf3,
    #[serde(with = "crate::geom::rational_str")]
    pub scale: Rational,
    #[serde(with = "crate::geom::rational_str")]
    pub radius: Rational,
    pub num_stabbers: usize,
    pub num_targets: usize,
    pub variables: Vec<VariableGadget>,
    pub incidences: Vec<IncidenceRecord>,
    pub clauses: Vec<ClauseGadget>,
    /// Clause targets of one-literal clauses; they lie on a single stabber.
    pub degenerate_targets: Vec<usize>,
}

impl GadgetCertificate {
    /// Cheap consistency check of the certificate against an instance.
    pub fn check_against(&self, inst: &CdsInstance) -> Result<(), String> {
        if inst.stabbers().len() != self.num_stabbers || inst.targets().len() != self.num_targets {
            return Err(format!(
                "size {}x{} vs certified {}x{}",
                inst.stabbers().len(),
                inst.targets().len(),
                self.num_stabbers,
                self.num_targets
            ));
        }
        let s_ok = |s: usize| s < self.num_stabbers;
        let t_ok = |t: usize| t < self.num_targets;
        for g in &self.variables {
            if g.segments.len() != g.parities.len() || !g.segments.iter().all(|&s| s_ok(s)) {
                return Err(format!("variable {} segments malformed", g.var));
            }
            if !g.corner_targets.iter().all(|&t| t_ok(t)) {
                return Err(format!("variable {} corners out of range", g.var));
            }
            let even = g.parities.iter().filter(|p| **p == Parity::Even).count();
            if 2 * even != g.parities.len() {
                return Err(format!("variable {} has unbalanced parities", g.var));
            }
        }
        for inc in &self.incidences {
            if !s_ok(inc.clause_segment) || !s_ok(inc.crossed_segment) {
                return Err("incidence index out of range".into());
            }
            if inc.crossed_parity != Parity::crossed_by(inc.positive) {
                return Err(format!("incidence ({}, {}) crosses the wrong parity", inc.clause, inc.var));
            }
            if !inst.conflict(inc.clause_segment, inc.crossed_segment) {
                return Err(format!("clause segment {} misses its variable side", inc.clause_segment));
            }
        }
        for c in &self.clauses {
            if !t_ok(c.target) || !c.segments.iter().all(|&s| s_ok(s)) {
                return Err(format!("clause {} indices out of range", c.clause));
            }
            let cov: BTreeSet<usize> = inst.covering(c.target).iter().copied().collect();
            if cov != c.segments.iter().copied().collect() {
                return Err(format!("clause {} target coverage differs", c.clause));
            }
        }
        Ok(())
    }
}

/// Tunables of the gadget construction.
#[derive(Debug, Clone)]
pub struct BuildParams {
    pub scale_constant: i64,
    /// Fraction of its length by which each cycle side overshoots its corners.
    pub overshoot: Rational,
}

const SCALE_CHOICES: [i64; 4] = [layout::SCALE_CONSTANT, 8, 16, 32];

fn overshoot_choices() -> [Rational; 3] {
    [rat(1, 16), rat(1, 64), rat(1, 256)]
}

/// Compiles a formula into a covering instance. Construction constants are
/// tried from the smallest up until the exact crossing audit passes.
pub fn compile_3sat_to_cds(
    cnf: &Cnf3,
    hints: Option<&LayoutHints>,
) -> Result<(CdsInstance, GadgetCertificate), ReductionError> {
    let l = layout_incidence_graph(cnf, hints)?;
    if let Some(e) = first_degenerate_var(&l) {
        return Err(ReductionError::DegenerateDirections { var: e });
    }
    let mut last = None;
    for k in SCALE_CHOICES {
        for overshoot in overshoot_choices() {
            match compile_with(cnf, &l, &BuildParams { scale_constant: k, overshoot }) {
                Err(e @ ReductionError::CrossingAudit(_)) => last = Some(e),
                r => return r,
            }
        }
    }
    Err(last.expect("at least one attempt"))
}

fn first_degenerate_var(l: &IncidenceLayout) -> Option<usize> {
    for a in 0..l.edges.len() {
        for b in a + 1..l.edges.len() {
            let (ea, eb) = (&l.edges[a], &l.edges[b]);
            if ea.var == eb.var {
                let da = ea.segment.b.sub(&ea.segment.a);
                let db = eb.segment.b.sub(&eb.segment.a);
                if crate::geom::cross(&da, &db) == int(0) && crate::geom::dot(&da, &db) > int(0) {
                    return Some(ea.var);
                }
            }
        }
    }
    None
}

/// Size parameter used for the scale factor and the cycle radius.
pub fn size_parameter(cnf: &Cnf3) -> usize {
    (cnf.num_vars + cnf.clauses.len()).max(1)
}

pub fn compile_with(
    cnf: &Cnf3,
    unscaled: &IncidenceLayout,
    params: &BuildParams,
) -> Result<(CdsInstance, GadgetCertificate), ReductionError> {
    let n = size_parameter(cnf);
    let l = layout::scale_layout_with(unscaled, n, params.scale_constant);
    let radius = int(n as i64);

    let mut stabbers: Vec<Segment> = Vec::new();
    let mut targets: Vec<Point> = Vec::new();
    let mut variables = Vec::new();
    // (var gadget index, local side) per layout edge
    let mut crossed: Vec<Option<(usize, usize)>> = vec![None; l.edges.len()];
    let mut cycles: Vec<Option<VariableCycle>> = Vec::new();

    for v in 0..cnf.num_vars {
        let edge_ids: Vec<usize> = (0..l.edges.len()).filter(|&e| l.edges[e].var == v).collect();
        if edge_ids.is_empty() {
            variables.push(VariableGadget { var: v, segments: vec![], parities: vec![], corner_targets: vec![] });
            cycles.push(None);
            continue;
        }
        let inc: Vec<(Point, Parity)> = edge_ids
            .iter()
            .map(|&e| {
                let d = l.clause_pos[l.edges[e].clause].sub(&l.var_pos[v]);
                (d, Parity::crossed_by(l.edges[e].positive))
            })
            .collect();
        let cyc = build_variable_cycle(v, &l.var_pos[v], &radius, &inc, &params.overshoot)?;
        let base = stabbers.len();
        stabbers.extend(cyc.sides.iter().cloned());
        let tbase = targets.len();
        targets.extend(cyc.corners.iter().map(|(p, _)| p.clone()));
        for (k, &e) in edge_ids.iter().enumerate() {
            crossed[e] = Some((v, cyc.incidence_side[k]));
        }
        variables.push(VariableGadget {
            var: v,
            segments: (base..base + cyc.sides.len()).collect(),
            parities: cyc.parities.clone(),
            corner_targets: (tbase..tbase + cyc.corners.len()).collect(),
        });
        cycles.push(Some(cyc));
    }

    let mut incidences = Vec::new();
    let mut clauses = Vec::new();
    let mut degenerate_targets = Vec::new();
    let mut e = 0;
    for (c, clause) in cnf.clauses.iter().enumerate() {
        let target = targets.len() + c;
        let mut segs = Vec::new();
        for lit in clause {
            let edge = &l.edges[e];
            debug_assert_eq!((edge.clause, edge.var), (c, lit.var));
            let (v, side) = crossed[e].expect("incident variable has a cycle");
            let cyc = cycles[v].as_ref().expect("cycle");
            let s = clause_segment(&l.var_pos[v], &l.clause_pos[c], &radius, &cyc.sides[side]);
            let idx = stabbers.len();
            stabbers.push(s);
            segs.push(idx);
            incidences.push(IncidenceRecord {
                clause: c,
                var: v,
                positive: lit.positive,
                clause_segment: idx,
                crossed_segment: variables[v].segments[side],
                crossed_parity: cyc.parities[side],
            });
            e += 1;
        }
        if clause.len() == 1 {
            degenerate_targets.push(target);
        }
        clauses.push(ClauseGadget { clause: c, segments: segs, target });
    }
    targets.extend(l.clause_pos.iter().cloned());

    let inst = CdsInstance::new(stabbers, targets);
    let cert = GadgetCertificate {
        formula: cnf.clone(),
        scale: l.scale.clone(),
        radius,
        num_stabbers: inst.stabbers().len(),
        num_targets: inst.targets().len(),
        variables,
        incidences,
        clauses,
        degenerate_targets,
    };
    audit_construction(&inst, &cert)?;
    Ok((inst, cert))
}

/// Exact audit of the construction: the conflict graph is exactly the
/// intended one and every target lies on exactly its intended stabbers.
pub fn audit_construction(inst: &CdsInstance, cert: &GadgetCertificate) -> Result<(), ReductionError> {
    let m = inst.stabbers().len();
    let mut expected = vec![vec![false; m]; m];
    let mut mark = |a: usize, b: usize| {
        expected[a][b] = true;
        expected[b][a] = true;
    };
    let mut want_cover: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); inst.targets().len()];
    for g in &cert.variables {
        let k = g.segments.len();
        for j in 0..k {
            if k > 2 || j == 0 {
                mark(g.segments[j], g.segments[(j + 1) % k]);
            }
        }
        for (c, &t) in g.corner_targets.iter().enumerate() {
            let j = if k == 2 { 1 } else { c };
            want_cover[t] = [g.segments[(j + k - 1) % k], g.segments[j % k]].into_iter().collect();
        }
    }
    for inc in &cert.incidences {
        mark(inc.clause_segment, inc.crossed_segment);
    }
    for c in &cert.clauses {
        for (i, &a) in c.segments.iter().enumerate() {
            for &b in &c.segments[i + 1..] {
                mark(a, b);
            }
        }
        want_cover[c.target] = c.segments.iter().copied().collect();
    }
    let mut problems = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if inst.conflict(a, b) != expected[a][b] {
                let what = if expected[a][b] { "missing" } else { "unexpected" };
                problems.push(format!("{what} conflict {a}-{b}"));
            }
        }
    }
    for (t, want) in want_cover.iter().enumerate() {
        let got: BTreeSet<usize> = inst.covering(t).iter().copied().collect();
        if &got != want {
            problems.push(format!("target {t} covered by {got:?}, want {want:?}"));
        }
    }
    let allowed: BTreeSet<usize> = cert.degenerate_targets.iter().copied().collect();
    problems.extend(validate_instance_allowing(inst, &allowed).iter().map(|d| d.to_string()));
    if let Err(e) = cert.check_against(inst) {
        problems.push(e);
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(ReductionError::CrossingAudit(problems.join("; ")))
    }
}

pub fn encode_assignment(cert: &GadgetCertificate, assignment: &[bool]) -> Result<CdsSolution, ReductionError> {
    let f = &cert.formula;
    if assignment.len() != f.num_vars {
        return Err(ReductionError::AssignmentLength { got: assignment.len(), want: f.num_vars });
    }
    let mut chosen = BTreeSet::new();
    for g in &cert.variables {
        chosen.extend(g.segments_of(Parity::chosen_for(assignment[g.var])));
    }
    for (c, clause) in f.clauses.iter().enumerate() {
        let k = clause
            .iter()
            .position(|l| l.eval(assignment))
            .ok_or(ReductionError::NotSatisfying { clause: c })?;
        chosen.insert(cert.clauses[c].segments[k]);
    }
    Ok(CdsSolution { chosen })
}

pub fn decode_solution(cert: &GadgetCertificate, sol: &CdsSolution) -> Result<Vec<bool>, ReductionError> {
    let mut assignment = vec![false; cert.formula.num_vars];
    for g in &cert.variables {
        if g.segments.is_empty() {
            continue;
        }
        let has = |p: Parity| g.segments_of(p).iter().map(|s| sol.chosen.contains(s)).collect::<Vec<_>>();
        let (even, odd) = (has(Parity::Even), has(Parity::Odd));
        if odd.iter().all(|b| *b) && !even.iter().any(|b| *b) {
            assignment[g.var] = true;
        } else if even.iter().all(|b| *b) && !odd.iter().any(|b| *b) {
            assignment[g.var] = false;
        } else {
            return Err(ReductionError::MixedParity { var: g.var });
        }
    }
    for (c, clause) in cert.formula.clauses.iter().enumerate() {
        if !clause.iter().any(|l| l.eval(&assignment)) {
            return Err(ReductionError::DecodedUnsatisfied { clause: c });
        }
    }
    Ok(assignment)
}
