//! CNF formulas with at most three literals per clause, DIMACS I/O and the
//! `c layout ...` comment extension carrying spine-layout hints.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit {
    /// Zero-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    /// DIMACS form: one-based, negative when negated.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CnfError {
    #[error("clause {clause} references variable {var} but the formula has {num_vars}")]
    VariableOutOfRange { clause: usize, var: usize, num_vars: usize },
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("clause {0} has more than three literals")]
    ClauseTooLong(usize),
    #[error("clause {0} repeats a variable")]
    RepeatedVariable(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf3 {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Self, CnfError> {
        for (c, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(CnfError::EmptyClause(c));
            }
            if clause.len() > 3 {
                return Err(CnfError::ClauseTooLong(c));
            }
            for (k, l) in clause.iter().enumerate() {
                if l.var >= num_vars {
                    return Err(CnfError::VariableOutOfRange { clause: c, var: l.var, num_vars });
                }
                if clause[..k].iter().any(|o| o.var == l.var) {
                    return Err(CnfError::RepeatedVariable(c));
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    /// Builds a formula from DIMACS-style signed one-based literals.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&l| Lit { var: l.unsigned_abs() as usize - 1, positive: l > 0 })
                    .collect()
            })
            .collect();
        Self::new(num_vars, clauses)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// Number of clauses each variable occurs in.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vars];
        for c in &self.clauses {
            for l in c {
                d[l.var] += 1;
            }
        }
        d
    }

    pub fn to_dimacs(&self, hints: Option<&LayoutHints>) -> String {
        let mut out = String::new();
        if let Some(h) = hints {
            if let Some(spine) = &h.spine {
                let vars: Vec<String> = spine.iter().map(|v| (v + 1).to_string()).collect();
                let _ = writeln!(out, "c layout spine {}", vars.join(" "));
            }
            for (c, hint) in &h.clauses {
                let side = match hint.side {
                    ClauseSide::Above => "above",
                    ClauseSide::Below => "below",
                };
                let _ = write!(out, "c layout clause {} side={side}", c + 1);
                if let Some(level) = hint.level {
                    let _ = write!(out, " order={level}");
                }
                out.push('\n');
            }
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseSide {
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseHint {
    pub side: ClauseSide,
    /// Height level of the clause vertex on its side (1 = closest to the spine).
    pub level: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutHints {
    /// Left-to-right order of the variables on the spine.
    pub spine: Option<Vec<usize>>,
    /// Per-clause hints, keyed by zero-based clause index.
    pub clauses: BTreeMap<usize, ClauseHint>,
}

impl LayoutHints {
    pub fn is_empty(&self) -> bool {
        self.spine.is_none() && self.clauses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
    #[error(transparent)]
    Invalid(#[from] CnfError),
}

fn syntax(line: usize, msg: impl Into<String>) -> DimacsError {
    DimacsError::Syntax { line, msg: msg.into() }
}

/// Parses DIMACS CNF, collecting `c layout` hint comments along the way.
pub fn parse_dimacs(text: &str) -> Result<(Cnf3, LayoutHints), DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut hints = LayoutHints::default();
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line == "%" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                parse_hint(rest.trim(), line_no, &mut hints)?;
                continue;
            }
        }
        if let Some(rest) = line.strip_prefix("p ") {
            if header.is_some() {
                return Err(syntax(line_no, "duplicate header"));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(syntax(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let v = parts[1].parse().map_err(|_| syntax(line_no, "bad variable count"))?;
            let c = parts[2].parse().map_err(|_| syntax(line_no, "bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| syntax(line_no, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            let var = lit.unsigned_abs() as usize;
            if var > num_vars {
                return Err(syntax(line_no, format!("variable {var} exceeds declared {num_vars}")));
            }
            current.push(Lit { var: var - 1, positive: lit > 0 });
        }
    }
    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if declared != clauses.len() {
        return Err(DimacsError::ClauseCount { declared, found: clauses.len() });
    }
    for &c in hints.clauses.keys() {
        if c >= clauses.len() {
            return Err(syntax(0, format!("layout hint for unknown clause {}", c + 1)));
        }
    }
    if let Some(spine) = &hints.spine {
        let mut sorted = spine.clone();
        sorted.sort_unstable();
        if sorted != (0..num_vars).collect::<Vec<_>>() {
            return Err(syntax(0, "layout spine must list every variable exactly once"));
        }
    }
    Ok((Cnf3::new(num_vars, clauses)?, hints))
}

fn parse_hint(body: &str, line: usize, hints: &mut LayoutHints) -> Result<(), DimacsError> {
    let mut words = body.split_whitespace();
    if words.next() != Some("layout") {
        return Ok(());
    }
    match words.next() {
        Some("spine") => {
            let vars = words
                .map(|w| match w.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(syntax(line, format!("bad spine variable {w:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            hints.spine = Some(vars);
        }
        Some("clause") => {
            let id: usize = words
                .next()
                .and_then(|w| w.parse().ok())
                .filter(|&id| id >= 1)
                .ok_or_else(|| syntax(line, "expected clause id"))?;
            let mut side = None;
            let mut level = None;
            for w in words {
                match w.split_once('=') {
                    Some(("side", "above")) => side = Some(ClauseSide::Above),
                    Some(("side", "below")) => side = Some(ClauseSide::Below),
                    Some(("order", v)) => {
                        level = Some(
                            v.parse::<u32>()
                                .ok()
                                .filter(|&l| l >= 1)
                                .ok_or_else(|| syntax(line, format!("bad order {v:?}")))?,
                        )
                    }
                    _ => return Err(syntax(line, format!("bad layout field {w:?}"))),
                }
            }
            let side = side.ok_or_else(|| syntax(line, "layout clause hint needs side="))?;
            hints.clauses.insert(id - 1, ClauseHint { side, level });
        }
        _ => return Err(syntax(line, "unknown layout directive")),
    }
    Ok(())
}

/// The formula drawn in the incidence-graph figure:
/// (x1 ∨ x2 ∨ ¬x3) ∧ (¬x2 ∨ x3 ∨ ¬x4) ∧ (¬x1 ∨ x2 ∨ x4).
pub fn figure_formula() -> Cnf3 {
    Cnf3::from_dimacs_clauses(4, &[&[1, 2, -3], &[-2, 3, -4], &[-1, 2, 4]]).expect("valid formula")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_dimacs() {
        let (cnf, hints) = parse_dimacs("c hello\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n").unwrap();
        assert_eq!(cnf.num_vars, 3);
        assert_eq!(cnf.clauses, vec![vec![Lit::pos(0), Lit::neg(1)], vec![Lit::pos(1), Lit::pos(2), Lit::neg(0)]]);
        assert!(hints.is_empty());
    }

    #[test]
    fn parses_layout_hints() {
        let text = "c layout spine 2 1\nc layout clause 1 side=below order=2\np cnf 2 1\n1 2 0\n";
        let (_, hints) = parse_dimacs(text).unwrap();
        assert_eq!(hints.spine, Some(vec![1, 0]));
        assert_eq!(hints.clauses[&0], ClauseHint { side: ClauseSide::Below, level: Some(2) });
    }

    #[test]
    fn rejects_malformed_input() {
        assert_eq!(parse_dimacs("1 2 0\n"), Err(DimacsError::MissingHeader));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 x 0\n"), Err(DimacsError::Syntax { .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 3 0\n"), Err(DimacsError::Syntax { .. })));
        assert_eq!(parse_dimacs("p cnf 2 1\n1 2\n"), Err(DimacsError::Unterminated));
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 2 0\n"),
            Err(DimacsError::ClauseCount { declared: 2, found: 1 })
        );
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 -1 0\n"),
            Err(DimacsError::Invalid(CnfError::RepeatedVariable(0)))
        );
        assert!(matches!(parse_dimacs("p cnf 4 1\n1 2 3 4 0\n"), Err(DimacsError::Invalid(_))));
    }

    #[test]
    fn dimacs_round_trip_with_hints() {
        let cnf = figure_formula();
        let mut hints = LayoutHints::default();
        hints.clauses.insert(1, ClauseHint { side: ClauseSide::Below, level: Some(1) });
        let text = cnf.to_dimacs(Some(&hints));
        assert_eq!(parse_dimacs(&text).unwrap(), (cnf, hints));
    }

    #[test]
    fn figure_formula_degrees() {
        assert_eq!(figure_formula().degrees(), vec![2, 3, 2, 2]);
    }
}
