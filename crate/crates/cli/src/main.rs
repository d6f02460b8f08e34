//! `maxmin`: compile planar 3SAT formulas into covering and point instances,
//! solve them, check the reduction end to end and draw the results.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use maxmin_core::cds::{solve_bruteforce, solve_structured, validate_instance, CdsInstance, DEFAULT_STABBER_CAP};
use maxmin_core::cnf::{parse_dimacs, Cnf3};
use maxmin_core::geom::{format_rational, Point};
use maxmin_core::harness::{check_seeds, end_to_end_check, sat_bruteforce};
use maxmin_core::reduction::*;
use maxmin_core::render::{render_cds, render_points, RenderSpec};
use maxmin_core::triangulation::{maxmin_triangulation, PointSet, DEFAULT_POINT_CAP};
use serde_json::{json, Value};

const POINT_CAP_VAR: &str = "MAXMIN_POINT_CAP";
const STABBER_CAP_VAR: &str = "MAXMIN_STABBER_CAP";

#[derive(Parser)]
#[command(name = "maxmin", version, about = "MaxMin-length triangulation hardness toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a DIMACS formula into cds.json, cert.json and points.json.
    Compile {
        cnf: PathBuf,
        /// Gap polynomial such as "n^2": ε is chosen so that δ/ε exceeds it.
        #[arg(long)]
        gap: Option<String>,
        /// First perturbation schedule.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve a formula, covering instance or point set.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Certificate for the structured covering solver.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Write the solution here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check SAT, covering and triangulation feasibility agree.
    Verify {
        cnf: Option<PathBuf>,
        #[arg(long, conflicts_with = "cnf")]
        seeds: Option<u64>,
    },
    /// Draw a cds.json or points.json artifact as SVG.
    Render {
        artifact: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        #[arg(long)]
        labels: bool,
        /// Draw a MaxMin triangulation of a small point instance.
        #[arg(long)]
        triangulate: bool,
        #[arg(long)]
        no_pairs: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cds,
    Maxmin,
    Sat,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
    defects: Vec<String>,
}

impl Failure {
    fn new(code: u8, err: impl Into<anyhow::Error>) -> Self {
        Failure { code, err: err.into(), defects: Vec::new() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure::new(1, err)
    }
}

fn parse_failure(err: impl Into<anyhow::Error>) -> Failure {
    Failure::new(2, err)
}

fn reduction_failure(e: ReductionError) -> Failure {
    let code = match e {
        ReductionError::NotPlanarWithHints { .. } | ReductionError::DegenerateDirections { .. } => 3,
        _ => 4,
    };
    let defects = vec![e.to_string()];
    Failure { code, err: e.into(), defects }
}

fn cap(var: &str, default: usize) -> Result<usize, Failure> {
    match std::env::var(var) {
        Ok(v) => v.parse().map_err(|_| parse_failure(anyhow::anyhow!("{var}={v:?} is not a count"))),
        Err(_) => Ok(default),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::from)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(parse_failure)
}

fn read_cnf(path: &Path) -> Result<(Cnf3, maxmin_core::cnf::LayoutHints), Failure> {
    parse_dimacs(&read(path)?).with_context(|| format!("parsing {}", path.display())).map_err(parse_failure)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::from)
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifacts serialize");
    s.push('\n');
    s
}

fn compile(cnf: &Path, gap: Option<&str>, seed: u64, out: &Path) -> Result<(), Failure> {
    let (f, hints) = read_cnf(cnf)?;
    let gap: Option<GapPoly> = gap.map(str::parse).transpose().map_err(|e: String| parse_failure(anyhow::anyhow!("bad --gap: {e}")))?;
    let hints = (!hints.is_empty()).then_some(&hints);
    let (inst, cert) = compile_3sat_to_cds(&f, hints).map_err(reduction_failure)?;
    audit_construction(&inst, &cert).map_err(reduction_failure)?;
    let (perturbed, pi) = build_point_instance_seeded(&inst, gap.as_ref(), seed).map_err(reduction_failure)?;
    let bad = pi.invariant_violations();
    if !bad.is_empty() {
        return Err(Failure { code: 4, err: anyhow::anyhow!("point instance invariants fail"), defects: bad });
    }
    let soundness = separation_soundness_audit(&pi);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join("cds.json"), &pretty(&inst))?;
    write(&out.join("cert.json"), &pretty(&cert))?;
    write(&out.join("points.json"), &pretty(&pi))?;
    let summary = json!({
        "stabbers": inst.stabbers().len(),
        "targets": inst.targets().len(),
        "perturbed_targets": perturbed.targets().len(),
        "points": pi.len(),
        "pairs": pi.pairs.len(),
        "epsilon_sq": format_rational(&pi.epsilon_sq),
        "delta_sq": format_rational(&pi.delta_sq),
        "soundness_violations": soundness.len(),
    });
    println!("{summary}");
    Ok(())
}

/// A point instance or a bare JSON list of points.
fn read_point_set(path: &Path) -> Result<PointSet, Failure> {
    let v: Value = read_json(path)?;
    if v.is_array() {
        let pts: Vec<Point> = serde_json::from_value(v).map_err(parse_failure)?;
        PointSet::new(pts).map_err(parse_failure)
    } else {
        let pi: PointInstance = serde_json::from_value(v).map_err(parse_failure)?;
        Ok(pi.points)
    }
}

fn solve(file: &Path, mode: Mode, cert: Option<&Path>) -> Result<(Value, String), Failure> {
    Ok(match mode {
        Mode::Sat => {
            let (f, _) = read_cnf(file)?;
            match sat_bruteforce(&f).map_err(|e| Failure::new(1, e))? {
                Some(a) => (json!({"status": "satisfiable", "assignment": a}), "satisfiable".into()),
                None => (json!({"status": "infeasible"}), "unsatisfiable".into()),
            }
        }
        Mode::Cds => {
            let inst: CdsInstance = read_json(file)?;
            let defects = validate_instance(&inst);
            if !defects.is_empty() {
                return Err(Failure {
                    code: 2,
                    err: anyhow::anyhow!("invalid covering instance"),
                    defects: defects.iter().map(|d| format!("{d:?}")).collect(),
                });
            }
            let sol = match cert {
                Some(c) => {
                    let cert: GadgetCertificate = read_json(c)?;
                    solve_structured(&inst, &cert).map_err(|e| Failure::new(1, e))?
                }
                None => {
                    let cap = cap(STABBER_CAP_VAR, DEFAULT_STABBER_CAP)?;
                    solve_bruteforce(&inst, cap).map_err(|e| Failure::new(1, e))?
                }
            };
            match sol {
                Some(s) => {
                    let msg = format!("cover of size {}", s.chosen.len());
                    (json!({"status": "feasible", "chosen": s.chosen}), msg)
                }
                None => (json!({"status": "infeasible"}), "no cover".into()),
            }
        }
        Mode::Maxmin => {
            let ps = read_point_set(file)?;
            let cap = cap(POINT_CAP_VAR, DEFAULT_POINT_CAP)?;
            let r = maxmin_triangulation(&ps, cap).map_err(|e| Failure::new(1, e))?;
            let edges: Vec<[usize; 2]> = r.witness.edges.iter().map(|e| [e.i, e.j]).collect();
            let opt = format_rational(&r.optimum_sq);
            let msg = format!("shortest edge squared {opt}");
            (json!({"status": "feasible", "optimum_sq": opt, "edges": edges}), msg)
        }
    })
}

fn verify(cnf: Option<&Path>, seeds: Option<u64>) -> Result<bool, Failure> {
    let reports = match (cnf, seeds) {
        (Some(p), _) => {
            let (f, _) = read_cnf(p)?;
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            vec![end_to_end_check(&id, &f).map_err(|e| Failure::new(4, e))?]
        }
        (None, Some(n)) => check_seeds(n).into_iter().collect::<Result<_, _>>().map_err(|e| Failure::new(4, anyhow::anyhow!(e)))?,
        (None, None) => return Err(parse_failure(anyhow::anyhow!("give a formula file or --seeds"))),
    };
    let mut ok = true;
    for r in &reports {
        ok &= r.consistent;
        println!("{}", serde_json::to_string(r).expect("reports serialize"));
    }
    Ok(ok)
}

fn render(artifact: &Path, cert: Option<&Path>, spec: &RenderSpec, triangulate: bool) -> Result<String, Failure> {
    let v: Value = read_json(artifact)?;
    let has = |k: &str| v.get(k).is_some();
    if has("pairs") && has("stabber_edges") {
        let pi: PointInstance = serde_json::from_value(v).map_err(parse_failure)?;
        let tri = if triangulate {
            let cap = cap(POINT_CAP_VAR, DEFAULT_POINT_CAP)?;
            Some(maxmin_triangulation(&pi.points, cap).map_err(|e| Failure::new(1, e))?.witness)
        } else {
            None
        };
        render_points(&pi, tri.as_ref(), spec).map_err(parse_failure)
    } else if has("stabbers") && has("targets") {
        let inst: CdsInstance = serde_json::from_value(v).map_err(parse_failure)?;
        let cert: Option<GadgetCertificate> = cert.map(read_json).transpose()?;
        render_cds(&inst, cert.as_ref(), spec).map_err(parse_failure)
    } else {
        Err(parse_failure(anyhow::anyhow!("unknown artifact kind in {}", artifact.display())))
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.cmd {
        Cmd::Compile { cnf, gap, seed, out } => compile(&cnf, gap.as_deref(), seed, &out).map(|_| true),
        Cmd::Solve { file, mode, cert, out } => {
            let (v, msg) = solve(&file, mode, cert.as_deref())?;
            eprintln!("{msg}");
            match out {
                Some(p) => write(&p, &pretty(&v))?,
                None => println!("{v}"),
            }
            Ok(true)
        }
        Cmd::Verify { cnf, seeds } => verify(cnf.as_deref(), seeds),
        Cmd::Render { artifact, cert, out, width, height, labels, triangulate, no_pairs } => {
            let spec = RenderSpec { width, height, labels, pairs: !no_pairs, ..RenderSpec::default() };
            let svg = render(&artifact, cert.as_deref(), &spec, triangulate)?;
            match out {
                Some(p) => write(&p, &svg)?,
                None => print!("{svg}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            if !f.defects.is_empty() {
                println!("{}", json!({ "error": f.err.to_string(), "defects": f.defects }));
            }
            ExitCode::from(f.code)
        }
    }
}
