//! `pgl3`: JSON front end for the gluing-equation library.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use pgl3_gluing::analysis::{Analyzer, Tolerances};
use pgl3_gluing::census::{self, CensusEntry, EntryPoint, PathFile, VerifyOptions};
use pgl3_gluing::decoration::{parse_point_file, reduce, reduced_to_json, ValueRepr};
use pgl3_gluing::gluing::EquationSystem;
use pgl3_gluing::lattice::LatticeMaps;
use pgl3_gluing::peripheral::{cusp_systems, hol, CuspSystem};
use pgl3_gluing::solver::{multi_start, newton_solve, CuspTarget, SolveOptions, SolveTarget};
use pgl3_gluing::{Decoration, ReducedPoint, Triangulation, VERSION};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "pgl3", version, about = "Decorated PGL(3,C) gluing equations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Relative singular-value cutoff for numeric ranks.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive)]
    rank_tol: f64,
    /// Largest gluing residual accepted for a solution [default: 1e-12; census uses its own].
    #[arg(long, global = true, value_parser = positive)]
    residual_tol: Option<f64>,
    /// Largest |eigenvalue - 1| accepted as unipotent.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    unipotent_tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for batch work.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Human-readable text instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Input {
    /// Triangulation file [default: the shipped sister manifold].
    #[arg(long, short)]
    triangulation: Option<PathBuf>,
    /// Peripheral paths (one object or an array, one per cusp).
    #[arg(long)]
    paths: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a triangulation file and summarize it.
    Validate { file: PathBuf },
    /// Emit the gluing equations.
    Equations {
        #[command(flatten)]
        input: Input,
    },
    /// Exact lattice dimensions and identities.
    LatticeReport {
        #[command(flatten)]
        input: Input,
    },
    /// Peripheral eigenvalues at a point.
    Holonomy {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        point: PathBuf,
    },
    /// Tangent space, rigidity and positivity data at a point.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        point: PathBuf,
    },
    /// Newton solve for prescribed peripheral eigenvalues.
    Solve {
        #[command(flatten)]
        input: Input,
        /// `unipotent` is the only named target.
        #[arg(long, default_value = "unipotent", conflicts_with = "target_file")]
        target: String,
        #[arg(long)]
        target_file: Option<PathBuf>,
        /// Point file or census id; random starts when absent.
        #[arg(long)]
        start: Option<String>,
        /// Random starts when no start is given.
        #[arg(long, default_value_t = 100)]
        starts: usize,
        /// Hold a reduced coordinate fixed, as tet:vertex (1-based).
        #[arg(long)]
        pin: Vec<String>,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-12, value_parser = positive)]
        tol: f64,
    },
    /// Shipped solution census.
    Census {
        /// Census name (only `sister` ships).
        name: String,
        /// Re-verify every entry.
        #[arg(long)]
        verify: bool,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

enum Failure {
    /// Bad input: exit 2.
    Input(String),
    /// Computation failed: exit 1.
    Compute(String),
}

impl From<pgl3_gluing::Error> for Failure {
    fn from(e: pgl3_gluing::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

/// A report plus whether it records a failed check (exit 1).
struct Outcome {
    report: Value,
    ok: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, ok: true }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_triangulation(input: &Input) -> Result<Triangulation, Failure> {
    match &input.triangulation {
        Some(p) => Ok(Triangulation::from_json(&read(p)?)?),
        None => Ok(census::sister_triangulation()),
    }
}

fn load_cusps(t: &Triangulation, input: &Input) -> Result<Vec<CuspSystem>, Failure> {
    if let Some(p) = &input.paths {
        let v: Value = serde_json::from_str(&read(p)?).map_err(|e| Failure::Input(e.to_string()))?;
        let items = match v {
            Value::Array(items) => items,
            other => vec![other],
        };
        return items
            .into_iter()
            .map(|item| {
                let pf = PathFile::parse(&item.to_string())?;
                Ok(pf.cusp_system(t)?)
            })
            .collect();
    }
    if t.gluings() == census::sister_triangulation().gluings() {
        return Ok(vec![census::sister_cusp_system(t)?]);
    }
    Ok(cusp_systems(t)?)
}

/// Reads a point file; a `point` member (as written by `solve`) is used if present.
fn load_point(path: &Path, nu: usize) -> Result<Decoration, Failure> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let inner = v.get("point").cloned().unwrap_or(v);
    Ok(parse_point_file(&inner.to_string(), nu)?.decoration()?)
}

fn tolerances(g: &Global) -> Tolerances {
    Tolerances {
        rank: g.rank_tol,
        residual: g.residual_tol.unwrap_or(1e-12),
        unipotent: g.unipotent_tol,
        ..Tolerances::default()
    }
}

fn holonomy_json(cs: &[CuspSystem], d: &Decoration) -> Value {
    let values = hol(cs, d);
    let cusps: Vec<Value> = cs
        .iter()
        .zip(&values)
        .map(|(c, h)| {
            json!({
                "cusp": c.cusp,
                "A": h.a,
                "Astar": h.astar,
                "B": h.b,
                "Bstar": h.bstar,
                "unipotent_defect": h.unipotent_defect(),
                "words": {
                    "A": c.word_a.render(&c.word_a.a),
                    "Astar": c.word_a.render(&c.word_a.astar),
                    "B": c.word_b.render(&c.word_b.a),
                    "Bstar": c.word_b.render(&c.word_b.astar),
                },
            })
        })
        .collect();
    json!(cusps)
}

fn validate(file: &Path) -> Result<Outcome, Failure> {
    let t = Triangulation::from_json(&read(file)?)?;
    let cusps = t.cusp_links()?;
    let classes = t.edge_classes();
    Ok(Outcome::ok(json!({
        "version": VERSION,
        "name": t.name(),
        "nu": t.nu(),
        "edges": classes.len(),
        "valences": classes.iter().map(|c| c.valence()).collect::<Vec<_>>(),
        "cusps": cusps.len(),
    })))
}

fn lattice_report(input: &Input) -> Result<Outcome, Failure> {
    let t = load_triangulation(input)?;
    let cusps = t.cusp_links()?.len();
    let r = LatticeMaps::build(&t).dimension_report(cusps);
    let ok = r.all_pass();
    let mut report = serde_json::to_value(&r).expect("serializable");
    report["version"] = json!(VERSION);
    report["all_pass"] = json!(ok);
    Ok(Outcome { report, ok })
}

fn analyze(g: &Global, input: &Input, point: &Path) -> Result<Outcome, Failure> {
    let t = load_triangulation(input)?;
    let cs = load_cusps(&t, input)?;
    let d = load_point(point, t.nu())?;
    let an = Analyzer::new(&t, cs, tolerances(g));
    let r = an.analyze(&d)?;
    let mut report = serde_json::to_value(&r).expect("serializable");
    report["version"] = json!(VERSION);
    Ok(Outcome::ok(report))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetRecord {
    #[serde(rename = "A")]
    a: ValueRepr,
    #[serde(rename = "Astar")]
    astar: ValueRepr,
    #[serde(rename = "B")]
    b: Option<ValueRepr>,
    #[serde(rename = "Bstar")]
    bstar: Option<ValueRepr>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    cusps: Vec<TargetRecord>,
}

fn load_target(name: &str, file: Option<&Path>) -> Result<SolveTarget, Failure> {
    let Some(path) = file else {
        return match name {
            "unipotent" => Ok(SolveTarget::Unipotent),
            other => Err(Failure::Input(format!("unknown target {other:?}; use --target-file"))),
        };
    };
    let tf: TargetFile = serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(e.to_string()))?;
    let opt = |v: &Option<ValueRepr>| v.as_ref().map(ValueRepr::value).transpose();
    let cusps = tf
        .cusps
        .iter()
        .map(|c| {
            Ok(CuspTarget {
                a: c.a.value()?,
                astar: c.astar.value()?,
                b: opt(&c.b)?,
                bstar: opt(&c.bstar)?,
            })
        })
        .collect::<pgl3_gluing::Result<Vec<_>>>()?;
    Ok(SolveTarget::Cusps(cusps))
}

fn entry_point(e: &CensusEntry) -> Result<ReducedPoint, Failure> {
    match &e.point {
        EntryPoint::Point(p) => Ok(p.clone()),
        EntryPoint::Family { param, samples } => Ok(param.evaluate(samples[0])?),
    }
}

fn load_start(source: &str, nu: usize) -> Result<ReducedPoint, Failure> {
    let path = Path::new(source);
    if path.exists() {
        return Ok(reduce(&load_point(path, nu)?)?);
    }
    match census::catalog()?.iter().find(|e| e.id == source) {
        Some(e) if nu == 2 => entry_point(e),
        Some(_) => Err(Failure::Input(format!("census point {source:?} belongs to the sister manifold"))),
        None => Err(Failure::Input(format!("{source:?} is neither a file nor a census id"))),
    }
}

fn parse_pin(s: &str, nu: usize) -> Result<usize, Failure> {
    let bad = || Failure::Input(format!("pin {s:?} is not tet:vertex"));
    let (t, v) = s.split_once(':').ok_or_else(bad)?;
    let t: usize = t.parse().map_err(|_| bad())?;
    let v: usize = v.parse().map_err(|_| bad())?;
    if t == 0 || t > nu || !(1..=4).contains(&v) {
        return Err(bad());
    }
    Ok((t - 1) * 4 + v - 1)
}

fn point_summary(sys: &EquationSystem, cs: &[CuspSystem], p: &ReducedPoint) -> Result<Value, Failure> {
    let d = pgl3_gluing::decoration::expand_reduced(p)?;
    Ok(json!({
        "point": reduced_to_json(p),
        "residual": sys.max_residual(&d),
        "positive": pgl3_gluing::decoration::is_positive(&d),
        "holonomy": holonomy_json(cs, &d),
    }))
}

#[allow(clippy::too_many_arguments)]
fn solve(
    g: &Global,
    input: &Input,
    target: &str,
    target_file: Option<&Path>,
    start: Option<&str>,
    starts: usize,
    pins: &[String],
    max_iter: usize,
    tol: f64,
) -> Result<Outcome, Failure> {
    let t = load_triangulation(input)?;
    let cs = load_cusps(&t, input)?;
    let sys = EquationSystem::build(&t);
    let goal = load_target(target, target_file)?;
    let pinned = pins.iter().map(|s| parse_pin(s, t.nu())).collect::<Result<Vec<_>, _>>()?;
    let opts = SolveOptions {
        max_iter,
        tol,
        pinned,
    };
    if let Some(source) = start {
        let s = load_start(source, t.nu())?;
        let rep = newton_solve(&sys, &cs, &s, &goal, &opts)?;
        let mut report = point_summary(&sys, &cs, &rep.point)?;
        report["version"] = json!(VERSION);
        report["convergence"] = json!({
            "iterations": rep.iterations,
            "residual": rep.residual,
            "history": rep.history,
        });
        return Ok(Outcome::ok(report));
    }
    if !opts.pinned.is_empty() {
        return Err(Failure::Input("--pin needs --start to supply the pinned values".into()));
    }
    let template = ReducedPoint::constant(t.nu(), Complex64::new(0.5, 0.5));
    let found = multi_start(&sys, &cs, &template, &goal, &opts, starts, g.seed);
    let solutions = found
        .iter()
        .map(|p| point_summary(&sys, &cs, p))
        .collect::<Result<Vec<_>, _>>()?;
    let ok = !solutions.is_empty();
    Ok(Outcome {
        report: json!({
            "version": VERSION,
            "seed": g.seed,
            "starts": starts,
            "solutions": solutions,
        }),
        ok,
    })
}

fn census_cmd(g: &Global, name: &str, verify: bool) -> Result<Outcome, Failure> {
    if name != "sister" {
        return Err(Failure::Input(format!("unknown census {name:?}; only \"sister\" ships")));
    }
    if verify {
        let defaults = VerifyOptions::default();
        let opts = VerifyOptions {
            tol: Tolerances {
                rank: g.rank_tol,
                unipotent: g.unipotent_tol,
                residual: g.residual_tol.unwrap_or(defaults.tol.residual),
                ..defaults.tol
            },
            point_residual: g.residual_tol.unwrap_or(defaults.point_residual),
            family_residual: g.residual_tol.unwrap_or(defaults.family_residual),
            jobs: g.jobs as usize,
            ..defaults
        };
        let r = census::verify_catalog(&opts)?;
        let ok = r.all_pass;
        let warnings: Vec<String> = r.warnings().cloned().collect();
        let mut report = serde_json::to_value(&r).expect("serializable");
        report["version"] = json!(VERSION);
        report["warnings"] = json!(warnings);
        return Ok(Outcome { report, ok });
    }
    let entries: Vec<Value> = census::catalog()?
        .iter()
        .map(|e| {
            let point = match &e.point {
                EntryPoint::Point(p) => json!({ "point": reduced_to_json(p) }),
                EntryPoint::Family { param, samples } => json!({
                    "family": param.id.name(),
                    "formulas": param.formulas,
                    "samples": samples,
                }),
            };
            json!({
                "id": e.id,
                "expected": e.expected,
                "provenance": e.provenance,
                "root": e.root,
                "data": point,
            })
        })
        .collect();
    Ok(Outcome::ok(json!({ "version": VERSION, "census": name, "entries": entries })))
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { file } => validate(file),
        Command::Equations { input } => {
            let t = load_triangulation(input)?;
            Ok(Outcome::ok(EquationSystem::build(&t).to_json()))
        }
        Command::LatticeReport { input } => lattice_report(input),
        Command::Holonomy { input, point } => {
            let t = load_triangulation(input)?;
            let cs = load_cusps(&t, input)?;
            let d = load_point(point, t.nu())?;
            let sys = EquationSystem::build(&t);
            Ok(Outcome::ok(json!({
                "version": VERSION,
                "residual": sys.max_residual(&d),
                "cusps": holonomy_json(&cs, &d),
            })))
        }
        Command::Analyze { input, point } => analyze(g, input, point),
        Command::Solve {
            input,
            target,
            target_file,
            start,
            starts,
            pin,
            max_iter,
            tol,
        } => solve(
            g,
            input,
            target,
            target_file.as_deref(),
            start.as_deref(),
            *starts,
            pin,
            *max_iter,
            *tol,
        ),
        Command::Census { name, verify } => census_cmd(g, name, *verify),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "version": VERSION, "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("input", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(Failure::Input(m)) => {
            eprintln!("{}", error_json("input", &m));
            return ExitCode::from(2);
        }
        Err(Failure::Compute(m)) => {
            eprintln!("{}", error_json("computation", &m));
            return ExitCode::from(1);
        }
    };
    let text = if cli.global.pretty {
        render::text(&outcome.report)
    } else {
        let mut s = serde_json::to_string(&outcome.report).expect("serializable");
        s.push('\n');
        s
    };
    match &cli.global.output {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("{}", error_json("input", &format!("{}: {e}", p.display())));
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
