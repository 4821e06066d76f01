//! The figure-eight sister triangulation and its unipotent solution catalog.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{Analyzer, Tolerances};
use crate::decoration::{expand_reduced, Decoration, ReducedPoint, ValueRepr};
use crate::error::{Error, Result};
use crate::expr;
use crate::gluing::EquationSystem;
use crate::peripheral::{hol, CuspSystem, StepRecord};
use crate::solver::{newton_solve, FamilyId, FamilyParametrization, SolveOptions, SolveTarget};
use crate::triangulation::Triangulation;

const SISTER_TRIANGULATION: &str = include_str!("../../../data/sister/triangulation.json");
const SISTER_PATHS: &str = include_str!("../../../data/sister/paths.json");
const SISTER_POINTS: &str = include_str!("../../../data/sister/points.json");
const SISTER_FAMILIES: &str = include_str!("../../../data/sister/families.json");
const SISTER_PUBLISHED: &str = include_str!("../../../data/sister/published.json");

pub fn sister_triangulation() -> Triangulation {
    Triangulation::from_json(SISTER_TRIANGULATION).expect("shipped triangulation is valid")
}

fn syntax(e: serde_json::Error) -> Error {
    Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    #[serde(default)]
    pub cusp: usize,
    pub a: Vec<StepRecord>,
    pub b: Vec<StepRecord>,
}

impl PathFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(syntax)
    }

    pub fn cusp_system(&self, t: &Triangulation) -> Result<CuspSystem> {
        let a = self.a.iter().map(StepRecord::to_step).collect::<Result<Vec<_>>>()?;
        let b = self.b.iter().map(StepRecord::to_step).collect::<Result<Vec<_>>>()?;
        CuspSystem::from_paths(t, self.cusp, a, b)
    }
}

/// The red (A) and green (B) corner paths drawn on the sister's cusp.
pub fn sister_cusp_system(t: &Triangulation) -> Result<CuspSystem> {
    PathFile::parse(SISTER_PATHS)?.cusp_system(t)
}

/// Equations and relations as printed for the sister, in this crate's notation.
#[derive(Clone, Debug, Deserialize)]
pub struct Published {
    pub edges: Vec<String>,
    pub faces: Vec<String>,
    pub words: BTreeMap<String, String>,
    pub relations: BTreeMap<String, String>,
}

pub fn published() -> Published {
    serde_json::from_str(SISTER_PUBLISHED).expect("shipped data parses")
}

/// Looks up `z12`, `w43`, ... in a two-tetrahedron decoration.
pub fn sister_variable(d: &Decoration, name: &str) -> Option<Complex64> {
    let b = name.as_bytes();
    if b.len() != 3 {
        return None;
    }
    let tet = match b[0] {
        b'z' => 0,
        b'w' => 1,
        _ => return None,
    };
    let (i, j) = (b[1].wrapping_sub(b'0'), b[2].wrapping_sub(b'0'));
    if !(1..=4).contains(&i) || !(1..=4).contains(&j) || i == j || tet >= d.nu() {
        return None;
    }
    Some(d.edge(tet, i, j))
}

/// The printed relations h_A, h_A*, h_B, h_B* with all eigenvalues set to 1.
pub fn published_relations(d: &Decoration) -> Result<Vec<(String, Complex64)>> {
    let one = Complex64::new(1.0, 0.0);
    let vars = |name: &str| match name {
        "A" | "Astar" | "B" | "Bstar" => Some(one),
        _ => sister_variable(d, name),
    };
    published()
        .relations
        .iter()
        .map(|(k, e)| Ok((k.clone(), expr::eval_with(e, &vars)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub unipotent: bool,
    pub rigid_first_order: bool,
    pub positive: bool,
    pub unipotent_tangent_dim: usize,
    pub subgroups: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootInfo {
    pub polynomial: String,
    /// Highest degree first.
    pub coefficients: Vec<i64>,
    pub root: Complex64,
    /// The root as shipped, to 30 digits.
    pub digits: [String; 2],
}

impl RootInfo {
    pub fn residual(&self) -> f64 {
        horner(&self.coefficients, self.root).norm()
    }
}

fn horner(c: &[i64], x: Complex64) -> Complex64 {
    c.iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &k| acc * x + k as f64)
}

#[derive(Clone, Debug)]
pub enum EntryPoint {
    Point(ReducedPoint),
    Family {
        param: FamilyParametrization,
        samples: Vec<Complex64>,
    },
}

#[derive(Clone, Debug)]
pub struct CensusEntry {
    pub id: String,
    pub point: EntryPoint,
    pub expected: Expected,
    pub provenance: String,
    pub root: Option<RootInfo>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointsFile {
    order: Vec<String>,
    polynomials: BTreeMap<String, Vec<i64>>,
    entries: Vec<PointRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    id: String,
    values: Vec<ValueRepr>,
    expected: Expected,
    provenance: String,
    #[serde(default)]
    polynomial: Option<String>,
    #[serde(default)]
    root: Option<[String; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamiliesFile {
    #[allow(dead_code)]
    parameter: String,
    order: Vec<String>,
    families: Vec<FamilyRecord>,
    samples: Vec<[f64; 2]>,
    expected: FamilyExpected,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRecord {
    id: String,
    tau: String,
    formulas: Vec<String>,
    #[serde(default)]
    #[allow(dead_code)]
    note: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyExpected {
    unipotent: bool,
    rigid_first_order: bool,
    positive: bool,
    unipotent_tangent_dim: usize,
}

const ORDER: [&str; 8] = ["z12", "z21", "z34", "z43", "w12", "w21", "w34", "w43"];

/// Index of z43 among the reduced coordinates.
const Z43_SLOT: usize = 3;

/// The full catalog. Degree-8 points are re-polished by Newton with z43 pinned
/// to the shipped root, which must satisfy its polynomial to 1e−12.
pub fn catalog() -> Result<Vec<CensusEntry>> {
    let points: PointsFile = serde_json::from_str(SISTER_POINTS).map_err(syntax)?;
    if points.order != ORDER {
        return Err(Error::Point("unexpected coordinate order in points.json".into()));
    }
    let t = sister_triangulation();
    let sys = EquationSystem::build(&t);
    let cs = vec![sister_cusp_system(&t)?];
    let mut out = Vec::new();
    for rec in points.entries {
        let vals = rec
            .values
            .iter()
            .map(ValueRepr::value)
            .collect::<Result<Vec<_>>>()?;
        let mut point = ReducedPoint::new(2, vals)?;
        let root = match (&rec.polynomial, &rec.root) {
            (Some(p), Some([re, im])) => {
                let coefficients = points
                    .polynomials
                    .get(p)
                    .cloned()
                    .ok_or_else(|| Error::Point(format!("unknown polynomial {p}")))?;
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Point(format!("root digit string {s:?}: {e}")))
                };
                let info = RootInfo {
                    polynomial: p.clone(),
                    coefficients,
                    root: Complex64::new(parse(re)?, parse(im)?),
                    digits: [re.clone(), im.clone()],
                };
                point.values_mut()[Z43_SLOT] = info.root;
                let opts = SolveOptions {
                    pinned: vec![Z43_SLOT],
                    ..SolveOptions::default()
                };
                if let Ok(rep) = newton_solve(&sys, &cs, &point, &SolveTarget::Unipotent, &opts) {
                    point = rep.point;
                }
                Some(info)
            }
            _ => None,
        };
        out.push(CensusEntry {
            id: rec.id,
            point: EntryPoint::Point(point),
            expected: rec.expected,
            provenance: rec.provenance,
            root,
        });
    }
    let fam: FamiliesFile = serde_json::from_str(SISTER_FAMILIES).map_err(syntax)?;
    if fam.order != ORDER {
        return Err(Error::Point("unexpected coordinate order in families.json".into()));
    }
    let samples: Vec<Complex64> = fam.samples.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    for f in fam.families {
        let id = FamilyId::parse(&f.id).ok_or_else(|| Error::Point(format!("unknown family {}", f.id)))?;
        let tau = expr::eval(&f.tau)?;
        if (tau - id.tau()).norm() > 1e-15 {
            return Err(Error::Point(format!("family {} has slope {tau}", f.id)));
        }
        let formulas: [String; 8] = f
            .formulas
            .try_into()
            .map_err(|_| Error::Point(format!("family {} needs 8 formulas", id.name())))?;
        out.push(CensusEntry {
            id: id.name().into(),
            point: EntryPoint::Family {
                param: FamilyParametrization { id, formulas },
                samples: samples.clone(),
            },
            expected: Expected {
                unipotent: fam.expected.unipotent,
                rigid_first_order: fam.expected.rigid_first_order,
                positive: fam.expected.positive,
                unipotent_tangent_dim: fam.expected.unipotent_tangent_dim,
                subgroups: Vec::new(),
            },
            provenance: "published closed forms, sampled".into(),
            root: None,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl EntryCheck {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        EntryCheck {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryReport {
    pub id: String,
    pub pass: bool,
    pub samples: usize,
    pub checks: Vec<EntryCheck>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogReport {
    pub all_pass: bool,
    pub entries: Vec<EntryReport>,
    pub catalog_checks: Vec<EntryCheck>,
    pub tolerances: Tolerances,
}

impl CatalogReport {
    pub fn warnings(&self) -> impl Iterator<Item = &String> {
        self.entries.iter().flat_map(|e| e.warnings.iter())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub tol: Tolerances,
    /// Gluing residual for isolated points.
    pub point_residual: f64,
    /// Gluing residual for family samples.
    pub family_residual: f64,
    /// Largest |eigenvalue − 1| along a family.
    pub family_hol: f64,
    pub jobs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: Tolerances::default(),
            point_residual: 1e-10,
            family_residual: 1e-11,
            family_hol: 1e-10,
            jobs: 1,
        }
    }
}

pub fn verify_catalog(opts: &VerifyOptions) -> Result<CatalogReport> {
    verify_entries(&catalog()?, opts)
}

/// Checks one decoration against the expected flags and appends the results.
#[allow(clippy::too_many_arguments)]
fn check_point(
    an: &Analyzer,
    d: &Decoration,
    expected: &Expected,
    residual_tol: f64,
    hol_tol: f64,
    tag: &str,
    checks: &mut Vec<EntryCheck>,
    warnings: &mut Vec<String>,
) {
    let mut push = |name: &str, pass: bool, detail: String| {
        checks.push(EntryCheck::new(&format!("{tag}{name}"), pass, detail));
    };
    let r = an.sys.max_residual(d);
    push("residual", r <= residual_tol, format!("{r:.3e}"));
    let u = an.unipotent_defect(d);
    if expected.unipotent {
        push("unipotent", u <= hol_tol, format!("{u:.3e}"));
        let rel = published_relations(d);
        match rel {
            Ok(rel) => {
                let worst = rel.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
                push("published relations", worst <= 1e-9, format!("{worst:.3e}"));
            }
            Err(e) => push("published relations", false, e.to_string()),
        }
    }
    let positive = crate::decoration::is_positive(d);
    push("positive", positive == expected.positive, positive.to_string());
    // Tangent computations need a solution to the analyzer's tolerance.
    let report = match an.analyze(d) {
        Ok(r) => r,
        Err(e) => {
            push("analysis", false, e.to_string());
            return;
        }
    };
    push(
        "kernel cross-check",
        report.tangent.dim_lattice == report.dim_ker_dg && report.tangent.max_principal_angle <= an.tol.angle,
        format!(
            "dim {} vs {}, angle {:.2e}",
            report.dim_ker_dg, report.tangent.dim_lattice, report.tangent.max_principal_angle
        ),
    );
    push(
        "rigid",
        report.transversal == expected.rigid_first_order,
        report.transversal.to_string(),
    );
    if expected.unipotent {
        let dim = report.dim_unipotent_tangent;
        push(
            "unipotent tangent dimension",
            dim == Some(expected.unipotent_tangent_dim),
            format!("{dim:?}"),
        );
    }
    if report.indeterminate {
        warnings.push(format!(
            "{tag}indeterminate dimension (gaps {:.2e}, {:.2e})",
            report.tangent.gap, report.rigidity.gap
        ));
    }
    // The conjugate point must give the same dimensions.
    match an.analyze(&d.conj()) {
        Ok(c) => {
            let (a, b) = (report.dimensions(), c.dimensions());
            push(
                "conjugate dimensions",
                (a.0, a.1, a.2) == (b.0, b.1, b.2),
                format!("{a:?} vs {b:?}"),
            );
        }
        Err(e) => push("conjugate dimensions", false, e.to_string()),
    }
}

fn verify_entry(an: &Analyzer, e: &CensusEntry, opts: &VerifyOptions) -> EntryReport {
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let mut samples = 1;
    match &e.point {
        EntryPoint::Point(p) => {
            if let Some(root) = &e.root {
                let r = root.residual();
                checks.push(EntryCheck::new("root residual", r <= 1e-12, format!("{r:.3e}")));
                let z43 = p.values()[Z43_SLOT];
                checks.push(EntryCheck::new(
                    "z43 is the root",
                    (z43 - root.root).norm() == 0.0,
                    format!("{z43}"),
                ));
            }
            match expand_reduced(p) {
                Ok(d) => {
                    check_point(
                        an,
                        &d,
                        &e.expected,
                        opts.point_residual,
                        opts.tol.unipotent,
                        "",
                        &mut checks,
                        &mut warnings,
                    );
                    if e.expected.subgroups.iter().any(|s| s == "PSL2R") {
                        // Real points of S1 lie on (x − τ)² + y² = 1 in the z21 plane.
                        let z21 = p.values()[1];
                        let on = [1.0, -1.0].iter().any(|s| {
                            let tau = (1.0 + s * 5f64.sqrt()) / 2.0;
                            ((z21.re - tau).powi(2) + z21.im.powi(2) - 1.0).abs() < 1e-12
                        });
                        checks.push(EntryCheck::new("PU(2,1) circle", on, format!("z21 = {z21}")));
                    }
                }
                Err(err) => checks.push(EntryCheck::new("nondegenerate", false, err.to_string())),
            }
        }
        EntryPoint::Family { param, samples: ys } => {
            samples = ys.len();
            for (k, &y) in ys.iter().enumerate() {
                let tag = format!("Y[{k}] ");
                match param.evaluate(y).and_then(|p| expand_reduced(&p)) {
                    Ok(d) => check_point(
                        an,
                        &d,
                        &e.expected,
                        opts.family_residual,
                        opts.family_hol,
                        &tag,
                        &mut checks,
                        &mut warnings,
                    ),
                    Err(err) => checks.push(EntryCheck::new(&format!("{tag}evaluate"), false, err.to_string())),
                }
                // Conjugating the parameter conjugates the point (real formulas).
                if let (Ok(p), Ok(q)) = (param.evaluate(y), param.evaluate(y.conj())) {
                    let dist = p.conj().max_distance(&q);
                    if dist > 1e-12 {
                        checks.push(EntryCheck::new(&format!("{tag}conjugation"), false, format!("{dist:.3e}")));
                    }
                }
            }
        }
    }
    EntryReport {
        id: e.id.clone(),
        pass: checks.iter().all(|c| c.pass),
        samples,
        checks,
        warnings,
    }
}

pub fn verify_entries(entries: &[CensusEntry], opts: &VerifyOptions) -> Result<CatalogReport> {
    let t = sister_triangulation();
    let an = Analyzer::new(&t, vec![sister_cusp_system(&t)?], opts.tol);
    let jobs = opts.jobs.max(1);
    let mut reports: Vec<Option<EntryReport>> = vec![None; entries.len()];
    std::thread::scope(|s| {
        let chunk = entries.len().div_ceil(jobs).max(1);
        for (out, ents) in reports.chunks_mut(chunk).zip(entries.chunks(chunk)) {
            let an = &an;
            s.spawn(move || {
                for (o, e) in out.iter_mut().zip(ents) {
                    *o = Some(verify_entry(an, e, opts));
                }
            });
        }
    });
    let reports: Vec<EntryReport> = reports.into_iter().map(|r| r.expect("every entry verified")).collect();
    let catalog_checks = catalog_checks(entries);
    Ok(CatalogReport {
        all_pass: reports.iter().all(|r| r.pass) && catalog_checks.iter().all(|c| c.pass),
        entries: reports,
        catalog_checks,
        tolerances: opts.tol,
    })
}

fn catalog_checks(entries: &[CensusEntry]) -> Vec<EntryCheck> {
    let mut out = Vec::new();
    let mut by_poly: BTreeMap<&str, Vec<Complex64>> = BTreeMap::new();
    for e in entries {
        if let Some(r) = &e.root {
            by_poly.entry(&r.polynomial).or_default().push(r.root);
        }
    }
    for (p, roots) in &by_poly {
        let mut min = f64::INFINITY;
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                min = min.min((roots[i] - roots[j]).norm());
            }
        }
        out.push(EntryCheck::new(
            &format!("{p} roots simple"),
            roots.len() == 8 && min > 1e-6,
            format!("{} roots, closest pair {min:.3e}", roots.len()),
        ));
    }
    let points: Vec<(&str, &ReducedPoint)> = entries
        .iter()
        .filter_map(|e| match &e.point {
            EntryPoint::Point(p) => Some((e.id.as_str(), p)),
            EntryPoint::Family { .. } => None,
        })
        .collect();
    let unmatched: Vec<&str> = points
        .iter()
        .filter(|(_, p)| !points.iter().any(|(_, q)| p.conj().max_distance(q) < 1e-8))
        .map(|(id, _)| *id)
        .collect();
    out.push(EntryCheck::new(
        "closed under conjugation",
        unmatched.is_empty(),
        format!("unmatched: {unmatched:?}"),
    ));
    out
}

/// Holonomy of every catalog point, for reports.
pub fn entry_holonomy(cs: &[CuspSystem], p: &ReducedPoint) -> Result<Vec<crate::peripheral::HolonomyValues>> {
    Ok(hol(cs, &expand_reduced(p)?))
}
