//! Gauss–Newton on the reduced coordinates, holonomy-target solving, and the
//! closed-form one-parameter families of unipotent decorations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decoration::{
    expand_reduced, is_positive, vertex_frame, CoordIndex, Decoration, ReducedPoint,
    COORDS_PER_TET,
};
use crate::error::{Error, Result};
use crate::expr;
use crate::gluing::{EquationBody, EquationSystem, RowLabel};
use crate::linalg::CMatrix;
use crate::peripheral::{hol, CuspSystem, HolonomyWord};
use crate::triangulation::VERTICES;

/// Minimum distance kept between every reduced coordinate and {0, 1}.
pub const STEP_GUARD: f64 = 1e-6;

/// Target eigenvalues for one cusp; `None` leaves that eigenvalue free.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CuspTarget {
    pub a: Complex64,
    pub astar: Complex64,
    pub b: Option<Complex64>,
    pub bstar: Option<Complex64>,
}

impl CuspTarget {
    pub fn unipotent() -> Self {
        let one = Complex64::new(1.0, 0.0);
        CuspTarget {
            a: one,
            astar: one,
            b: Some(one),
            bstar: Some(one),
        }
    }

    pub fn a_only(a: Complex64, astar: Complex64) -> Self {
        CuspTarget {
            a,
            astar,
            b: None,
            bstar: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SolveTarget {
    Unipotent,
    Cusps(Vec<CuspTarget>),
}

impl SolveTarget {
    fn per_cusp(&self, cusps: usize) -> Result<Vec<CuspTarget>> {
        match self {
            SolveTarget::Unipotent => Ok(vec![CuspTarget::unipotent(); cusps]),
            SolveTarget::Cusps(v) => {
                if v.len() != cusps {
                    return Err(Error::CuspMismatch(v.len(), cusps));
                }
                for c in v {
                    let vals = [Some(c.a), Some(c.astar), c.b, c.bstar];
                    if vals.iter().flatten().any(|z| z.norm() == 0.0 || !z.is_finite()) {
                        return Err(Error::Point("holonomy targets must be nonzero".into()));
                    }
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Reduced-coordinate slots held fixed (index tet*4 + vertex−1).
    pub pinned: Vec<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 100,
            tol: 1e-12,
            pinned: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub point: ReducedPoint,
    pub iterations: usize,
    pub residual: f64,
    /// Max-norm residual before each iteration and after the last.
    pub history: Vec<f64>,
}

/// One Laurent monomial residual: sign·∏ z^e − target.
struct Term {
    sign: f64,
    exponents: Vec<(usize, i64)>,
    target: Complex64,
}

fn word_term(exps: &[i64], target: Complex64) -> Term {
    Term {
        sign: 1.0,
        exponents: exps
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(c, &x)| (c, x))
            .collect(),
        target,
    }
}

fn terms(sys: &EquationSystem, cs: &[CuspSystem], targets: &[CuspTarget]) -> Vec<Term> {
    let mut out = Vec::new();
    for e in sys.equations() {
        if let (RowLabel::FEdge { .. } | RowLabel::FFace { .. }, EquationBody::Monomial { sign, exponents }) =
            (&e.label, &e.body)
        {
            out.push(Term {
                sign: *sign as f64,
                exponents: exponents.clone(),
                target: Complex64::new(1.0, 0.0),
            });
        }
    }
    for (c, t) in cs.iter().zip(targets) {
        let push = |out: &mut Vec<Term>, w: &HolonomyWord, first: Option<Complex64>, second: Option<Complex64>| {
            if let Some(x) = first {
                out.push(word_term(&w.a, x));
            }
            if let Some(x) = second {
                out.push(word_term(&w.astar, x));
            }
        };
        push(&mut out, &c.word_a, Some(t.a), Some(t.astar));
        push(&mut out, &c.word_b, t.b, t.bstar);
    }
    out
}

/// d log z_c / d x_k for every coordinate c and reduced slot k.
fn dlog_reduced(r: &ReducedPoint) -> CMatrix {
    let nu = r.nu();
    let mut m = CMatrix::zeros(COORDS_PER_TET * nu, 4 * nu);
    for t in 0..nu {
        for v in VERTICES {
            let k = t * 4 + (v as usize - 1);
            let x = r.get(t, v);
            let [c1, c2, c3] = vertex_frame(v);
            m[(CoordIndex::edge(t, v, c1).column(), k)] = x.inv();
            m[(CoordIndex::edge(t, v, c2).column(), k)] = (1.0 - x).inv();
            m[(CoordIndex::edge(t, v, c3).column(), k)] = (x * (x - 1.0)).inv();
        }
        for l in VERTICES {
            let face = CoordIndex::face(t, l).column();
            for x in VERTICES.iter().copied().filter(|&x| x != l) {
                let e = CoordIndex::edge(t, x, l).column();
                for k in 0..4 * nu {
                    let v = m[(e, k)];
                    m[(face, k)] += v;
                }
            }
        }
    }
    m
}

fn monomial(d: &Decoration, t: &Term) -> Complex64 {
    t.exponents
        .iter()
        .map(|&(c, x)| d.values()[c].powi(x as i32))
        .product::<Complex64>()
        * t.sign
}

fn evaluate(terms: &[Term], r: &ReducedPoint) -> Result<Vec<Complex64>> {
    let d = expand_reduced(r)?;
    Ok(terms.iter().map(|t| monomial(&d, t) - t.target).collect())
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn too_close(x: Complex64) -> bool {
    x.norm() < STEP_GUARD || (x - 1.0).norm() < STEP_GUARD || !x.is_finite()
}

/// Damped least-squares Newton on the f-equations and holonomy targets in the
/// 4ν reduced unknowns (h and a hold identically after expansion).
pub fn newton_solve(
    sys: &EquationSystem,
    cs: &[CuspSystem],
    start: &ReducedPoint,
    target: &SolveTarget,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if let Some((k, x)) = start.values().iter().enumerate().find(|(_, &x)| too_close(x)) {
        return Err(Error::Degenerate(format!(
            "start value {x} at reduced slot {k} is within {STEP_GUARD:e} of 0 or 1"
        )));
    }
    let targets = target.per_cusp(cs.len())?;
    let terms = terms(sys, cs, &targets);
    let free: Vec<usize> = (0..start.values().len())
        .filter(|k| !opts.pinned.contains(k))
        .collect();
    let mut x = start.clone();
    let mut res = evaluate(&terms, &x)?;
    let mut r = max_norm(&res);
    let mut history = vec![r];
    let mut best = (r, x.clone());
    for it in 0..opts.max_iter {
        if r <= opts.tol {
            return Ok(SolveReport {
                point: x,
                iterations: it,
                residual: r,
                history,
            });
        }
        let dl = dlog_reduced(&x);
        let mut jac = CMatrix::zeros(terms.len(), free.len());
        for (i, t) in terms.iter().enumerate() {
            let m = res[i] + t.target;
            for (j, &k) in free.iter().enumerate() {
                let s: Complex64 = t.exponents.iter().map(|&(c, e)| dl[(c, k)] * e as f64).sum();
                jac[(i, j)] = m * s;
            }
        }
        let rhs = CMatrix::from_iterator(res.len(), 1, res.iter().map(|z| -z));
        let step = jac
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::DegenerateStep(e.to_string()))?;
        if step.iter().any(|z| !z.is_finite()) {
            return Err(Error::DegenerateStep("non-finite Newton step".into()));
        }
        let norm2 = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let current = norm2(&res);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial = x.clone();
            let vals = trial.values_mut();
            for (j, &k) in free.iter().enumerate() {
                vals[k] += step[j] * alpha;
            }
            if trial.values().iter().all(|&z| !too_close(z)) {
                if let Ok(tr) = evaluate(&terms, &trial) {
                    if norm2(&tr) < current {
                        accepted = Some((trial, tr));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((nx, nres)) = accepted else {
            break;
        };
        x = nx;
        res = nres;
        r = max_norm(&res);
        history.push(r);
        if r < best.0 {
            best = (r, x.clone());
        }
    }
    if r <= opts.tol {
        return Ok(SolveReport {
            point: x,
            iterations: history.len() - 1,
            residual: r,
            history,
        });
    }
    Err(Error::NoConvergence {
        iterations: history.len() - 1,
        residual: best.0,
        history,
    })
}

/// Ratios r_{k+1}/r_k² over the last `window` steps that end above `floor`.
/// Steps landing on the rounding floor say nothing about the convergence order.
pub fn quadratic_ratios(history: &[f64], window: usize, floor: f64) -> Vec<f64> {
    let steps: Vec<f64> = history
        .windows(2)
        .filter(|w| w[1] > floor)
        .map(|w| w[1] / (w[0] * w[0]))
        .collect();
    steps[steps.len().saturating_sub(window)..].to_vec()
}

#[derive(Clone, Debug, Serialize)]
pub struct HolSolve {
    pub point: ReducedPoint,
    pub report: SolveReport,
    /// The solution is a solution but no longer in the positive region.
    pub left_positive: bool,
}

/// Largest radius (in log coordinates) accepted by [`solve_hol_target`].
pub const LOCAL_RADIUS: f64 = 0.05;

/// Solves hol = (A, A*) per cusp near a positive solution.
pub fn solve_hol_target(
    sys: &EquationSystem,
    cs: &[CuspSystem],
    base: &ReducedPoint,
    target: &[(Complex64, Complex64)],
) -> Result<HolSolve> {
    let d = expand_reduced(base)?;
    let r = sys.max_residual(&d);
    if r > 1e-10 {
        return Err(Error::NotSolution(r));
    }
    if !is_positive(&d) {
        return Err(Error::NotPositive);
    }
    if target.len() != cs.len() {
        return Err(Error::CuspMismatch(target.len(), cs.len()));
    }
    let here = hol(cs, &d);
    let dist = here
        .iter()
        .zip(target)
        .flat_map(|(h, t)| [(t.0.ln() - h.a.ln()).norm(), (t.1.ln() - h.astar.ln()).norm()])
        .fold(0.0, f64::max);
    if dist.is_nan() || dist > LOCAL_RADIUS {
        return Err(Error::TargetOutOfRange(dist));
    }
    let goal = SolveTarget::Cusps(target.iter().map(|&(a, s)| CuspTarget::a_only(a, s)).collect());
    let report = newton_solve(sys, cs, base, &goal, &SolveOptions::default())?;
    let sol = expand_reduced(&report.point)?;
    let got = hol(cs, &sol);
    let err = got
        .iter()
        .zip(target)
        .flat_map(|(h, t)| [(h.a - t.0).norm(), (h.astar - t.1).norm()])
        .fold(0.0, f64::max);
    if err > 1e-9 || sys.max_residual(&sol) > 1e-12 {
        return Err(Error::NoConvergence {
            iterations: report.iterations,
            residual: err.max(sys.max_residual(&sol)),
            history: report.history,
        });
    }
    Ok(HolSolve {
        point: report.point.clone(),
        left_positive: !is_positive(&sol),
        report,
    })
}

/// Uniform random start in the annulus 0.2 ≤ |x| ≤ 5, away from 0 and 1.
pub fn random_start(nu: usize, rng: &mut ChaCha8Rng) -> ReducedPoint {
    let vals = (0..4 * nu)
        .map(|_| loop {
            let r = rng.random_range(0.2f64..5.0);
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(r, th);
            if (z - 1.0).norm() > 0.05 {
                break z;
            }
        })
        .collect();
    ReducedPoint::new(nu, vals).expect("length 4ν")
}

/// Runs `starts` seeded random starts (pinned slots copied from `template`)
/// and returns the distinct converged points in order of discovery.
pub fn multi_start(
    sys: &EquationSystem,
    cs: &[CuspSystem],
    template: &ReducedPoint,
    target: &SolveTarget,
    opts: &SolveOptions,
    starts: usize,
    seed: u64,
) -> Vec<ReducedPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<ReducedPoint> = Vec::new();
    for _ in 0..starts {
        let mut s = random_start(template.nu(), &mut rng);
        for &k in &opts.pinned {
            s.values_mut()[k] = template.values()[k];
        }
        if let Ok(rep) = newton_solve(sys, cs, &s, target, opts) {
            if !found.iter().any(|p| p.max_distance(&rep.point) < 1e-6) {
                found.push(rep.point);
            }
        }
    }
    found
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FamilyId {
    S1Plus,
    S1Minus,
    S2Plus,
    S2Minus,
}

impl FamilyId {
    pub const ALL: [FamilyId; 4] = [
        FamilyId::S1Plus,
        FamilyId::S1Minus,
        FamilyId::S2Plus,
        FamilyId::S2Minus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::S1Plus => "S1+",
            FamilyId::S1Minus => "S1-",
            FamilyId::S2Plus => "S2+",
            FamilyId::S2Minus => "S2-",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// τ±, the root of X² = X + 1 fixing the slope X = τ·Y.
    pub fn tau(&self) -> f64 {
        let s = 5f64.sqrt();
        match self {
            FamilyId::S1Plus | FamilyId::S2Plus => (1.0 + s) / 2.0,
            FamilyId::S1Minus | FamilyId::S2Minus => (1.0 - s) / 2.0,
        }
    }
}

/// Closed forms in X and Y for z12, z21, z34, z43, w12, w21, w34, w43.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyParametrization {
    pub id: FamilyId,
    pub formulas: [String; 8],
}

impl FamilyParametrization {
    pub fn new(id: FamilyId) -> Self {
        let s1 = [
            "(X+Y)/(X-1)",
            "1+Y",
            "(X^2+X+Y)/(X*(X-1))",
            "X",
        ];
        let formulas = match id {
            FamilyId::S1Plus | FamilyId::S1Minus => [s1[0], s1[1], s1[2], s1[3], s1[0], s1[1], s1[2], s1[3]],
            FamilyId::S2Plus | FamilyId::S2Minus => {
                let z12 = "1+Y/X-(X+1)*(Y+1)/(X^2+X-1)";
                let z21 = "(X+Y-1)/(Y-1)";
                let z34 = "X+Y";
                let z43 = "1/Y";
                [z12, z21, z34, z43, z21, z12, z43, z34]
            }
        };
        FamilyParametrization {
            id,
            formulas: formulas.map(String::from),
        }
    }

    /// The decoration at parameter Y (with X = τ·Y).
    pub fn evaluate(&self, y: Complex64) -> Result<ReducedPoint> {
        let x = y * self.id.tau();
        let vars = |name: &str| match name {
            "X" => Some(x),
            "Y" => Some(y),
            _ => None,
        };
        let mut vals = Vec::with_capacity(8);
        for f in &self.formulas {
            let v = expr::eval_with(f, &vars).map_err(|_| {
                Error::ExcludedParameter(format!("{} at Y = {y}: {f} is undefined", self.id.name()))
            })?;
            if !v.is_finite() || v.norm() < 1e-9 || (v - 1.0).norm() < 1e-9 {
                return Err(Error::ExcludedParameter(format!(
                    "{} at Y = {y}: {f} = {v}",
                    self.id.name()
                )));
            }
            vals.push(v);
        }
        ReducedPoint::new(2, vals)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySample {
    pub y: Complex64,
    pub point: ReducedPoint,
    pub residual: f64,
    pub unipotent_defect: f64,
}

pub fn sample_family(
    f: &FamilyParametrization,
    sys: &EquationSystem,
    cs: &[CuspSystem],
    params: &[Complex64],
) -> Result<Vec<FamilySample>> {
    params
        .iter()
        .map(|&y| {
            let point = f.evaluate(y)?;
            let d = expand_reduced(&point)?;
            let defect = hol(cs, &d)
                .iter()
                .map(|h| h.unipotent_defect())
                .fold(0.0, f64::max);
            Ok(FamilySample {
                y,
                residual: sys.max_residual(&d),
                unipotent_defect: defect,
                point,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{sister_cusp_system, sister_triangulation};

    fn omega() -> Complex64 {
        Complex64::new(0.5, 3f64.sqrt() / 2.0)
    }

    fn setup() -> (EquationSystem, Vec<CuspSystem>) {
        let t = sister_triangulation();
        (EquationSystem::build(&t), vec![sister_cusp_system(&t).unwrap()])
    }

    #[test]
    fn newton_recovers_geometric_point() {
        let (sys, cs) = setup();
        let mut start = ReducedPoint::constant(2, omega());
        for v in start.values_mut() {
            *v += 0.1;
        }
        let rep = newton_solve(&sys, &cs, &start, &SolveTarget::Unipotent, &SolveOptions::default()).unwrap();
        assert!(rep.point.max_distance(&ReducedPoint::constant(2, omega())) < 1e-12);
        assert!(rep.residual <= 1e-12);
        for ratio in quadratic_ratios(&rep.history, 3, 1e-14) {
            assert!(ratio <= 1e4, "{:?}", rep.history);
        }
        let conj = newton_solve(&sys, &cs, &start.conj(), &SolveTarget::Unipotent, &SolveOptions::default()).unwrap();
        assert!(conj.point.max_distance(&ReducedPoint::constant(2, omega().conj())) < 1e-12);
    }

    #[test]
    fn degenerate_start_rejected() {
        let (sys, cs) = setup();
        let mut start = ReducedPoint::constant(2, omega());
        start.values_mut()[3] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            newton_solve(&sys, &cs, &start, &SolveTarget::Unipotent, &SolveOptions::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn hol_target_round_trip() {
        let (sys, cs) = setup();
        let base = ReducedPoint::constant(2, omega());
        let one = Complex64::new(1.0, 0.0);
        let same = solve_hol_target(&sys, &cs, &base, &[(one, one)]).unwrap();
        assert!(same.point.max_distance(&base) < 1e-12);
        let moved = solve_hol_target(&sys, &cs, &base, &[(Complex64::new(1.01, 0.0), one)]).unwrap();
        let h = hol(&cs, &expand_reduced(&moved.point).unwrap())[0];
        assert!((h.a - 1.01).norm() < 1e-9 && (h.astar - 1.0).norm() < 1e-9);
        assert!(matches!(
            solve_hol_target(&sys, &cs, &base, &[(Complex64::new(1.2, 0.0), one)]),
            Err(Error::TargetOutOfRange(_))
        ));
    }

    #[test]
    fn s1_plus_at_one() {
        let (sys, cs) = setup();
        let f = FamilyParametrization::new(FamilyId::S1Plus);
        let tau = FamilyId::S1Plus.tau();
        let s = &sample_family(&f, &sys, &cs, &[Complex64::new(1.0, 0.0)]).unwrap()[0];
        assert!(s.residual <= 1e-11 && s.unipotent_defect <= 1e-10);
        let p = &s.point;
        assert!((p.get(0, 2) - 2.0).norm() < 1e-12);
        assert!((p.get(0, 4) - tau).norm() < 1e-12);
        assert!((p.get(0, 1) - tau.powi(3)).norm() < 1e-12);
        assert!((p.get(0, 3) - (2.0 * tau + 2.0)).norm() < 1e-12);
        let at_tau = f.evaluate(Complex64::new(tau, 0.0)).unwrap();
        assert!(at_tau.max_distance(&ReducedPoint::constant(2, Complex64::new(1.0 + tau, 0.0))) < 1e-12);
        assert!(matches!(f.evaluate(Complex64::new(0.0, 0.0)), Err(Error::ExcludedParameter(_))));
    }
}
