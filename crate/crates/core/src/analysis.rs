//! Tangent spaces, rigidity and positivity at a decoration.
//!
//! Ker d_z g is computed twice: directly from the Jacobian, and as the
//! complexified lattice Im p ∩ Ker F* cut down by the a-equations. Any
//! disagreement is reported as a kernel mismatch.

use num_complex::Complex64;
use serde::Serialize;

use crate::decoration::{is_positive, Decoration, CONSISTENCY_TOL};
use crate::error::{Error, Result};
use crate::gluing::{EquationSystem, RowLabel};
use crate::lattice::LatticeMaps;
use crate::linalg::{self, CMatrix, RankInfo, RANK_TOL};
use crate::peripheral::{dlog_hol, hol, CuspSystem, HolonomyValues};
use crate::triangulation::Triangulation;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff.
    pub rank: f64,
    /// Largest gluing residual accepted for a solution point.
    pub residual: f64,
    /// Largest |eigenvalue − 1| accepted as unipotent.
    pub unipotent: f64,
    /// Largest principal angle between the two kernel computations.
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: RANK_TOL,
            residual: 1e-10,
            unipotent: 1e-9,
            angle: 1e-7,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentReport {
    pub dim_ker_dg: usize,
    /// Dimension from the lattice construction.
    pub dim_lattice: usize,
    pub max_principal_angle: f64,
    pub singular_spectrum: Vec<f64>,
    pub gap: f64,
    pub indeterminate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityReport {
    pub rigid: bool,
    pub intersection_dim: usize,
    pub singular_spectrum: Vec<f64>,
    pub gap: f64,
    pub indeterminate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnipotentReport {
    pub dim: usize,
    pub singular_spectrum: Vec<f64>,
    pub gap: f64,
    pub indeterminate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub max_residual: f64,
    pub dim_ker_dg: usize,
    /// Present only at unipotent points.
    pub dim_unipotent_tangent: Option<usize>,
    pub transversal: bool,
    pub positive: bool,
    pub holonomy: Vec<HolonomyValues>,
    pub unipotent_defect: f64,
    pub tangent: TangentReport,
    pub rigidity: RigidityReport,
    pub unipotent: Option<UnipotentReport>,
    /// True when any reported dimension had a singular-value gap below the threshold.
    pub indeterminate: bool,
    pub tolerances: Tolerances,
}

impl AnalysisReport {
    /// The dimension data that must agree between a point and its conjugate.
    pub fn dimensions(&self) -> (usize, Option<usize>, bool, bool) {
        (
            self.dim_ker_dg,
            self.dim_unipotent_tangent,
            self.transversal,
            self.positive,
        )
    }
}

/// Everything that depends on the triangulation only, computed once.
pub struct Analyzer {
    pub sys: EquationSystem,
    pub lattice: LatticeMaps,
    pub cusps: Vec<CuspSystem>,
    pub tol: Tolerances,
    im_p_ker_fstar: CMatrix,
    im_pf: CMatrix,
    hol_rows: CMatrix,
}

fn info_flags(info: &RankInfo) -> (Vec<f64>, f64, bool) {
    (
        info.singular_values.clone(),
        info.gap,
        !info.determinate(),
    )
}

impl Analyzer {
    pub fn new(t: &Triangulation, cusps: Vec<CuspSystem>, tol: Tolerances) -> Self {
        let sys = EquationSystem::build(t);
        let lattice = LatticeMaps::from_system(&sys);
        let im_p_ker_fstar = LatticeMaps::to_complex(&lattice.im_p_cap_ker_fstar());
        let im_pf = LatticeMaps::to_complex(&lattice.im_pf());
        let hol_rows = LatticeMaps::to_complex(&dlog_hol(&cusps));
        Analyzer {
            sys,
            lattice,
            cusps,
            tol,
            im_p_ker_fstar,
            im_pf,
            hol_rows,
        }
    }

    /// Uses the computed homology basis of every cusp.
    pub fn with_default_cusps(t: &Triangulation, tol: Tolerances) -> Result<Self> {
        Ok(Self::new(t, crate::peripheral::cusp_systems(t)?, tol))
    }

    pub fn hol(&self, d: &Decoration) -> Vec<HolonomyValues> {
        hol(&self.cusps, d)
    }

    pub fn unipotent_defect(&self, d: &Decoration) -> f64 {
        self.hol(d)
            .iter()
            .map(HolonomyValues::unipotent_defect)
            .fold(0.0, f64::max)
    }

    fn require_solution(&self, d: &Decoration) -> Result<f64> {
        d.ensure_consistent(CONSISTENCY_TOL)?;
        let r = self.sys.max_residual(d);
        if r.is_nan() || r > self.tol.residual {
            return Err(Error::NotSolution(r));
        }
        Ok(r)
    }

    /// Orthonormal basis of Ker d_z g, cross-checked against the lattice construction.
    pub fn tangent_space(&self, d: &Decoration) -> Result<(CMatrix, TangentReport)> {
        self.require_solution(d)?;
        let jac = self.sys.jacobian_log_unchecked(d);
        let (direct, info) = linalg::kernel(&jac, self.tol.rank);
        let a_rows = self.sys.a_block(d);
        let (a_full, _) = linalg::kernel(&a_rows, self.tol.rank);
        let (via_lattice, _) = linalg::intersection(&self.im_p_ker_fstar, &a_full, self.tol.rank);
        let angle = linalg::max_principal_angle(&direct, &via_lattice).ok_or_else(|| {
            Error::KernelMismatch(format!(
                "direct kernel has dimension {}, lattice construction {}",
                direct.ncols(),
                via_lattice.ncols()
            ))
        })?;
        if angle > self.tol.angle {
            return Err(Error::KernelMismatch(format!(
                "principal angle {angle:e} between the two kernels"
            )));
        }
        let (singular_spectrum, gap, indeterminate) = info_flags(&info);
        let report = TangentReport {
            dim_ker_dg: direct.ncols(),
            dim_lattice: via_lattice.ncols(),
            max_principal_angle: angle,
            singular_spectrum,
            gap,
            indeterminate,
        };
        Ok((direct, report))
    }

    /// Whether ℂ⊗Im(p∘F) meets the a-tangent space trivially.
    pub fn rigidity_test(&self, d: &Decoration) -> Result<RigidityReport> {
        self.require_solution(d)?;
        let (a_full, _) = linalg::kernel(&self.sys.a_block(d), self.tol.rank);
        let (dim, info) = linalg::intersection_dimension(&self.im_pf, &a_full, self.tol.rank);
        let (singular_spectrum, gap, indeterminate) = info_flags(&info);
        Ok(RigidityReport {
            rigid: dim == 0,
            intersection_dim: dim,
            singular_spectrum,
            gap,
            indeterminate,
        })
    }

    /// Dimension of Ker d_z g ∩ Ker dlog_hol at a unipotent solution.
    pub fn unipotent_tangent_dim(&self, d: &Decoration) -> Result<UnipotentReport> {
        self.require_solution(d)?;
        let defect = self.unipotent_defect(d);
        if defect.is_nan() || defect > self.tol.unipotent {
            return Err(Error::NotUnipotent(defect));
        }
        let jac = self.sys.jacobian_log_unchecked(d);
        let stacked = stack_rows(&jac, &self.hol_rows);
        let (k, info) = linalg::kernel(&stacked, self.tol.rank);
        let (singular_spectrum, gap, indeterminate) = info_flags(&info);
        Ok(UnipotentReport {
            dim: k.ncols(),
            singular_spectrum,
            gap,
            indeterminate,
        })
    }

    /// Image of Ker d_z g under dlog_hol, as columns.
    pub fn tangent_image(&self, d: &Decoration) -> Result<CMatrix> {
        let (k, _) = self.tangent_space(d)?;
        Ok(&self.hol_rows * k)
    }

    /// Distance of ξ from 𝒜_J(z), relative to ‖ξ‖.
    pub fn a_j_defect(&self, d: &Decoration, xi: &[Complex64]) -> f64 {
        let idx = self.sys.indices_where(|l| l.is_a() || l.is_h());
        let m = self.sys.jacobian_log_unchecked(d).select_rows(idx.iter());
        let x = CMatrix::from_column_slice(xi.len(), 1, xi);
        let n = x.norm();
        if n == 0.0 {
            0.0
        } else {
            (m * x).norm() / n
        }
    }

    /// Ω*(ξ, ξ̄) for ξ ∈ 𝒜_J(z); nonzero at positive points.
    pub fn positivity_certificate(&self, d: &Decoration, xi: &[Complex64]) -> Result<Complex64> {
        if !is_positive(d) {
            return Err(Error::NotPositive);
        }
        let defect = self.a_j_defect(d, xi);
        if defect > 1e-8 {
            return Err(Error::NotInAJ(defect));
        }
        let bar: Vec<Complex64> = xi.iter().map(|z| z.conj()).collect();
        Ok(self.lattice.omega_star_unchecked(xi, &bar))
    }

    pub fn analyze(&self, d: &Decoration) -> Result<AnalysisReport> {
        let max_residual = self.require_solution(d)?;
        let (_, tangent) = self.tangent_space(d)?;
        let rigidity = self.rigidity_test(d)?;
        let holonomy = self.hol(d);
        let unipotent_defect = self.unipotent_defect(d);
        let unipotent = if unipotent_defect <= self.tol.unipotent {
            Some(self.unipotent_tangent_dim(d)?)
        } else {
            None
        };
        let indeterminate = tangent.indeterminate
            || rigidity.indeterminate
            || unipotent.as_ref().is_some_and(|u| u.indeterminate);
        Ok(AnalysisReport {
            max_residual,
            dim_ker_dg: tangent.dim_ker_dg,
            dim_unipotent_tangent: unipotent.as_ref().map(|u| u.dim),
            transversal: rigidity.rigid,
            positive: is_positive(d),
            holonomy,
            unipotent_defect,
            tangent,
            rigidity,
            unipotent,
            indeterminate,
            tolerances: self.tol,
        })
    }

    /// Rows of the system whose labels satisfy `pred`, at `d`.
    pub fn jacobian_rows(&self, d: &Decoration, pred: impl Fn(&RowLabel) -> bool) -> CMatrix {
        let idx = self.sys.indices_where(pred);
        self.sys.jacobian_log_unchecked(d).select_rows(idx.iter())
    }
}

fn stack_rows(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{sister_cusp_system, sister_triangulation};
    use crate::decoration::{expand_reduced, ReducedPoint};

    fn omega() -> Complex64 {
        Complex64::new(0.5, 3f64.sqrt() / 2.0)
    }

    fn analyzer() -> Analyzer {
        let t = sister_triangulation();
        let cs = vec![sister_cusp_system(&t).unwrap()];
        Analyzer::new(&t, cs, Tolerances::default())
    }

    #[test]
    fn geometric_point() {
        let a = analyzer();
        let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
        let r = a.analyze(&d).unwrap();
        assert_eq!(r.dim_ker_dg, 2);
        assert_eq!(r.tangent.dim_lattice, 2);
        assert!(r.tangent.gap >= 1e3);
        assert!(r.transversal);
        assert!(r.positive);
        assert_eq!(r.dim_unipotent_tangent, Some(0));
        assert!(!r.indeterminate);
        let c = a.analyze(&d.conj()).unwrap();
        assert_eq!(r.dimensions().0, c.dimensions().0);
        assert_eq!(r.dimensions().1, c.dimensions().1);
        assert!(!c.positive);
    }

    #[test]
    fn real_golden_point_not_rigid() {
        let a = analyzer();
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        let d = expand_reduced(&ReducedPoint::constant(2, Complex64::new(1.0 + tau, 0.0))).unwrap();
        let r = a.analyze(&d).unwrap();
        assert!(!r.transversal);
        assert_eq!(r.dim_unipotent_tangent, Some(1));
        assert!(matches!(
            a.positivity_certificate(&d, &[Complex64::new(0.0, 0.0); 32]),
            Err(Error::NotPositive)
        ));
    }

    #[test]
    fn non_solution_rejected() {
        let a = analyzer();
        let d = expand_reduced(&ReducedPoint::constant(2, Complex64::new(0.3, 0.9))).unwrap();
        assert!(matches!(a.tangent_space(&d), Err(Error::NotSolution(_))));
        assert!(matches!(a.rigidity_test(&d), Err(Error::NotSolution(_))));
    }

    #[test]
    fn certificate_at_geometric_point() {
        let a = analyzer();
        let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
        let tan = a.sys.tangent_a(&d, RANK_TOL).unwrap();
        assert_eq!(tan.j.ncols(), 8);
        let zero = vec![Complex64::new(0.0, 0.0); 32];
        assert_eq!(a.positivity_certificate(&d, &zero).unwrap(), Complex64::new(0.0, 0.0));
        for k in 0..tan.j.ncols() {
            let xi: Vec<Complex64> = tan.j.column(k).iter().copied().collect();
            let v = a.positivity_certificate(&d, &xi).unwrap();
            assert!(v.re.abs() < 1e-12);
            assert!(v.im.abs() > 1e-3);
        }
        let mut bad = zero.clone();
        bad[0] = Complex64::new(1.0, 0.0);
        assert!(matches!(a.positivity_certificate(&d, &bad), Err(Error::NotInAJ(_))));
    }
}
