//! The integer complex C₁ᵒʳ+C₂ → J² → (J²)* → C₁ᵒʳ+C₂ and its sublattices.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use crate::decoration::{vertex_frame, CoordIndex, COORDS_PER_TET};
use crate::error::{Error, Result};
use crate::exact::{self, ZMatrix};
use crate::gluing::{EquationSystem, RowLabel};
use crate::linalg::CMatrix;
use crate::triangulation::{Triangulation, VERTICES};

#[derive(Clone, Debug)]
pub struct LatticeMaps {
    pub nu: usize,
    /// 16ν × 4ν; columns are the f-rows of the equation system.
    pub f: ZMatrix,
    /// 16ν × 16ν skew form q*Ω.
    pub p: ZMatrix,
    /// 4ν × 16ν, the transpose of `f`.
    pub fstar: ZMatrix,
    /// 8ν × 16ν quotient J² → J.
    pub q: ZMatrix,
    /// 16ν × 16ν matrix of Ω* on (J²)*.
    pub omega_star: ZMatrix,
}

/// Column of ē_{v,c} in J = J²/Ker Ω² (c ∈ {c1, c2}).
fn j_index(tet: usize, v: u8, second: bool) -> usize {
    tet * 8 + (v as usize - 1) * 2 + usize::from(second)
}

impl LatticeMaps {
    pub fn build(t: &Triangulation) -> Self {
        Self::from_system(&EquationSystem::build(t))
    }

    pub fn from_system(sys: &EquationSystem) -> Self {
        let nu = sys.nu();
        let n = COORDS_PER_TET * nu;
        let fstar = sys.monomial_matrix(RowLabel::is_f);
        let f = fstar.transpose();
        let mut q = ZMatrix::zeros(8 * nu, n);
        for tet in 0..nu {
            for v in VERTICES {
                let [c1, c2, c3] = vertex_frame(v);
                q[(j_index(tet, v, false), CoordIndex::edge(tet, v, c1).column())] = 1.into();
                q[(j_index(tet, v, true), CoordIndex::edge(tet, v, c2).column())] = 1.into();
                let col = CoordIndex::edge(tet, v, c3).column();
                q[(j_index(tet, v, false), col)] = (-1).into();
                q[(j_index(tet, v, true), col)] = (-1).into();
            }
            for l in VERTICES {
                let face = CoordIndex::face(tet, l).column();
                for x in VERTICES.iter().copied().filter(|&x| x != l) {
                    let e = CoordIndex::edge(tet, x, l).column();
                    for r in 0..8 * nu {
                        let v = q[(r, e)].clone();
                        q[(r, face)] += v;
                    }
                }
            }
        }
        let mut w = ZMatrix::zeros(8 * nu, 8 * nu);
        for tet in 0..nu {
            for v in VERTICES {
                w[(j_index(tet, v, false), j_index(tet, v, true))] = 1.into();
                w[(j_index(tet, v, true), j_index(tet, v, false))] = (-1).into();
            }
        }
        let p = q.transpose().mul(&w).mul(&q);
        let mut omega_star = ZMatrix::zeros(n, n);
        for tet in 0..nu {
            for v in VERTICES {
                let [c1, c2, _] = vertex_frame(v);
                let a = CoordIndex::edge(tet, v, c1).column();
                let b = CoordIndex::edge(tet, v, c2).column();
                omega_star[(a, b)] = 1.into();
                omega_star[(b, a)] = (-1).into();
            }
        }
        LatticeMaps {
            nu,
            f,
            p,
            fstar,
            q,
            omega_star,
        }
    }

    /// Generators of Ker Ω² per tetrahedron: vertex sums then face relations.
    pub fn kernel_generators(&self) -> ZMatrix {
        let n = COORDS_PER_TET * self.nu;
        let mut k = ZMatrix::zeros(n, 8 * self.nu);
        for tet in 0..self.nu {
            for v in VERTICES {
                let col = tet * 8 + (v as usize - 1);
                for x in VERTICES.iter().copied().filter(|&x| x != v) {
                    k[(CoordIndex::edge(tet, v, x).column(), col)] = 1.into();
                }
            }
            for l in VERTICES {
                let col = tet * 8 + 4 + (l as usize - 1);
                k[(CoordIndex::face(tet, l).column(), col)] = 1.into();
                for x in VERTICES.iter().copied().filter(|&x| x != l) {
                    k[(CoordIndex::edge(tet, x, l).column(), col)] = (-1).into();
                }
            }
        }
        k
    }

    /// ℤ-basis of Im p ∩ Ker F*.
    pub fn im_p_cap_ker_fstar(&self) -> ZMatrix {
        exact::lattice_intersection(&exact::image_basis(&self.p), &exact::kernel(&self.fstar))
    }

    /// Generators of Im(p∘F).
    pub fn im_pf(&self) -> ZMatrix {
        exact::image_basis(&self.p.mul(&self.f))
    }

    /// Ω*(ξ, η) for ξ, η vanishing on Ker Ω².
    pub fn omega_star(&self, xi: &[Complex64], eta: &[Complex64]) -> Result<Complex64> {
        for v in [xi, eta] {
            let defect = self.j_star_defect(v);
            if defect > 1e-10 {
                return Err(Error::NotInJStar(defect));
            }
        }
        Ok(self.omega_star_unchecked(xi, eta))
    }

    pub fn omega_star_unchecked(&self, xi: &[Complex64], eta: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for tet in 0..self.nu {
            for v in VERTICES {
                let [c1, c2, _] = vertex_frame(v);
                let a = CoordIndex::edge(tet, v, c1).column();
                let b = CoordIndex::edge(tet, v, c2).column();
                s += xi[a] * eta[b] - xi[b] * eta[a];
            }
        }
        s
    }

    /// Largest |ξ(k)| over the Ker Ω² generators, relative to ‖ξ‖ (absolute when ξ is small).
    pub fn j_star_defect(&self, xi: &[Complex64]) -> f64 {
        let k = self.kernel_generators();
        let scale = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        (0..k.ncols())
            .map(|c| {
                let s: Complex64 = (0..k.nrows())
                    .filter(|&r| !num_traits::Zero::is_zero(&k[(r, c)]))
                    .map(|r| xi[r] * i64::try_from(&k[(r, c)]).expect("small") as f64)
                    .sum();
                s.norm()
            })
            .fold(0.0, f64::max)
            / scale
    }

    pub fn dimension_report(&self, cusps: usize) -> DimensionReport {
        let nu = self.nu;
        let rank_f = exact::rank(&self.f);
        let rank_p = exact::rank(&self.p);
        let ker_p = exact::kernel(&self.p);
        let im_f = exact::image_basis(&self.f);
        let ker_p_cap_im_f = exact::rank(&exact::lattice_intersection(&ker_p, &im_f));
        let v = self.im_p_cap_ker_fstar();
        let dim_v = exact::rank(&v);
        let pf = self.p.mul(&self.f);
        let rank_pf = exact::rank(&pf);
        let gram = v.transpose().mul(&self.omega_star).mul(&v);
        let radical = v.mul(&exact::kernel(&gram));
        let dim_radical = exact::rank(&radical);
        let radical_is_pf = exact::same_span(&radical, &pf);
        let fpf = self.fstar.mul(&self.p).mul(&self.f);
        let torsion = |m: &ZMatrix| -> Vec<String> {
            exact::torsion(&exact::image_basis(m))
                .iter()
                .map(BigInt::to_string)
                .collect()
        };
        let kernel_span_ok = exact::same_span(&ker_p, &self.kernel_generators());
        let expected = Expected {
            rank_f: 4 * nu,
            rank_p: 8 * nu,
            dim_ker_p: 8 * nu,
            dim_ker_p_cap_im_f: 2 * cusps,
            dim_im_p_cap_ker_fstar: 4 * nu + 2 * cusps,
        };
        let checks = vec![
            Check::new("rank F", rank_f, expected.rank_f),
            Check::new("rank p", rank_p, expected.rank_p),
            Check::new("dim Ker p", ker_p.ncols(), expected.dim_ker_p),
            Check::new("dim Ker p ∩ Im F", ker_p_cap_im_f, expected.dim_ker_p_cap_im_f),
            Check::new("dim Im p ∩ Ker F*", dim_v, expected.dim_im_p_cap_ker_fstar),
            Check::boolean("p skew-symmetric", self.p.is_skew_symmetric()),
            Check::boolean("Ker p spanned by vertex sums and face relations", kernel_span_ok),
            Check::boolean("F* p F skew-symmetric", fpf.is_skew_symmetric()),
            Check::boolean("Ker(Ω*|Im p ∩ Ker F*) = Im(p∘F)", radical_is_pf),
        ];
        DimensionReport {
            tetrahedra: nu,
            cusps,
            f_shape: [self.f.nrows(), self.f.ncols()],
            p_shape: [self.p.nrows(), self.p.ncols()],
            rank_f,
            rank_p,
            dim_ker_p: ker_p.ncols(),
            dim_ker_p_cap_im_f: ker_p_cap_im_f,
            dim_im_p_cap_ker_fstar: dim_v,
            rank_pf,
            dim_omega_radical: dim_radical,
            torsion_im_p: torsion(&self.p),
            torsion_im_pf: exact::torsion(&exact::image_basis(&pf))
                .iter()
                .map(BigInt::to_string)
                .collect(),
            torsion_radical: torsion(&radical),
            checks,
        }
    }

    /// Ensures every identity holds, naming the failing ones otherwise.
    pub fn verify(&self, cusps: usize) -> Result<DimensionReport> {
        let report = self.dimension_report(cusps);
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} (got {}, expected {})", c.name, c.value, c.expected))
            .collect();
        if failed.is_empty() {
            Ok(report)
        } else {
            Err(Error::IdentityViolated(failed.join("; ")))
        }
    }

    pub fn to_complex(m: &ZMatrix) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
            Complex64::new(i64::try_from(&m[(r, c)]).expect("small entry") as f64, 0.0)
        })
    }
}

struct Expected {
    rank_f: usize,
    rank_p: usize,
    dim_ker_p: usize,
    dim_ker_p_cap_im_f: usize,
    dim_im_p_cap_ker_fstar: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: String,
    pub expected: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: usize, expected: usize) -> Self {
        Check {
            name: name.into(),
            value: value.to_string(),
            expected: expected.to_string(),
            pass: value == expected,
        }
    }

    fn boolean(name: &str, value: bool) -> Self {
        Check {
            name: name.into(),
            value: value.to_string(),
            expected: "true".into(),
            pass: value,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub tetrahedra: usize,
    pub cusps: usize,
    pub f_shape: [usize; 2],
    pub p_shape: [usize; 2],
    pub rank_f: usize,
    pub rank_p: usize,
    pub dim_ker_p: usize,
    pub dim_ker_p_cap_im_f: usize,
    pub dim_im_p_cap_ker_fstar: usize,
    pub rank_pf: usize,
    /// Dimension of Ker(Ω*) restricted to Im p ∩ Ker F*.
    pub dim_omega_radical: usize,
    /// Smith invariants above 1: index of each lattice in its saturation.
    pub torsion_im_p: Vec<String>,
    pub torsion_im_pf: Vec<String>,
    pub torsion_radical: Vec<String>,
    pub checks: Vec<Check>,
}

impl DimensionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// An element of H¹(T_s, ℚ²): coefficients on the duals of a_s and b_s.
#[derive(Clone, Debug, PartialEq)]
pub struct WpVector {
    pub cusp: usize,
    pub a_part: (BigRational, BigRational),
    pub b_part: (BigRational, BigRational),
}

impl WpVector {
    pub fn from_integers(cusp: usize, a: (i64, i64), b: (i64, i64)) -> Self {
        let q = |x: i64| BigRational::from_integer(x.into());
        WpVector {
            cusp,
            a_part: (q(a.0), q(a.1)),
            b_part: (q(b.0), q(b.1)),
        }
    }
}

/// ⟨(n,m),(n',m')⟩ = (2nn' + 2mm' + nm' + n'm)/3.
pub fn root_product(u: &(BigRational, BigRational), v: &(BigRational, BigRational)) -> BigRational {
    let two = BigRational::from_integer(2.into());
    let three = BigRational::from_integer(3.into());
    (&two * &u.0 * &v.0 + &two * &u.1 * &v.1 + &u.0 * &v.1 + &v.0 * &u.1) / three
}

pub fn wp_pairing(u: &WpVector, v: &WpVector) -> Result<BigRational> {
    if u.cusp != v.cusp {
        return Err(Error::CuspMismatch(u.cusp, v.cusp));
    }
    Ok(root_product(&u.a_part, &v.b_part) - root_product(&u.b_part, &v.a_part))
}

/// The same pairing on complex coefficient pairs, with either the root-space
/// Gram matrix or its inverse. Images of dlog_hol are dual coordinates and
/// pair isotropically with the inverse (`inverse_gram = true`).
pub fn wp_pairing_complex(u: [Complex64; 4], v: [Complex64; 4], inverse_gram: bool) -> Complex64 {
    let dot = |x: [Complex64; 2], y: [Complex64; 2]| -> Complex64 {
        if inverse_gram {
            2.0 * x[0] * y[0] + 2.0 * x[1] * y[1] - x[0] * y[1] - x[1] * y[0]
        } else {
            (2.0 * x[0] * y[0] + 2.0 * x[1] * y[1] + x[0] * y[1] + x[1] * y[0]) / 3.0
        }
    };
    dot([u[0], u[1]], [v[2], v[3]]) - dot([u[2], u[3]], [v[0], v[1]])
}
