//! The equation system g = (h, a, f): residuals, log-Jacobian, and the
//! linearized cross-ratio constraints.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::decoration::{vertex_frame, CoordIndex, Decoration, CONSISTENCY_TOL, COORDS_PER_TET};
use crate::error::Result;
use crate::exact::ZMatrix;
use crate::linalg::{self, CMatrix, RankInfo};
use crate::triangulation::{TetEdge, Triangulation, VERTICES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "label", rename_all = "kebab-case")]
pub enum RowLabel {
    HFace { tet: usize, face: u8 },
    HVertex { tet: usize, vertex: u8 },
    AVertex { tet: usize, vertex: u8 },
    /// `forward` is the orientation with more ascending vertex pairs.
    FEdge { class: usize, forward: bool },
    FFace { tet: usize, face: u8, to_tet: usize, to_face: u8 },
}

impl RowLabel {
    pub fn is_h(&self) -> bool {
        matches!(self, RowLabel::HFace { .. } | RowLabel::HVertex { .. })
    }

    pub fn is_a(&self) -> bool {
        matches!(self, RowLabel::AVertex { .. })
    }

    pub fn is_f(&self) -> bool {
        matches!(self, RowLabel::FEdge { .. } | RowLabel::FFace { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EquationBody {
    /// sign · ∏ z_col^exp = 1
    Monomial { sign: i8, exponents: Vec<(usize, i64)> },
    /// z_{v,c2} (1 − z_{v,c1}) = 1
    CrossRatio { tet: usize, vertex: u8 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub label: RowLabel,
    pub body: EquationBody,
}

#[derive(Clone, Debug)]
struct EdgeDisplay {
    factors: Vec<TetEdge>,
}

#[derive(Clone, Debug)]
struct FaceDisplay {
    lower: (usize, u8, [u8; 3]),
    upper: (usize, u8, [u8; 3]),
}

#[derive(Clone, Debug)]
pub struct EquationSystem {
    nu: usize,
    equations: Vec<Equation>,
    edge_display: Vec<EdgeDisplay>,
    face_display: Vec<FaceDisplay>,
}

/// Display order of the edge-coordinate factors of the face opposite each vertex.
fn display_triple(face: u8) -> [u8; 3] {
    match face {
        1 => [2, 3, 4],
        2 => [1, 3, 4],
        3 => [1, 4, 2],
        4 => [1, 2, 3],
        _ => panic!("vertex label out of range: {face}"),
    }
}

fn sparse(entries: impl IntoIterator<Item = (usize, i64)>) -> Vec<(usize, i64)> {
    let mut v: Vec<(usize, i64)> = Vec::new();
    for (c, e) in entries {
        match v.iter_mut().find(|(k, _)| *k == c) {
            Some(slot) => slot.1 += e,
            None => v.push((c, e)),
        }
    }
    v.retain(|&(_, e)| e != 0);
    v.sort();
    v
}

impl EquationSystem {
    pub fn build(t: &Triangulation) -> Self {
        let nu = t.nu();
        let mut equations = Vec::with_capacity(16 * nu);
        for tet in 0..nu {
            for face in VERTICES {
                let exps = std::iter::once((CoordIndex::face(tet, face).column(), 1)).chain(
                    VERTICES
                        .iter()
                        .filter(|&&x| x != face)
                        .map(move |&x| (CoordIndex::edge(tet, x, face).column(), -1)),
                );
                equations.push(Equation {
                    label: RowLabel::HFace { tet, face },
                    body: EquationBody::Monomial {
                        sign: -1,
                        exponents: sparse(exps),
                    },
                });
            }
            for vertex in VERTICES {
                let exps = VERTICES
                    .iter()
                    .filter(|&&x| x != vertex)
                    .map(|&x| (CoordIndex::edge(tet, vertex, x).column(), 1));
                equations.push(Equation {
                    label: RowLabel::HVertex { tet, vertex },
                    body: EquationBody::Monomial {
                        sign: -1,
                        exponents: sparse(exps),
                    },
                });
            }
        }
        for tet in 0..nu {
            for vertex in VERTICES {
                equations.push(Equation {
                    label: RowLabel::AVertex { tet, vertex },
                    body: EquationBody::CrossRatio { tet, vertex },
                });
            }
        }
        let mut edge_display = Vec::new();
        for class in t.edge_classes() {
            let ascending = |c: &[TetEdge]| c.iter().filter(|e| e.i < e.j).count();
            let reversed = class.reversed_cycle();
            let mut forward = if ascending(&class.cycle) >= ascending(&reversed) {
                class.cycle.clone()
            } else {
                reversed
            };
            forward.sort();
            for (orientation, factors) in [
                (true, forward.clone()),
                (false, forward.iter().map(TetEdge::reversed).collect::<Vec<_>>()),
            ] {
                let exps = factors
                    .iter()
                    .map(|e| (CoordIndex::edge(e.tet, e.i, e.j).column(), 1));
                equations.push(Equation {
                    label: RowLabel::FEdge {
                        class: class.index,
                        forward: orientation,
                    },
                    body: EquationBody::Monomial {
                        sign: 1,
                        exponents: sparse(exps),
                    },
                });
                edge_display.push(EdgeDisplay { factors });
            }
        }
        let mut face_display = Vec::new();
        for g in t.face_pairs() {
            equations.push(Equation {
                label: RowLabel::FFace {
                    tet: g.tet,
                    face: g.face,
                    to_tet: g.to_tet,
                    to_face: g.to_face,
                },
                body: EquationBody::Monomial {
                    sign: 1,
                    exponents: sparse([
                        (CoordIndex::face(g.tet, g.face).column(), 1),
                        (CoordIndex::face(g.to_tet, g.to_face).column(), 1),
                    ]),
                },
            });
            let lower = display_triple(g.face);
            let mut upper = lower.map(|x| g.perm.apply(x));
            let k = (0..3).min_by_key(|&k| upper[k]).expect("three entries");
            upper.rotate_left(k);
            face_display.push(FaceDisplay {
                lower: (g.tet, g.face, lower),
                upper: (g.to_tet, g.to_face, upper),
            });
        }
        EquationSystem {
            nu,
            equations,
            edge_display,
            face_display,
        }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn indices_where(&self, pred: impl Fn(&RowLabel) -> bool) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| pred(&self.equations[k].label))
            .collect()
    }

    /// Value of each equation minus 1.
    pub fn residual(&self, d: &Decoration) -> Vec<Complex64> {
        self.equations.iter().map(|e| evaluate(e, d) - 1.0).collect()
    }

    pub fn max_residual(&self, d: &Decoration) -> f64 {
        self.residual(d).iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    /// Log-Jacobian with the a-rows in their linearized form; requires consistency.
    pub fn jacobian_log(&self, d: &Decoration) -> Result<CMatrix> {
        d.ensure_consistent(CONSISTENCY_TOL)?;
        Ok(self.jacobian_log_unchecked(d))
    }

    pub fn jacobian_log_unchecked(&self, d: &Decoration) -> CMatrix {
        let cols = COORDS_PER_TET * self.nu;
        let mut j = CMatrix::zeros(self.len(), cols);
        for (r, e) in self.equations.iter().enumerate() {
            match &e.body {
                EquationBody::Monomial { exponents, .. } => {
                    for &(c, x) in exponents {
                        j[(r, c)] = Complex64::new(x as f64, 0.0);
                    }
                }
                EquationBody::CrossRatio { tet, vertex } => {
                    let [c1, c2, c3] = vertex_frame(*vertex);
                    j[(r, CoordIndex::edge(*tet, *vertex, c1).column())] = Complex64::new(1.0, 0.0);
                    j[(r, CoordIndex::edge(*tet, *vertex, c2).column())] = d.edge(*tet, *vertex, c3);
                }
            }
        }
        j
    }

    /// Exponent matrix of the monomial rows selected by `pred` (rows in system order).
    pub fn monomial_matrix(&self, pred: impl Fn(&RowLabel) -> bool) -> ZMatrix {
        let rows: Vec<&Equation> = self
            .equations
            .iter()
            .filter(|e| pred(&e.label) && matches!(e.body, EquationBody::Monomial { .. }))
            .collect();
        let mut m = ZMatrix::zeros(rows.len(), COORDS_PER_TET * self.nu);
        for (r, e) in rows.iter().enumerate() {
            if let EquationBody::Monomial { exponents, .. } = &e.body {
                for &(c, x) in exponents {
                    m[(r, c)] = x.into();
                }
            }
        }
        m
    }

    /// Rows of the a-equations alone, as a 4ν × 16ν matrix at `d`.
    pub fn a_block(&self, d: &Decoration) -> CMatrix {
        let idx = self.indices_where(RowLabel::is_a);
        self.jacobian_log_unchecked(d).select_rows(idx.iter())
    }

    /// Bases of 𝒜_full(z) = Ker d_z a and 𝒜_J(z) = 𝒜_full(z) ∩ ℂ⊗J*.
    pub fn tangent_a(&self, d: &Decoration, tol: f64) -> Result<TangentA> {
        d.ensure_consistent(CONSISTENCY_TOL)?;
        let jac = self.jacobian_log_unchecked(d);
        let a_idx = self.indices_where(RowLabel::is_a);
        let (full, full_info) = linalg::kernel(&jac.select_rows(a_idx.iter()), tol);
        let ha_idx = self.indices_where(|l| l.is_a() || l.is_h());
        let (j, j_info) = linalg::kernel(&jac.select_rows(ha_idx.iter()), tol);
        Ok(TangentA {
            full,
            j,
            full_info,
            j_info,
        })
    }

    pub fn coord_name(&self, c: CoordIndex) -> String {
        format!("{}{}", tet_letter(c.tet, self.nu), c.key())
    }

    /// Edge equations in the notation `z23*z34*z41*w23*w34*w41 = 1`.
    pub fn edge_strings(&self) -> Vec<String> {
        self.edge_display
            .iter()
            .map(|e| {
                let factors: Vec<String> = e
                    .factors
                    .iter()
                    .map(|f| format!("{}{}{}", tet_letter(f.tet, self.nu), f.i, f.j))
                    .collect();
                format!("{} = 1", factors.join("*"))
            })
            .collect()
    }

    /// Face equations with each face coordinate replaced by its edge product.
    pub fn face_strings(&self) -> Vec<String> {
        self.face_display
            .iter()
            .map(|f| {
                let mut factors = Vec::new();
                for (tet, face, triple) in [f.lower, f.upper] {
                    for x in triple {
                        factors.push(format!("{}{}{}", tet_letter(tet, self.nu), x, face));
                    }
                }
                format!("{} = 1", factors.join("*"))
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .equations
            .iter()
            .map(|e| {
                let mut row = serde_json::to_value(external_label(e.label)).expect("serializable");
                let obj = row.as_object_mut().expect("label is an object");
                match &e.body {
                    EquationBody::Monomial { sign, exponents } => {
                        obj.insert("sign".into(), json!(sign));
                        let exps: serde_json::Map<String, serde_json::Value> = exponents
                            .iter()
                            .map(|&(c, x)| (self.coord_name(CoordIndex::from_column(c)), json!(x)))
                            .collect();
                        obj.insert("exponents".into(), serde_json::Value::Object(exps));
                    }
                    EquationBody::CrossRatio { tet, vertex } => {
                        let [c1, c2, _] = vertex_frame(*vertex);
                        let l = tet_letter(*tet, self.nu);
                        obj.insert(
                            "relation".into(),
                            json!(format!("{l}{vertex}{c2}*(1-{l}{vertex}{c1}) = 1")),
                        );
                    }
                }
                row
            })
            .collect();
        json!({
            "version": crate::VERSION,
            "tetrahedra": self.nu,
            "counts": {
                "h": self.indices_where(RowLabel::is_h).len(),
                "a": self.indices_where(RowLabel::is_a).len(),
                "f": self.indices_where(RowLabel::is_f).len(),
            },
            "rows": rows,
            "text": {
                "edges": self.edge_strings(),
                "faces": self.face_strings(),
            },
        })
    }
}

/// Labels with 1-based tetrahedra for external output.
fn external_label(l: RowLabel) -> RowLabel {
    match l {
        RowLabel::HFace { tet, face } => RowLabel::HFace { tet: tet + 1, face },
        RowLabel::HVertex { tet, vertex } => RowLabel::HVertex {
            tet: tet + 1,
            vertex,
        },
        RowLabel::AVertex { tet, vertex } => RowLabel::AVertex {
            tet: tet + 1,
            vertex,
        },
        RowLabel::FEdge { class, forward } => RowLabel::FEdge {
            class: class + 1,
            forward,
        },
        RowLabel::FFace {
            tet,
            face,
            to_tet,
            to_face,
        } => RowLabel::FFace {
            tet: tet + 1,
            face,
            to_tet: to_tet + 1,
            to_face,
        },
    }
}

/// `z`, `w` for two tetrahedra; `z1_`, `z2_`, … otherwise.
pub fn tet_letter(tet: usize, nu: usize) -> String {
    if nu <= 2 {
        ["z", "w"][tet].to_string()
    } else {
        format!("z{}_", tet + 1)
    }
}

fn evaluate(e: &Equation, d: &Decoration) -> Complex64 {
    match &e.body {
        EquationBody::Monomial { sign, exponents } => {
            let mut v = Complex64::new(*sign as f64, 0.0);
            for &(c, x) in exponents {
                v *= d.values()[c].powi(x as i32);
            }
            v
        }
        EquationBody::CrossRatio { tet, vertex } => {
            let [c1, c2, _] = vertex_frame(*vertex);
            d.edge(*tet, *vertex, c2) * (1.0 - d.edge(*tet, *vertex, c1))
        }
    }
}

/// Factor by which the linearized a-row differs from the plain log-derivative of
/// z_{v,c2}(1 − z_{v,c1}): linearized = z_{v,c3} · dlog.
pub fn a_row_scale(d: &Decoration, tet: usize, vertex: u8) -> Complex64 {
    let [_, _, c3] = vertex_frame(vertex);
    d.edge(tet, vertex, c3)
}

#[derive(Clone, Debug)]
pub struct TangentA {
    /// Orthonormal basis of 𝒜_full(z), dimension 12ν.
    pub full: CMatrix,
    /// Orthonormal basis of 𝒜_J(z), dimension 4ν.
    pub j: CMatrix,
    pub full_info: RankInfo,
    pub j_info: RankInfo,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::sister_triangulation;
    use crate::decoration::{expand_reduced, ReducedPoint};

    fn omega() -> Complex64 {
        Complex64::new(0.5, 3f64.sqrt() / 2.0)
    }

    #[test]
    fn row_counts() {
        let sys = EquationSystem::build(&sister_triangulation());
        assert_eq!(sys.len(), 32);
        assert_eq!(sys.indices_where(RowLabel::is_h).len(), 16);
        assert_eq!(sys.indices_where(RowLabel::is_a).len(), 8);
        assert_eq!(sys.indices_where(RowLabel::is_f).len(), 8);
    }

    #[test]
    fn h_row_shapes() {
        let sys = EquationSystem::build(&sister_triangulation());
        for e in sys.equations() {
            if let (RowLabel::HFace { .. }, EquationBody::Monomial { sign, exponents }) = (&e.label, &e.body) {
                assert_eq!(*sign, -1);
                let mut exps: Vec<i64> = exponents.iter().map(|x| x.1).collect();
                exps.sort();
                assert_eq!(exps, vec![-1, -1, -1, 1]);
            }
            if let (RowLabel::HVertex { .. }, EquationBody::Monomial { exponents, .. }) = (&e.label, &e.body) {
                assert_eq!(exponents.iter().map(|x| x.1).collect::<Vec<_>>(), vec![1, 1, 1]);
            }
        }
    }

    #[test]
    fn edge_rows_sum_to_valence() {
        let t = sister_triangulation();
        let sys = EquationSystem::build(&t);
        let classes = t.edge_classes();
        for e in sys.equations() {
            if let (RowLabel::FEdge { class, .. }, EquationBody::Monomial { exponents, .. }) = (&e.label, &e.body) {
                let total: i64 = exponents.iter().map(|x| x.1).sum();
                assert_eq!(total as usize, classes[*class].valence());
            }
        }
    }

    #[test]
    fn omega_point_solves_everything() {
        let sys = EquationSystem::build(&sister_triangulation());
        let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
        assert!(sys.max_residual(&d) <= 1e-13);
    }

    #[test]
    fn scaling_one_tet_breaks_f_rows() {
        let sys = EquationSystem::build(&sister_triangulation());
        let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
        let mut vals = d.values().to_vec();
        for v in vals.iter_mut().take(16) {
            *v *= 1.01;
        }
        let scaled = Decoration::from_values(2, vals).unwrap();
        let res = sys.residual(&scaled);
        let worst_f = sys
            .indices_where(RowLabel::is_f)
            .into_iter()
            .map(|k| res[k].norm())
            .fold(0.0, f64::max);
        // Each sister edge class meets each tetrahedron three times.
        assert!((worst_f - (1.01f64.powi(3) - 1.0)).abs() < 1e-12, "{worst_f}");
    }

    #[test]
    fn expanded_points_satisfy_h_and_a() {
        let sys = EquationSystem::build(&sister_triangulation());
        let r = ReducedPoint::new(
            2,
            [0.3, -1.2, 2.5, 0.7, -0.4, 1.9, 3.1, -2.2]
                .iter()
                .zip([0.5, 0.1, -0.7, 1.3, 0.2, -0.9, 0.4, 0.8])
                .map(|(&a, b)| Complex64::new(a, b))
                .collect(),
        )
        .unwrap();
        let d = expand_reduced(&r).unwrap();
        let res = sys.residual(&d);
        for k in sys.indices_where(|l| l.is_h() || l.is_a()) {
            assert!(res[k].norm() <= 1e-14, "{:?}", sys.equations()[k].label);
        }
    }

    #[test]
    fn a_rows_have_two_entries() {
        let sys = EquationSystem::build(&sister_triangulation());
        let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
        let j = sys.jacobian_log(&d).unwrap();
        for k in sys.indices_where(RowLabel::is_a) {
            let nz = j.row(k).iter().filter(|x| x.norm() > 0.0).count();
            assert_eq!(nz, 2);
        }
    }

    #[test]
    fn inconsistent_point_rejected() {
        let sys = EquationSystem::build(&sister_triangulation());
        let mut d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
        let c = CoordIndex::face(0, 1);
        d.set(c, d.get(c) * 1.1);
        assert!(sys.jacobian_log(&d).is_err());
        assert!(sys.tangent_a(&d, linalg::RANK_TOL).is_err());
    }

    #[test]
    fn tangent_a_dimensions() {
        let sys = EquationSystem::build(&sister_triangulation());
        let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
        let ta = sys.tangent_a(&d, linalg::RANK_TOL).unwrap();
        assert_eq!(ta.full.ncols(), 24);
        assert_eq!(ta.j.ncols(), 8);
        for k in 0..ta.j.ncols() {
            for t in 0..2 {
                for v in VERTICES {
                    let s: Complex64 = VERTICES
                        .iter()
                        .filter(|&&x| x != v)
                        .map(|&x| ta.j[(CoordIndex::edge(t, v, x).column(), k)])
                        .sum();
                    assert!(s.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn h_rows_have_full_rank() {
        let sys = EquationSystem::build(&sister_triangulation());
        let h = sys.monomial_matrix(RowLabel::is_h);
        assert_eq!(crate::exact::rank(&h), 16);
    }
}
