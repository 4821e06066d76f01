mod common;

use std::collections::BTreeSet;

use common::{omega, sister, tau_plus};
use num_complex::Complex64;
use pgl3_gluing::census::{catalog, published, EntryPoint};
use pgl3_gluing::decoration::{expand_reduced, CoordIndex, Decoration, ReducedPoint};
use pgl3_gluing::gluing::{a_row_scale, EquationBody, RowLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn edge_strings_match_published_as_a_set() {
    let s = sister();
    let ours: BTreeSet<String> = s.sys.edge_strings().into_iter().collect();
    let theirs: BTreeSet<String> = published().edges.into_iter().collect();
    assert_eq!(ours, theirs);
}

#[test]
fn face_strings_match_published_in_order() {
    let s = sister();
    assert_eq!(s.sys.face_strings(), published().faces);
}

/// Residuals at exp(ε δ)·d for a log-direction δ on all coordinates.
fn shifted(d: &Decoration, delta: &[Complex64], eps: f64) -> Decoration {
    let vals = d
        .values()
        .iter()
        .zip(delta)
        .map(|(z, x)| z * (x * eps).exp())
        .collect();
    Decoration::from_values(d.nu(), vals).unwrap()
}

#[test]
fn jacobian_matches_finite_differences() {
    let s = sister();
    let cat = catalog().unwrap();
    let pick = |id: &str| match &cat.iter().find(|e| e.id == id).unwrap().point {
        EntryPoint::Point(p) => p.clone(),
        EntryPoint::Family { .. } => unreachable!(),
    };
    let points = [pick("geometric"), pick("CR+"), pick("P-root-3")];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eps = 1e-6;
    for p in &points {
        let d = expand_reduced(p).unwrap();
        let jac = s.sys.jacobian_log(&d).unwrap();
        for _ in 0..20 {
            let delta: Vec<Complex64> = (0..32)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let plus = s.sys.residual(&shifted(&d, &delta, eps));
            let minus = s.sys.residual(&shifted(&d, &delta, -eps));
            for (r, e) in s.sys.equations().iter().enumerate() {
                let fd = (plus[r] - minus[r]) / (2.0 * eps);
                let mut an: Complex64 = (0..32).map(|c| jac[(r, c)] * delta[c]).sum();
                if let EquationBody::CrossRatio { tet, vertex } = e.body {
                    // The stored row is z_{v,c3} times the log-derivative.
                    an /= a_row_scale(&d, tet, vertex);
                } else if let EquationBody::Monomial { .. } = e.body {
                    // d(m − 1) = m · dlog m, and m = 1 at a solution.
                    an *= s.sys.residual(&d)[r] + 1.0;
                }
                assert!((fd - an).norm() <= 1e-6, "row {r} ({:?}): {fd} vs {an}", e.label);
            }
        }
    }
}

#[test]
fn h_vertex_rows_follow_from_a_rows() {
    // Any point satisfying the a-equations (all expansions do) satisfies the
    // h-vertex rows: z_{c1} z_{c2} z_{c3} = −1.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = sister();
    let idx = s.sys.indices_where(|l| matches!(l, RowLabel::HVertex { .. }));
    for _ in 0..20 {
        let vals = (0..8)
            .map(|_| Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect();
        let d = expand_reduced(&ReducedPoint::new(2, vals).unwrap()).unwrap();
        let res = s.sys.residual(&d);
        for &i in &idx {
            assert!(res[i].norm() < 1e-12);
        }
    }
}

#[test]
fn real_golden_point_solves_gluing_equations() {
    let s = sister();
    let d = expand_reduced(&ReducedPoint::constant(2, Complex64::new(1.0 + tau_plus(), 0.0))).unwrap();
    assert!(s.sys.max_residual(&d) < 1e-13);
    let g = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
    assert!(s.sys.max_residual(&g) < 1e-15);
    assert_eq!(CoordIndex::from_column(17).tet, 1);
}
