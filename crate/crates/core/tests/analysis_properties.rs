mod common;

use common::{omega, positive_points, random_unit_vector, sister, tau_plus};
use num_complex::Complex64;
use pgl3_gluing::analysis::{Analyzer, Tolerances};
use pgl3_gluing::census::{catalog, EntryPoint};
use pgl3_gluing::decoration::{expand_reduced, is_positive, vertex_frame, CoordIndex, Decoration, ReducedPoint};
use pgl3_gluing::error::Error;
use pgl3_gluing::linalg::RANK_TOL;
use pgl3_gluing::solver::{FamilyId, FamilyParametrization};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn analyzer() -> Analyzer {
    let s = sister();
    Analyzer::new(&s.t, s.cs, Tolerances::default())
}

/// Random unit combination of a basis of 𝒜_J(z).
fn random_aj(an: &Analyzer, d: &Decoration, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let j = an.sys.tangent_a(d, RANK_TOL).unwrap().j;
    let c = random_unit_vector(j.ncols(), rng);
    (0..j.nrows())
        .map(|r| (0..j.ncols()).map(|k| j[(r, k)] * c[k]).sum())
        .collect()
}

#[test]
fn positive_points_are_rigid_with_tangent_dimension_two() {
    let s = sister();
    let an = analyzer();
    for p in positive_points(&s, 50, 21) {
        let d = expand_reduced(&p).unwrap();
        assert!(is_positive(&d));
        let r = an.analyze(&d).unwrap();
        assert_eq!(r.dim_ker_dg, 2);
        assert!(r.transversal);
        assert!(!r.indeterminate);
        assert!(r.tangent.max_principal_angle <= 1e-7);
    }
}

#[test]
fn certificate_nonzero_on_positive_points() {
    let s = sister();
    let an = analyzer();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in positive_points(&s, 5, 33) {
        let d = expand_reduced(&p).unwrap();
        let floor = d
            .edge_values()
            .map(|(_, z)| (1.0 / z.conj() - 1.0 / z).im.abs())
            .fold(f64::INFINITY, f64::min);
        for _ in 0..50 {
            let xi = random_aj(&an, &d, &mut rng);
            let v = an.positivity_certificate(&d, &xi).unwrap();
            assert!(v.norm() >= 1e-10 * floor, "{v}");
        }
    }
}

#[test]
fn certificate_formula_at_geometric_point() {
    let an = analyzer();
    let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let xi = random_aj(&an, &d, &mut rng);
        let sum: f64 = (0..2)
            .flat_map(|t| (1..=4u8).map(move |v| (t, v)))
            .map(|(t, v)| xi[CoordIndex::edge(t, v, vertex_frame(v)[0]).column()].norm_sqr())
            .sum();
        let expected = Complex64::new(0.0, -3f64.sqrt() * sum);
        let got = an.positivity_certificate(&d, &xi).unwrap();
        assert!((got - expected).norm() <= 1e-12, "{got} vs {expected}");
    }
}

#[test]
fn certificate_refused_off_positive_region() {
    let an = analyzer();
    let zero = vec![Complex64::new(0.0, 0.0); 32];
    for z in [Complex64::new(1.0 + tau_plus(), 0.0), omega().conj()] {
        let d = expand_reduced(&ReducedPoint::constant(2, z)).unwrap();
        assert!(matches!(an.positivity_certificate(&d, &zero), Err(Error::NotPositive)));
    }
}

#[test]
fn reports_are_conjugation_symmetric() {
    let an = analyzer();
    for e in catalog().unwrap() {
        let points = match e.point {
            EntryPoint::Point(p) => vec![p],
            EntryPoint::Family { param, samples } => {
                samples.iter().step_by(8).map(|y| param.evaluate(*y).unwrap()).collect()
            }
        };
        for p in points {
            let d = expand_reduced(&p).unwrap();
            let r = an.analyze(&d).unwrap();
            let c = an.analyze(&d.conj()).unwrap();
            assert_eq!(r.dim_ker_dg, c.dim_ker_dg, "{}", e.id);
            assert_eq!(r.dim_unipotent_tangent, c.dim_unipotent_tangent, "{}", e.id);
            assert_eq!(r.transversal, c.transversal, "{}", e.id);
            assert_eq!(r.rigidity.intersection_dim, c.rigidity.intersection_dim, "{}", e.id);
        }
    }
}

#[test]
fn family_points_are_not_rigid() {
    let an = analyzer();
    let one = Complex64::new(1.0, 0.0);
    let d = expand_reduced(&FamilyParametrization::new(FamilyId::S1Plus).evaluate(one).unwrap()).unwrap();
    let r = an.analyze(&d).unwrap();
    assert!(r.dim_ker_dg >= 2);
    assert!(!r.transversal);
    assert_eq!(r.dim_unipotent_tangent, Some(1));
    assert!(r.dim_ker_dg >= r.dim_unipotent_tangent.unwrap());
    let y = Complex64::new(0.5, 0.25);
    let d = expand_reduced(&FamilyParametrization::new(FamilyId::S2Plus).evaluate(y).unwrap()).unwrap();
    assert_eq!(an.unipotent_tangent_dim(&d).unwrap().dim, 1);
}

#[test]
fn unipotent_dimension_requires_unipotent_point() {
    let s = sister();
    let an = analyzer();
    let p = &positive_points(&s, 1, 5)[0];
    let d = expand_reduced(p).unwrap();
    assert!(matches!(an.unipotent_tangent_dim(&d), Err(Error::NotUnipotent(_))));
    assert_eq!(an.analyze(&d).unwrap().dim_unipotent_tangent, None);
}
