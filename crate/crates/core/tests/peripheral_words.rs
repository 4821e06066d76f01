mod common;

use common::{omega, positive_points, sister, Sister};
use num_complex::Complex64;
use pgl3_gluing::analysis::{Analyzer, Tolerances};
use pgl3_gluing::census::{catalog, published, sister_variable, EntryPoint};
use pgl3_gluing::decoration::{expand_reduced, Decoration, ReducedPoint};
use pgl3_gluing::exact::{span_contains, ZMatrix};
use pgl3_gluing::expr;
use pgl3_gluing::gluing::RowLabel;
use pgl3_gluing::lattice::wp_pairing_complex;
use pgl3_gluing::linalg;
use pgl3_gluing::peripheral::{
    homology_basis, intersection_number, reverse_path, simple_cycles, word_from_path, CornerStep,
};
use pgl3_gluing::solver::{FamilyId, FamilyParametrization};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pairs of distinct homologous simple cycles (either orientation).
fn homologous_pairs(s: &Sister) -> Vec<(Vec<CornerStep>, Vec<CornerStep>)> {
    let c = &s.t.cusp_links().unwrap()[0];
    let basis = homology_basis(&s.t, c).unwrap();
    let mut all = simple_cycles(&s.t, c, 8);
    let reversed: Vec<_> = all.iter().map(|p| reverse_path(&s.t, p)).collect();
    all.extend(reversed);
    let class = |p: &Vec<CornerStep>| {
        (
            intersection_number(&s.t, p, &basis.basis_a),
            intersection_number(&s.t, p, &basis.basis_b),
        )
    };
    let mut out = Vec::new();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if class(&all[i]) == class(&all[j]) {
                out.push((all[i].clone(), all[j].clone()));
            }
        }
    }
    out
}

fn column(v: &[i64]) -> ZMatrix {
    ZMatrix::from_fn(v.len(), 1, |r, _| v[r])
}

fn diff(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[test]
fn homologous_paths_differ_by_gluing_relations() {
    let s = sister();
    let mut pairs = homologous_pairs(&s);
    assert!(pairs.len() >= 5);
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let f_hv = s
        .sys
        .monomial_matrix(|l| l.is_f() || matches!(l, RowLabel::HVertex { .. }))
        .transpose();
    let f_h = s.sys.monomial_matrix(|l| l.is_f() || l.is_h()).transpose();
    for (p, q) in pairs.iter().take(5) {
        let (wp, wq) = (word_from_path(&s.t, p).unwrap(), word_from_path(&s.t, q).unwrap());
        assert!(span_contains(&f_hv, &column(&diff(&wp.a, &wq.a))));
        assert!(span_contains(&f_h, &column(&diff(&wp.astar, &wq.astar))));
    }
    // Over all pairs: A never needs the h-face rows, A* sometimes does.
    let mut astar_needs_faces = 0;
    for (p, q) in &pairs {
        let (wp, wq) = (word_from_path(&s.t, p).unwrap(), word_from_path(&s.t, q).unwrap());
        assert!(span_contains(&f_hv, &column(&diff(&wp.a, &wq.a))));
        let d = column(&diff(&wp.astar, &wq.astar));
        assert!(span_contains(&f_h, &d));
        if !span_contains(&f_hv, &d) {
            astar_needs_faces += 1;
        }
    }
    assert!(astar_needs_faces > 0);
}

fn unipotent_points() -> Vec<Decoration> {
    let mut out = Vec::new();
    for e in catalog().unwrap() {
        match e.point {
            EntryPoint::Point(p) => out.push(expand_reduced(&p).unwrap()),
            EntryPoint::Family { param, samples } => {
                for y in samples.iter().take(3) {
                    out.push(expand_reduced(&param.evaluate(*y).unwrap()).unwrap());
                }
            }
        }
    }
    out
}

#[test]
fn words_depend_only_on_homology_at_solutions() {
    let s = sister();
    let pairs = homologous_pairs(&s);
    let mut points = unipotent_points();
    points.extend(positive_points(&s, 3, 9).iter().map(|p| expand_reduced(p).unwrap()));
    for d in &points {
        for (p, q) in pairs.iter().step_by(7) {
            let (a1, s1) = word_from_path(&s.t, p).unwrap().evaluate(d);
            let (a2, s2) = word_from_path(&s.t, q).unwrap().evaluate(d);
            assert!((a1 - a2).norm() <= 1e-10 * a1.norm().max(1.0));
            assert!((s1 - s2).norm() <= 1e-10 * s1.norm().max(1.0));
        }
    }
}

#[test]
fn computed_basis_trivial_at_every_unipotent_point() {
    let s = sister();
    let c = &s.t.cusp_links().unwrap()[0];
    let basis = homology_basis(&s.t, c).unwrap();
    assert_eq!(intersection_number(&s.t, &basis.basis_a, &basis.basis_b), 1);
    for d in unipotent_points() {
        for w in [&basis.word_a, &basis.word_b] {
            let (a, astar) = w.evaluate(&d);
            assert!((a - 1.0).norm() < 1e-9 && (astar - 1.0).norm() < 1e-9);
        }
    }
}

#[test]
fn printed_words_equal_generated_words() {
    let s = sister();
    let words = published().words;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let r = ReducedPoint::new(2, common::random_unit_vector(8, &mut rng).iter().map(|z| z * 2.0 + 0.3).collect()).unwrap();
        let d = expand_reduced(&r).unwrap();
        let vars = |n: &str| sister_variable(&d, n);
        let ev = |k: &str| expr::eval_with(&words[k], &vars).unwrap();
        let (a, astar) = s.cs[0].word_a.evaluate(&d);
        let (b, bstar) = s.cs[0].word_b.evaluate(&d);
        for (x, y) in [(a, ev("A")), (astar, ev("Astar")), (b, ev("B")), (bstar, ev("Bstar"))] {
            assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn family_point_has_trivial_holonomy() {
    let s = sister();
    let p = FamilyParametrization::new(FamilyId::S1Plus).evaluate(Complex64::new(1.0, 0.0)).unwrap();
    let h = pgl3_gluing::peripheral::hol(&s.cs, &expand_reduced(&p).unwrap())[0];
    assert!(h.unipotent_defect() <= 1e-12);
    // A decoration off the variety still has finite, nonzero words.
    let off = expand_reduced(&ReducedPoint::constant(2, Complex64::new(0.4, 0.7))).unwrap();
    let h = pgl3_gluing::peripheral::hol(&s.cs, &off)[0];
    assert!(h.as_array().iter().all(|z| z.is_finite() && z.norm() > 0.0));
    assert!(h.unipotent_defect() > 1e-3);
}

#[test]
fn tangent_image_is_isotropic_lagrangian() {
    let s = sister();
    let an = Analyzer::new(&s.t, s.cs.clone(), Tolerances::default());
    let d = expand_reduced(&ReducedPoint::constant(2, omega())).unwrap();
    let (ker, _) = an.tangent_space(&d).unwrap();
    let rows = pgl3_gluing::lattice::LatticeMaps::to_complex(&pgl3_gluing::peripheral::dlog_hol(&s.cs));
    let img = &rows * &ker;
    // dlog_hol restricted to Ker d_z g has rank 2ℓ.
    assert_eq!(linalg::rank(&img, 1e-8).rank, 2);
    let col = |k: usize| [img[(0, k)], img[(1, k)], img[(2, k)], img[(3, k)]];
    // Pinned convention: (n, m) = (log A, log A*) read as dual coordinates,
    // so the pairing uses the inverse Gram matrix (2,-1;-1,2). At ω every
    // convention is isotropic; off ω only this one is.
    assert!(wp_pairing_complex(col(0), col(1), true).norm() < 1e-12);
    for p in positive_points(&s, 3, 2) {
        let d = expand_reduced(&p).unwrap();
        let img = an.tangent_image(&d).unwrap();
        assert_eq!(img.ncols(), 2);
        let col = |k: usize| [img[(0, k)], img[(1, k)], img[(2, k)], img[(3, k)]];
        assert!(wp_pairing_complex(col(0), col(1), true).norm() < 1e-12);
        assert!(wp_pairing_complex(col(0), col(1), false).norm() > 1e-8);
    }
    for id in ["PSL2R+", "PSL2R-"] {
        let e = catalog().unwrap().into_iter().find(|e| e.id == id).unwrap();
        let EntryPoint::Point(p) = e.point else { unreachable!() };
        let img = an.tangent_image(&expand_reduced(&p).unwrap()).unwrap();
        for i in 0..img.ncols() {
            for j in 0..img.ncols() {
                let c = |k: usize| [img[(0, k)], img[(1, k)], img[(2, k)], img[(3, k)]];
                assert!(wp_pairing_complex(c(i), c(j), true).norm() < 1e-10);
            }
        }
    }
}
