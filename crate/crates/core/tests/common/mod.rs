#![allow(dead_code)]

use num_complex::Complex64;
use pgl3_gluing::census::{sister_cusp_system, sister_triangulation};
use pgl3_gluing::decoration::ReducedPoint;
use pgl3_gluing::gluing::EquationSystem;
use pgl3_gluing::peripheral::CuspSystem;
use pgl3_gluing::solver::solve_hol_target;
use pgl3_gluing::triangulation::{FaceGluing, Perm4, Triangulation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn omega() -> Complex64 {
    Complex64::new(0.5, 3f64.sqrt() / 2.0)
}

pub fn tau_plus() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

pub struct Sister {
    pub t: Triangulation,
    pub sys: EquationSystem,
    pub cs: Vec<CuspSystem>,
}

pub fn sister() -> Sister {
    let t = sister_triangulation();
    let sys = EquationSystem::build(&t);
    let cs = vec![sister_cusp_system(&t).unwrap()];
    Sister { t, sys, cs }
}

/// A random triangulation passing validation with torus cusps, by rejection.
pub fn random_triangulation(nu: usize, rng: &mut ChaCha8Rng) -> Triangulation {
    let odd: Vec<Perm4> = Perm4::all().into_iter().filter(Perm4::is_odd).collect();
    loop {
        let mut faces: Vec<(usize, u8)> = (0..nu).flat_map(|t| (1..=4u8).map(move |f| (t, f))).collect();
        faces.shuffle(rng);
        let mut gluings = Vec::new();
        for pair in faces.chunks(2) {
            let ((t0, f0), (t1, f1)) = (pair[0], pair[1]);
            let choices: Vec<Perm4> = odd.iter().copied().filter(|p| p.apply(f0) == f1).collect();
            let perm = choices[rng.random_range(0..choices.len())];
            gluings.push(FaceGluing {
                tet: t0,
                face: f0,
                to_tet: t1,
                to_face: f1,
                perm,
            });
        }
        if let Ok(t) = Triangulation::new("random", nu, gluings) {
            if t.cusp_links().is_ok() {
                return t;
            }
        }
    }
}

/// Positive solutions near the geometric point, reached by solving random
/// small holonomy targets.
pub fn positive_points(s: &Sister, n: usize, seed: u64) -> Vec<ReducedPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = ReducedPoint::constant(2, omega());
    let mut out = Vec::new();
    while out.len() < n {
        let mut log = || Complex64::new(rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01));
        let target = [(log().exp(), log().exp())];
        let sol = solve_hol_target(&s.sys, &s.cs, &base, &target).unwrap();
        if !sol.left_positive {
            out.push(sol.point);
        }
    }
    out
}

pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
