//! Closed corner paths on cusp tori, their eigenvalue words, and the
//! holonomy map with its integer log-derivative.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decoration::{CoordIndex, Decoration, COORDS_PER_TET};
use crate::error::{Error, Result};
use crate::exact::ZMatrix;
use crate::gluing::tet_letter;
use crate::triangulation::{
    boundary_edge, complement2, cyclic_order, CuspSurface, LinkSide, LinkTriangle, Triangulation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

/// One triangle of a corner path: the corner `(v, w)` it cuts off and on which side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CornerStep {
    pub triangle: LinkTriangle,
    pub corner: (u8, u8),
    pub side: Side,
}

impl CornerStep {
    /// Faces through which the path enters and leaves the triangle.
    pub fn faces(&self) -> (u8, u8) {
        let [_, a, b] = ccw_from(self.triangle.vertex, self.corner.1);
        match self.side {
            Side::Left => (b, a),
            Side::Right => (a, b),
        }
    }

    pub fn from_faces(triangle: LinkTriangle, entry: u8, exit: u8) -> CornerStep {
        let v = triangle.vertex;
        let w = crate::triangulation::complement3(v, entry, exit);
        let [_, a, _] = ccw_from(v, w);
        let side = if exit == a { Side::Left } else { Side::Right };
        CornerStep {
            triangle,
            corner: (v, w),
            side,
        }
    }
}

/// Corners of the link triangle at `v` in counterclockwise order starting at `w`.
fn ccw_from(v: u8, w: u8) -> [u8; 3] {
    let c = cyclic_order(v);
    let k = c.iter().position(|&x| x == w).expect("corner of the triangle");
    [c[k], c[(k + 1) % 3], c[(k + 2) % 3]]
}

impl fmt::Display for CornerStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::Left => 'L',
            Side::Right => 'R',
        };
        write!(
            f,
            "T{}:{}{}{}",
            self.triangle.tet + 1,
            self.corner.0,
            self.corner.1,
            s
        )
    }
}

/// Checks that consecutive steps, including last to first, are glued across
/// the exit and entry faces.
pub fn check_closed(t: &Triangulation, path: &[CornerStep]) -> Result<()> {
    if path.is_empty() {
        return Ok(());
    }
    for (k, step) in path.iter().enumerate() {
        let (tri, w) = (step.triangle, step.corner);
        if tri.tet >= t.nu() || w.0 != tri.vertex || w.1 == w.0 || !(1..=4).contains(&w.1) {
            return Err(Error::OpenPath(format!("step {} is not a corner of its triangle", k + 1)));
        }
        let next = path[(k + 1) % path.len()];
        let (_, exit) = step.faces();
        let nb = t.neighbor(tri.tet, exit);
        let arrives = LinkTriangle {
            tet: nb.tet,
            vertex: nb.perm.apply(tri.vertex),
        };
        let (entry, _) = next.faces();
        if arrives != next.triangle || nb.perm.apply(exit) != entry {
            return Err(Error::OpenPath(format!(
                "step {} ({step}) does not lead into step {} ({next})",
                k + 1,
                (k + 1) % path.len() + 1
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolonomyWord {
    pub nu: usize,
    /// Laurent exponents of A over the 16ν coordinates.
    pub a: Vec<i64>,
    /// Laurent exponents of A*.
    pub astar: Vec<i64>,
}

impl HolonomyWord {
    pub fn zero(nu: usize) -> Self {
        HolonomyWord {
            nu,
            a: vec![0; COORDS_PER_TET * nu],
            astar: vec![0; COORDS_PER_TET * nu],
        }
    }

    pub fn evaluate(&self, d: &Decoration) -> (Complex64, Complex64) {
        let eval = |e: &[i64]| {
            e.iter()
                .zip(d.values())
                .filter(|(&x, _)| x != 0)
                .map(|(&x, z)| z.powi(x as i32))
                .product::<Complex64>()
        };
        (eval(&self.a), eval(&self.astar))
    }

    pub fn render(&self, exps: &[i64]) -> String {
        let mut parts = Vec::new();
        for (c, &x) in exps.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let idx = CoordIndex::from_column(c);
            let name = format!("{}{}", tet_letter(idx.tet, self.nu), idx.key());
            parts.push(if x == 1 { name } else { format!("{name}^{x}") });
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// Eigenvalue words of a closed path. Left corner (i,j): A gets z_ij, A* gets
/// 1/z_ji. Right corner (i,j): A gets 1/z_ij, A* gets z_kl z_lk / z_ij.
pub fn word_from_path(t: &Triangulation, path: &[CornerStep]) -> Result<HolonomyWord> {
    check_closed(t, path)?;
    let mut w = HolonomyWord::zero(t.nu());
    for step in path {
        let tet = step.triangle.tet;
        let (i, j) = step.corner;
        let col = |a: u8, b: u8| CoordIndex::edge(tet, a, b).column();
        match step.side {
            Side::Left => {
                w.a[col(i, j)] += 1;
                w.astar[col(j, i)] -= 1;
            }
            Side::Right => {
                let (k, l) = complement2(i, j);
                w.a[col(i, j)] -= 1;
                w.astar[col(i, j)] -= 1;
                w.astar[col(k, l)] += 1;
                w.astar[col(l, k)] += 1;
            }
        }
    }
    Ok(w)
}

fn link_side(step: &CornerStep, exit: bool) -> LinkSide {
    let (entry, out) = step.faces();
    LinkSide {
        tri: step.triangle,
        face: if exit { out } else { entry },
    }
}

/// Algebraic intersection number of two closed corner paths on one cusp.
pub fn intersection_number(t: &Triangulation, a: &[CornerStep], b: &[CornerStep]) -> i64 {
    // Crossing signs of `a`, per link edge keyed by its smaller side.
    let mut crossing: BTreeMap<LinkSide, i64> = BTreeMap::new();
    for k in 0..a.len() {
        let from = link_side(&a[k], true);
        let to = link_side(&a[(k + 1) % a.len()], false);
        let key = from.min(to);
        *crossing.entry(key).or_default() += if from < to { 1 } else { -1 };
    }
    // `b` pushed onto the link 1-skeleton: between consecutive cut corners it
    // runs along the shared edge whenever the corners differ.
    let mut total = 0;
    for k in 0..b.len() {
        let cur = b[k];
        let next = b[(k + 1) % b.len()];
        let (_, exit) = cur.faces();
        let nb = t.neighbor(cur.triangle.tet, exit);
        let w = cur.corner.1;
        if nb.perm.apply(w) == next.corner.1 {
            continue;
        }
        let u = crate::triangulation::complement3(cur.triangle.vertex, exit, w);
        let from = link_side(&cur, true);
        let to = link_side(&next, false);
        let (canon, start, end) = if from < to {
            (from, w, u)
        } else {
            (to, nb.perm.apply(w), nb.perm.apply(u))
        };
        let along = boundary_edge(canon.tri.vertex, canon.face);
        let sign = if along == (start, end) { 1 } else { -1 };
        total += sign * crossing.get(&canon).copied().unwrap_or(0);
    }
    total
}

/// Simple closed corner paths of a cusp (each triangle visited at most once),
/// by increasing length then lexicographically, one orientation per cycle.
pub fn simple_cycles(t: &Triangulation, c: &CuspSurface, max_len: usize) -> Vec<Vec<CornerStep>> {
    let mut out: Vec<Vec<CornerStep>> = Vec::new();
    for len in 1..=max_len.min(c.triangles.len()) {
        let mut found: Vec<Vec<CornerStep>> = Vec::new();
        for &start in &c.triangles {
            for entry in cyclic_order(start.vertex) {
                let mut path = Vec::new();
                extend_cycle(t, start, entry, start, entry, len, &mut path, &mut found);
            }
        }
        found.sort();
        found.dedup();
        // Drop reversed duplicates: keep the lexicographically smaller orientation.
        for cyc in found {
            let rev = canonical_rotation(&reverse_path(t, &cyc));
            if rev < cyc && out.contains(&rev) {
                continue;
            }
            out.push(cyc);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn extend_cycle(
    t: &Triangulation,
    tri: LinkTriangle,
    entry: u8,
    start: LinkTriangle,
    start_entry: u8,
    len: usize,
    path: &mut Vec<CornerStep>,
    found: &mut Vec<Vec<CornerStep>>,
) {
    for exit in cyclic_order(tri.vertex) {
        if exit == entry {
            continue;
        }
        let step = CornerStep::from_faces(tri, entry, exit);
        path.push(step);
        let nb = t.neighbor(tri.tet, exit);
        let next = LinkTriangle {
            tet: nb.tet,
            vertex: nb.perm.apply(tri.vertex),
        };
        let next_entry = nb.perm.apply(exit);
        if path.len() == len {
            if next == start && next_entry == start_entry {
                found.push(path.clone());
            }
        } else if next > start && !path.iter().any(|s| s.triangle == next) {
            // Cycles are rooted at their smallest triangle.
            extend_cycle(t, next, next_entry, start, start_entry, len, path, found);
        }
        path.pop();
    }
}

fn canonical_rotation(path: &[CornerStep]) -> Vec<CornerStep> {
    let k = (0..path.len())
        .min_by_key(|&k| path[k].triangle)
        .unwrap_or(0);
    let mut p = path.to_vec();
    p.rotate_left(k);
    p
}

/// The same curve traversed backwards.
pub fn reverse_path(t: &Triangulation, path: &[CornerStep]) -> Vec<CornerStep> {
    let _ = t;
    path.iter()
        .rev()
        .map(|s| {
            let (entry, exit) = s.faces();
            CornerStep::from_faces(s.triangle, exit, entry)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CuspSystem {
    pub cusp: usize,
    pub basis_a: Vec<CornerStep>,
    pub basis_b: Vec<CornerStep>,
    pub word_a: HolonomyWord,
    pub word_b: HolonomyWord,
}

impl CuspSystem {
    /// Uses the given paths as the basis as drawn; their orientation is not checked.
    pub fn from_paths(
        t: &Triangulation,
        cusp: usize,
        a: Vec<CornerStep>,
        b: Vec<CornerStep>,
    ) -> Result<Self> {
        let word_a = word_from_path(t, &a)?;
        let word_b = word_from_path(t, &b)?;
        Ok(CuspSystem {
            cusp,
            basis_a: a,
            basis_b: b,
            word_a,
            word_b,
        })
    }
}

/// Symplectic basis of H₁ of a cusp torus: the first pair of simple cycles (by
/// length, then lexicographic order of their steps) with intersection ±1,
/// with `b` reversed if needed so that a·b = +1.
pub fn homology_basis(t: &Triangulation, c: &CuspSurface) -> Result<CuspSystem> {
    if c.euler_characteristic() != 0 || !c.orientable {
        return Err(Error::NonTorusCusp {
            cusp: c.index,
            euler: c.euler_characteristic(),
            orientable: c.orientable,
        });
    }
    let cycles = simple_cycles(t, c, c.triangles.len());
    for (i, a) in cycles.iter().enumerate() {
        for b in &cycles[i + 1..] {
            let n = intersection_number(t, a, b);
            if n.abs() == 1 {
                let b = if n == 1 { b.clone() } else { reverse_path(t, b) };
                return CuspSystem::from_paths(t, c.index, a.clone(), b);
            }
        }
    }
    Err(Error::Triangulation(format!(
        "no symplectic pair of simple cycles on cusp {}",
        c.index
    )))
}

/// Cusp systems for every cusp of a triangulation.
pub fn cusp_systems(t: &Triangulation) -> Result<Vec<CuspSystem>> {
    t.cusp_links()?
        .iter()
        .map(|c| homology_basis(t, c))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolonomyValues {
    #[serde(rename = "A")]
    pub a: Complex64,
    #[serde(rename = "Astar")]
    pub astar: Complex64,
    #[serde(rename = "B")]
    pub b: Complex64,
    #[serde(rename = "Bstar")]
    pub bstar: Complex64,
}

impl HolonomyValues {
    pub fn as_array(&self) -> [Complex64; 4] {
        [self.a, self.astar, self.b, self.bstar]
    }

    /// max |value − 1|.
    pub fn unipotent_defect(&self) -> f64 {
        self.as_array()
            .iter()
            .map(|z| (z - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

pub fn hol(cs: &[CuspSystem], d: &Decoration) -> Vec<HolonomyValues> {
    cs.iter()
        .map(|c| {
            let (a, astar) = c.word_a.evaluate(d);
            let (b, bstar) = c.word_b.evaluate(d);
            HolonomyValues { a, astar, b, bstar }
        })
        .collect()
}

/// Rows (A_s, A*_s, B_s, B*_s) per cusp of word exponents.
pub fn dlog_hol(cs: &[CuspSystem]) -> ZMatrix {
    let n = cs.first().map_or(0, |c| c.word_a.a.len());
    let mut m = ZMatrix::zeros(4 * cs.len(), n);
    for (s, c) in cs.iter().enumerate() {
        for (k, row) in [&c.word_a.a, &c.word_a.astar, &c.word_b.a, &c.word_b.astar]
            .into_iter()
            .enumerate()
        {
            for (col, &x) in row.iter().enumerate() {
                m[(4 * s + k, col)] = x.into();
            }
        }
    }
    m
}

/// Path file record: `{"tet": 1, "vertex": 1, "corner": "12", "side": "L"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub tet: usize,
    pub vertex: u8,
    pub corner: String,
    pub side: Side,
}

impl StepRecord {
    pub fn to_step(&self) -> Result<CornerStep> {
        let b = self.corner.as_bytes();
        let bad = || Error::OpenPath(format!("bad corner {:?}", self.corner));
        if b.len() != 2 || self.tet == 0 {
            return Err(bad());
        }
        let (i, j) = (b[0].wrapping_sub(b'0'), b[1].wrapping_sub(b'0'));
        if i != self.vertex || !(1..=4).contains(&j) || i == j {
            return Err(bad());
        }
        Ok(CornerStep {
            triangle: LinkTriangle {
                tet: self.tet - 1,
                vertex: self.vertex,
            },
            corner: (i, j),
            side: self.side,
        })
    }

    pub fn from_step(s: &CornerStep) -> Self {
        StepRecord {
            tet: s.triangle.tet + 1,
            vertex: s.triangle.vertex,
            corner: format!("{}{}", s.corner.0, s.corner.1),
            side: s.side,
        }
    }
}
