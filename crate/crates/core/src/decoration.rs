//! Coordinates of a decoration: 12 edge and 4 face cross-ratios per tetrahedron,
//! the internal relations between them, and the 4-per-tetrahedron reduced form.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr;
use crate::triangulation::{cyclic_order, ORDERED_EDGES, VERTICES};

/// Coordinates per tetrahedron.
pub const COORDS_PER_TET: usize = 16;

/// Default exclusion radius around 0 and 1 for edge coordinates.
pub const DEGENERACY_GUARD: f64 = 1e-10;

/// Tolerance on Rel1–Rel3 residuals for a decoration to count as consistent.
pub const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoordKind {
    /// z_ij: at vertex `i` on the edge towards `j`.
    Edge(u8, u8),
    /// The face opposite the given vertex, read with its canonical triple.
    Face(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoordIndex {
    pub tet: usize,
    pub kind: CoordKind,
}

impl CoordIndex {
    pub fn edge(tet: usize, i: u8, j: u8) -> Self {
        CoordIndex {
            tet,
            kind: CoordKind::Edge(i, j),
        }
    }

    pub fn face(tet: usize, opposite: u8) -> Self {
        CoordIndex {
            tet,
            kind: CoordKind::Face(opposite),
        }
    }

    /// Column of this coordinate in the 16ν-dimensional coordinate space.
    pub fn column(&self) -> usize {
        self.tet * COORDS_PER_TET + local_index(self.kind)
    }

    pub fn from_column(col: usize) -> Self {
        let tet = col / COORDS_PER_TET;
        let local = col % COORDS_PER_TET;
        let kind = if local < 12 {
            let (i, j) = ORDERED_EDGES[local];
            CoordKind::Edge(i, j)
        } else {
            CoordKind::Face((local - 11) as u8)
        };
        CoordIndex { tet, kind }
    }

    pub fn is_edge(&self) -> bool {
        matches!(self.kind, CoordKind::Edge(..))
    }

    /// Key used in point files: `"12"` for edges, the canonical triple (`"324"`) for faces.
    pub fn key(&self) -> String {
        match self.kind {
            CoordKind::Edge(i, j) => format!("{i}{j}"),
            CoordKind::Face(l) => {
                let [a, b, c] = canonical_face_triple(l);
                format!("{a}{b}{c}")
            }
        }
    }
}

impl fmt::Display for CoordIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}:{}", self.tet + 1, self.key())
    }
}

fn local_index(kind: CoordKind) -> usize {
    match kind {
        CoordKind::Edge(i, j) => ORDERED_EDGES
            .iter()
            .position(|&e| e == (i, j))
            .expect("valid ordered edge"),
        CoordKind::Face(l) => 11 + l as usize,
    }
}

/// Canonical vertex triple of the face opposite `l`: (1,2,3), (1,3,4), (1,4,2), (3,2,4).
pub fn canonical_face_triple(l: u8) -> [u8; 3] {
    match l {
        4 => [1, 2, 3],
        2 => [1, 3, 4],
        3 => [1, 4, 2],
        1 => [3, 2, 4],
        _ => panic!("vertex label out of range: {l}"),
    }
}

/// The vertex `w` such that z_{v,w} is the reduced unknown at `v`.
pub fn representative(v: u8) -> u8 {
    match v {
        1 => 2,
        2 => 1,
        3 => 4,
        4 => 3,
        _ => panic!("vertex label out of range: {v}"),
    }
}

/// `(c1, c2, c3)`: the cyclic order at `v` started at its representative.
pub fn vertex_frame(v: u8) -> [u8; 3] {
    let c = cyclic_order(v);
    let k = c
        .iter()
        .position(|&x| x == representative(v))
        .expect("representative lies in the cyclic order");
    [c[k], c[(k + 1) % 3], c[(k + 2) % 3]]
}

/// A point of (ℂ^×)^{16ν}: all edge and face coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoration {
    nu: usize,
    values: Vec<Complex64>,
}

impl Decoration {
    pub fn from_values(nu: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != COORDS_PER_TET * nu {
            return Err(Error::Point(format!(
                "expected {} coordinates, got {}",
                COORDS_PER_TET * nu,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|z| z.norm() == 0.0 || !z.is_finite()) {
            return Err(Error::Degenerate(format!(
                "coordinate {} is zero or non-finite",
                CoordIndex::from_column(k)
            )));
        }
        Ok(Decoration { nu, values })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, c: CoordIndex) -> Complex64 {
        self.values[c.column()]
    }

    pub fn edge(&self, tet: usize, i: u8, j: u8) -> Complex64 {
        self.get(CoordIndex::edge(tet, i, j))
    }

    pub fn face(&self, tet: usize, opposite: u8) -> Complex64 {
        self.get(CoordIndex::face(tet, opposite))
    }

    pub fn set(&mut self, c: CoordIndex, value: Complex64) {
        self.values[c.column()] = value;
    }

    /// Largest residual of Rel1 (faces), Rel2 (vertex products) and Rel3 (a-relations).
    pub fn relation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in 0..self.nu {
            for l in VERTICES {
                let prod: Complex64 = VERTICES
                    .iter()
                    .filter(|&&x| x != l)
                    .map(|&x| self.edge(t, x, l))
                    .product();
                worst = worst.max((self.face(t, l) + prod).norm());
            }
            for v in VERTICES {
                let [c1, c2, c3] = vertex_frame(v);
                let (a, b, c) = (self.edge(t, v, c1), self.edge(t, v, c2), self.edge(t, v, c3));
                worst = worst.max((a * b * c + 1.0).norm());
                worst = worst.max((b * (1.0 - a) - 1.0).norm());
            }
        }
        worst
    }

    pub fn is_consistent(&self, tol: f64) -> bool {
        self.relation_residual() <= tol
    }

    pub fn ensure_consistent(&self, tol: f64) -> Result<()> {
        let r = self.relation_residual();
        if r > tol {
            return Err(Error::Inconsistent(r));
        }
        Ok(())
    }

    /// Edge values within `guard` of 0 or 1.
    pub fn check_nondegenerate(&self, guard: f64) -> Result<()> {
        for (k, z) in self.values.iter().enumerate() {
            let c = CoordIndex::from_column(k);
            if c.is_edge() && (z.norm() <= guard || (z - 1.0).norm() <= guard) {
                return Err(Error::Degenerate(format!("{c} = {z}")));
            }
        }
        Ok(())
    }

    pub fn conj(&self) -> Decoration {
        Decoration {
            nu: self.nu,
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Edge coordinates only, in column order.
    pub fn edge_values(&self) -> impl Iterator<Item = (CoordIndex, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &z)| (CoordIndex::from_column(k), z))
            .filter(|(c, _)| c.is_edge())
    }
}

/// Four values per tetrahedron: x_{t,v} = z_{v, rep(v)}.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPoint {
    nu: usize,
    values: Vec<Complex64>,
}

impl ReducedPoint {
    pub fn new(nu: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != 4 * nu {
            return Err(Error::Point(format!(
                "expected {} reduced values, got {}",
                4 * nu,
                values.len()
            )));
        }
        Ok(ReducedPoint { nu, values })
    }

    /// All reduced values equal to `x`.
    pub fn constant(nu: usize, x: Complex64) -> Self {
        ReducedPoint {
            nu,
            values: vec![x; 4 * nu],
        }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn get(&self, tet: usize, v: u8) -> Complex64 {
        self.values[tet * 4 + (v - 1) as usize]
    }

    pub fn set(&mut self, tet: usize, v: u8, x: Complex64) {
        self.values[tet * 4 + (v - 1) as usize] = x;
    }

    pub fn conj(&self) -> ReducedPoint {
        ReducedPoint {
            nu: self.nu,
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn max_distance(&self, other: &ReducedPoint) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn expand_reduced(r: &ReducedPoint) -> Result<Decoration> {
    expand_reduced_with_guard(r, DEGENERACY_GUARD)
}

/// Edges per vertex: (x, 1/(1-x), 1-1/x) on (c1, c2, c3); faces by Rel1.
pub fn expand_reduced_with_guard(r: &ReducedPoint, guard: f64) -> Result<Decoration> {
    let nu = r.nu();
    let mut values = vec![Complex64::new(1.0, 0.0); COORDS_PER_TET * nu];
    for t in 0..nu {
        for v in VERTICES {
            let x = r.get(t, v);
            if x.norm() <= guard || (x - 1.0).norm() <= guard || !x.is_finite() {
                return Err(Error::Degenerate(format!(
                    "reduced value at tet {} vertex {v} is {x}",
                    t + 1
                )));
            }
            let [c1, c2, c3] = vertex_frame(v);
            let derived = [x, (1.0 - x).inv(), 1.0 - x.inv()];
            for (w, z) in [c1, c2, c3].into_iter().zip(derived) {
                if z.norm() <= guard || (z - 1.0).norm() <= guard || !z.is_finite() {
                    return Err(Error::Degenerate(format!("T{}:{v}{w} = {z}", t + 1)));
                }
                values[CoordIndex::edge(t, v, w).column()] = z;
            }
        }
        for l in VERTICES {
            let prod: Complex64 = VERTICES
                .iter()
                .filter(|&&x| x != l)
                .map(|&x| values[CoordIndex::edge(t, x, l).column()])
                .product();
            values[CoordIndex::face(t, l).column()] = -prod;
        }
    }
    Ok(Decoration { nu, values })
}

pub fn reduce(d: &Decoration) -> Result<ReducedPoint> {
    reduce_with_tol(d, CONSISTENCY_TOL)
}

pub fn reduce_with_tol(d: &Decoration, tol: f64) -> Result<ReducedPoint> {
    d.ensure_consistent(tol)?;
    let mut values = Vec::with_capacity(4 * d.nu());
    for t in 0..d.nu() {
        for v in VERTICES {
            values.push(d.edge(t, v, representative(v)));
        }
    }
    ReducedPoint::new(d.nu(), values)
}

/// Every edge coordinate has strictly positive imaginary part.
pub fn is_positive(d: &Decoration) -> bool {
    d.edge_values().all(|(_, z)| z.im > 0.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueRepr {
    Pair([f64; 2]),
    Real(f64),
    Expr(String),
}

impl ValueRepr {
    pub fn value(&self) -> Result<Complex64> {
        match self {
            ValueRepr::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
            ValueRepr::Real(x) => Ok(Complex64::new(*x, 0.0)),
            ValueRepr::Expr(s) => expr::eval(s),
        }
    }

    pub fn pair(z: Complex64) -> Self {
        ValueRepr::Pair([z.re, z.im])
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FullRecord {
    tet: usize,
    z: BTreeMap<String, ValueRepr>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReducedRecord {
    tet: usize,
    x: BTreeMap<String, ValueRepr>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FullFile {
    points: Vec<FullRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReducedFile {
    reduced: Vec<ReducedRecord>,
}

/// A point file in either layout.
#[derive(Clone, Debug)]
pub enum PointData {
    Full(Decoration),
    Reduced(ReducedPoint),
}

impl PointData {
    pub fn decoration(&self) -> Result<Decoration> {
        match self {
            PointData::Full(d) => Ok(d.clone()),
            PointData::Reduced(r) => expand_reduced(r),
        }
    }
}

/// Parses a point file. In the full layout face coordinates may be omitted, in
/// which case they are filled in from Rel1.
pub fn parse_point_file(text: &str, nu: usize) -> Result<PointData> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let as_point_err = |e: serde_json::Error| Error::Point(e.to_string());
    if value.get("reduced").is_some() {
        let file: ReducedFile = serde_json::from_value(value).map_err(as_point_err)?;
        let mut r = ReducedPoint::constant(nu, Complex64::new(f64::NAN, f64::NAN));
        let mut seen = vec![false; 4 * nu];
        for rec in &file.reduced {
            let t = tet_index(rec.tet, nu)?;
            for (k, v) in &rec.x {
                let vert: u8 = k
                    .parse()
                    .ok()
                    .filter(|x| (1..=4).contains(x))
                    .ok_or_else(|| Error::Point(format!("bad vertex key {k:?}")))?;
                r.set(t, vert, v.value()?);
                seen[t * 4 + (vert - 1) as usize] = true;
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Point(format!(
                "missing reduced value for tet {} vertex {}",
                k / 4 + 1,
                k % 4 + 1
            )));
        }
        Ok(PointData::Reduced(r))
    } else if value.get("points").is_some() {
        let file: FullFile = serde_json::from_value(value).map_err(as_point_err)?;
        let mut values = vec![Complex64::new(f64::NAN, f64::NAN); COORDS_PER_TET * nu];
        for rec in &file.points {
            let t = tet_index(rec.tet, nu)?;
            for (k, v) in &rec.z {
                let c = parse_coord_key(t, k)?;
                values[c.column()] = v.value()?;
            }
        }
        for t in 0..nu {
            for &(i, j) in &ORDERED_EDGES {
                if values[CoordIndex::edge(t, i, j).column()].is_nan() {
                    return Err(Error::Point(format!("missing z{i}{j} for tet {}", t + 1)));
                }
            }
            for l in VERTICES {
                let col = CoordIndex::face(t, l).column();
                if values[col].is_nan() {
                    let prod: Complex64 = VERTICES
                        .iter()
                        .filter(|&&x| x != l)
                        .map(|&x| values[CoordIndex::edge(t, x, l).column()])
                        .product();
                    values[col] = -prod;
                }
            }
        }
        Ok(PointData::Full(Decoration::from_values(nu, values)?))
    } else {
        Err(Error::Point("expected a \"points\" or \"reduced\" array".into()))
    }
}

fn tet_index(tet: usize, nu: usize) -> Result<usize> {
    if tet == 0 || tet > nu {
        return Err(Error::Point(format!("tet {tet} out of range 1..={nu}")));
    }
    Ok(tet - 1)
}

fn parse_coord_key(tet: usize, key: &str) -> Result<CoordIndex> {
    let digits: Vec<u8> = key
        .bytes()
        .map(|b| b.wrapping_sub(b'0'))
        .collect();
    if digits.iter().any(|d| !(1..=4).contains(d)) {
        return Err(Error::Point(format!("bad coordinate key {key:?}")));
    }
    match *digits.as_slice() {
        [i, j] if i != j => Ok(CoordIndex::edge(tet, i, j)),
        [a, b, c] => VERTICES
            .iter()
            .copied()
            .find(|&l| {
                let [x, y, z] = canonical_face_triple(l);
                // Any rotation of the canonical triple names the same face coordinate.
                [(x, y, z), (y, z, x), (z, x, y)].contains(&(a, b, c))
            })
            .map(|l| CoordIndex::face(tet, l))
            .ok_or_else(|| Error::Point(format!("face key {key:?} is not a canonical triple"))),
        _ => Err(Error::Point(format!("bad coordinate key {key:?}"))),
    }
}

/// Full-layout JSON for a decoration.
pub fn decoration_to_json(d: &Decoration) -> serde_json::Value {
    let points: Vec<FullRecord> = (0..d.nu())
        .map(|t| FullRecord {
            tet: t + 1,
            z: (0..COORDS_PER_TET)
                .map(|k| {
                    let c = CoordIndex::from_column(t * COORDS_PER_TET + k);
                    (c.key(), ValueRepr::pair(d.get(c)))
                })
                .collect(),
        })
        .collect();
    serde_json::to_value(FullFile { points }).expect("serializable")
}

impl Serialize for ReducedPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        reduced_to_json(self).serialize(s)
    }
}

/// Reduced-layout JSON.
pub fn reduced_to_json(r: &ReducedPoint) -> serde_json::Value {
    let reduced: Vec<ReducedRecord> = (0..r.nu())
        .map(|t| ReducedRecord {
            tet: t + 1,
            x: VERTICES
                .iter()
                .map(|&v| (v.to_string(), ValueRepr::pair(r.get(t, v))))
                .collect(),
        })
        .collect();
    serde_json::to_value(ReducedFile { reduced }).expect("serializable")
}
