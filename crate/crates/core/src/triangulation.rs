//! Ideal triangulations: face matchings, edge classes and cusp cross-sections.
//!
//! Vertices carry the labels 1..=4 everywhere (I/O and internal tables); tetrahedra
//! are 0-based internally and 1-based in files. Face `f` of a tetrahedron is the
//! face opposite vertex `f`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VERTICES: [u8; 4] = [1, 2, 3, 4];

/// Ordered pairs `(i, j)`, `i != j`, in lexicographic order.
pub const ORDERED_EDGES: [(u8, u8); 12] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 1),
    (2, 3),
    (2, 4),
    (3, 1),
    (3, 2),
    (3, 4),
    (4, 1),
    (4, 2),
    (4, 3),
];

/// Cyclic order of the three other vertices around `v`, induced by the boundary
/// orientation of the positively ordered tetrahedron (1,2,3,4).
pub fn cyclic_order(v: u8) -> [u8; 3] {
    match v {
        1 => [2, 3, 4],
        2 => [1, 4, 3],
        3 => [1, 2, 4],
        4 => [1, 3, 2],
        _ => panic!("vertex label out of range: {v}"),
    }
}

/// The two vertices other than `a` and `b`, in increasing order.
pub fn complement2(a: u8, b: u8) -> (u8, u8) {
    let mut rest = VERTICES.iter().copied().filter(|&x| x != a && x != b);
    let k = rest.next().expect("distinct vertices");
    let l = rest.next().expect("distinct vertices");
    (k, l)
}

/// The vertex not in `{a, b, c}`.
pub fn complement3(a: u8, b: u8, c: u8) -> u8 {
    VERTICES
        .iter()
        .copied()
        .find(|&x| x != a && x != b && x != c)
        .expect("three distinct vertices")
}

/// A permutation of the vertex labels 1..=4.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm4([u8; 4]);

impl Perm4 {
    pub const IDENTITY: Perm4 = Perm4([1, 2, 3, 4]);

    pub fn new(images: [u8; 4]) -> Option<Self> {
        let mut seen = [false; 4];
        for &x in &images {
            if !(1..=4).contains(&x) || seen[(x - 1) as usize] {
                return None;
            }
            seen[(x - 1) as usize] = true;
        }
        Some(Perm4(images))
    }

    #[inline]
    pub fn apply(&self, v: u8) -> u8 {
        self.0[(v - 1) as usize]
    }

    pub fn inverse(&self) -> Perm4 {
        let mut inv = [0u8; 4];
        for v in VERTICES {
            inv[(self.apply(v) - 1) as usize] = v;
        }
        Perm4(inv)
    }

    pub fn is_odd(&self) -> bool {
        let mut inversions = 0;
        for a in 0..4 {
            for b in (a + 1)..4 {
                if self.0[a] > self.0[b] {
                    inversions += 1;
                }
            }
        }
        inversions % 2 == 1
    }

    pub fn images(&self) -> [u8; 4] {
        self.0
    }

    /// All 24 permutations in lexicographic order of their image tuples.
    pub fn all() -> Vec<Perm4> {
        let mut out = Vec::with_capacity(24);
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                for c in 1..=4u8 {
                    for d in 1..=4u8 {
                        if let Some(p) = Perm4::new([a, b, c, d]) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm4{:?}", self.0)
    }
}

/// One face matching. `perm` is the full vertex bijection, including `face -> to_face`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceGluing {
    pub tet: usize,
    pub face: u8,
    pub to_tet: usize,
    pub to_face: u8,
    pub perm: Perm4,
}

impl FaceGluing {
    /// Builds a gluing from the three-vertex map of the face.
    pub fn from_vertex_map(
        tet: usize,
        face: u8,
        to_tet: usize,
        to_face: u8,
        vertex_map: &BTreeMap<u8, u8>,
    ) -> Result<Self> {
        let bad = |msg: &str| {
            Error::Triangulation(format!("tet {} face {face}: {msg}", tet + 1))
        };
        if !(1..=4).contains(&face) || !(1..=4).contains(&to_face) {
            return Err(bad("face label out of range"));
        }
        if vertex_map.len() != 3 {
            return Err(bad("vertex_map must have exactly 3 entries"));
        }
        let mut images = [0u8; 4];
        images[(face - 1) as usize] = to_face;
        for (&from, &to) in vertex_map {
            if from == face || !(1..=4).contains(&from) {
                return Err(bad("vertex_map key is not a vertex of the face"));
            }
            if to == to_face || !(1..=4).contains(&to) {
                return Err(bad("vertex_map value is not a vertex of the target face"));
            }
            images[(from - 1) as usize] = to;
        }
        let perm = Perm4::new(images).ok_or_else(|| bad("vertex_map is not a bijection"))?;
        Ok(FaceGluing {
            tet,
            face,
            to_tet,
            to_face,
            perm,
        })
    }

    pub fn inverse(&self) -> FaceGluing {
        FaceGluing {
            tet: self.to_tet,
            face: self.to_face,
            to_tet: self.tet,
            to_face: self.face,
            perm: self.perm.inverse(),
        }
    }

    pub fn vertex_map(&self) -> BTreeMap<u8, u8> {
        VERTICES
            .iter()
            .filter(|&&v| v != self.face)
            .map(|&v| (v, self.perm.apply(v)))
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GluingRecord {
    tet: usize,
    face: u8,
    to_tet: usize,
    to_face: u8,
    vertex_map: BTreeMap<String, u8>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangulationFile {
    name: String,
    tetrahedra: usize,
    gluings: Vec<GluingRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub tet: usize,
    pub perm: Perm4,
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    name: String,
    nu: usize,
    gluings: Vec<FaceGluing>,
    neighbors: Vec<[Neighbor; 4]>,
}

impl Triangulation {
    /// Validated construction: every face matched once, orientation-reversing
    /// gluings, no edge identified with its reverse, and ν edge classes.
    pub fn new(name: impl Into<String>, nu: usize, gluings: Vec<FaceGluing>) -> Result<Self> {
        let t = Self::assemble(name.into(), nu, gluings)?;
        for g in &t.gluings {
            if !g.perm.is_odd() {
                return Err(Error::OrientationPreserving {
                    tet: g.tet + 1,
                    face: g.face,
                });
            }
        }
        t.check_edges_not_reversed()?;
        let edges = t.edge_classes().len();
        if edges != nu {
            return Err(Error::EdgeCountMismatch { edges, tets: nu });
        }
        Ok(t)
    }

    /// Checks only the face matching. Used to build deliberately broken
    /// triangulations for diagnostics (e.g. non-orientable cusp links).
    pub fn new_unchecked_orientation(
        name: impl Into<String>,
        nu: usize,
        gluings: Vec<FaceGluing>,
    ) -> Result<Self> {
        Self::assemble(name.into(), nu, gluings)
    }

    fn assemble(name: String, nu: usize, gluings: Vec<FaceGluing>) -> Result<Self> {
        if nu == 0 {
            return Err(Error::Triangulation("no tetrahedra".into()));
        }
        let mut slots: Vec<[Option<Neighbor>; 4]> = vec![[None; 4]; nu];
        for g in &gluings {
            if g.tet >= nu || g.to_tet >= nu {
                return Err(Error::Triangulation(format!(
                    "tetrahedron index out of range in gluing of tet {} face {}",
                    g.tet + 1,
                    g.face
                )));
            }
            if g.tet == g.to_tet && g.face == g.to_face {
                return Err(Error::Triangulation(format!(
                    "face glued to itself: tet {} face {}",
                    g.tet + 1,
                    g.face
                )));
            }
            if g.perm.apply(g.face) != g.to_face {
                return Err(Error::Triangulation(format!(
                    "vertex map of tet {} face {} does not send the face to face {}",
                    g.tet + 1,
                    g.face,
                    g.to_face
                )));
            }
            for (t, f, nb) in [
                (
                    g.tet,
                    g.face,
                    Neighbor {
                        tet: g.to_tet,
                        perm: g.perm,
                    },
                ),
                (
                    g.to_tet,
                    g.to_face,
                    Neighbor {
                        tet: g.tet,
                        perm: g.perm.inverse(),
                    },
                ),
            ] {
                let slot = &mut slots[t][(f - 1) as usize];
                if slot.is_some() {
                    return Err(Error::FaceMultiplyMatched { tet: t + 1, face: f });
                }
                *slot = Some(nb);
            }
        }
        let mut neighbors = Vec::with_capacity(nu);
        for (t, s) in slots.iter().enumerate() {
            let mut row = [Neighbor {
                tet: 0,
                perm: Perm4::IDENTITY,
            }; 4];
            for f in VERTICES {
                row[(f - 1) as usize] = s[(f - 1) as usize].ok_or(Error::UnmatchedFace {
                    tet: t + 1,
                    face: f,
                })?;
            }
            neighbors.push(row);
        }
        let t = Triangulation {
            name,
            nu,
            gluings,
            neighbors,
        };
        Ok(t)
    }

    fn check_edges_not_reversed(&self) -> Result<()> {
        let uf = self.oriented_edge_partition();
        for tet in 0..self.nu {
            for &(i, j) in &ORDERED_EDGES {
                if uf.same(oriented_key(tet, i, j), oriented_key(tet, j, i)) {
                    return Err(Error::Triangulation(format!(
                        "edge {i}{j} of tet {} is identified with its reverse",
                        tet + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TriangulationFile = serde_json::from_str(text).map_err(|e| Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut gluings = Vec::with_capacity(file.gluings.len());
        for rec in &file.gluings {
            if rec.tet == 0 || rec.to_tet == 0 {
                return Err(Error::Triangulation("tetrahedra are numbered from 1".into()));
            }
            let mut map = BTreeMap::new();
            for (k, &v) in &rec.vertex_map {
                let key: u8 = k.trim().parse().map_err(|_| {
                    Error::Triangulation(format!("vertex_map key {k:?} is not a vertex label"))
                })?;
                map.insert(key, v);
            }
            gluings.push(FaceGluing::from_vertex_map(
                rec.tet - 1,
                rec.face,
                rec.to_tet - 1,
                rec.to_face,
                &map,
            )?);
        }
        Triangulation::new(file.name, file.tetrahedra, gluings)
    }

    pub fn to_json(&self) -> String {
        let file = TriangulationFile {
            name: self.name.clone(),
            tetrahedra: self.nu,
            gluings: self
                .gluings
                .iter()
                .map(|g| GluingRecord {
                    tet: g.tet + 1,
                    face: g.face,
                    to_tet: g.to_tet + 1,
                    to_face: g.to_face,
                    vertex_map: g
                        .vertex_map()
                        .into_iter()
                        .map(|(a, b)| (a.to_string(), b))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of tetrahedra (ν).
    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn gluings(&self) -> &[FaceGluing] {
        &self.gluings
    }

    /// The tetrahedron and vertex bijection across face `face` of `tet`.
    pub fn neighbor(&self, tet: usize, face: u8) -> Neighbor {
        self.neighbors[tet][(face - 1) as usize]
    }

    /// Face pairs, each listed once from its lexicographically smaller side.
    pub fn face_pairs(&self) -> Vec<FaceGluing> {
        let mut out = Vec::with_capacity(2 * self.nu);
        for tet in 0..self.nu {
            for face in VERTICES {
                let nb = self.neighbor(tet, face);
                let other = (nb.tet, nb.perm.apply(face));
                if (tet, face) < other {
                    out.push(FaceGluing {
                        tet,
                        face,
                        to_tet: nb.tet,
                        to_face: other.1,
                        perm: nb.perm,
                    });
                }
            }
        }
        out
    }

    fn oriented_edge_partition(&self) -> UnionFind {
        let mut uf = UnionFind::new(12 * self.nu);
        for tet in 0..self.nu {
            for face in VERTICES {
                let nb = self.neighbor(tet, face);
                for &(i, j) in &ORDERED_EDGES {
                    if i != face && j != face {
                        uf.union(
                            oriented_key(tet, i, j),
                            oriented_key(nb.tet, nb.perm.apply(i), nb.perm.apply(j)),
                        );
                    }
                }
            }
        }
        uf
    }

    /// Edge classes of K. Classes are ordered by their smallest incidence; each
    /// class is oriented so that this incidence appears with `i < j`.
    pub fn edge_classes(&self) -> Vec<EdgeClass> {
        let mut uf = self.oriented_edge_partition();
        let mut done = BTreeSet::new();
        let mut out = Vec::new();
        for tet in 0..self.nu {
            for &(i, j) in &ORDERED_EDGES {
                if i > j {
                    continue;
                }
                let root = uf.find(oriented_key(tet, i, j));
                let rev = uf.find(oriented_key(tet, j, i));
                if done.contains(&root) || done.contains(&rev) {
                    continue;
                }
                done.insert(root);
                let representative = TetEdge { tet, i, j };
                let exit = complement2(i, j).0;
                let cycle = self.walk_edge(representative, exit);
                out.push(EdgeClass {
                    index: out.len(),
                    representative,
                    cycle,
                });
            }
        }
        out
    }

    /// Traverses the tetrahedra around an edge, leaving `start` through face `exit`.
    fn walk_edge(&self, start: TetEdge, exit: u8) -> Vec<TetEdge> {
        let mut cycle = Vec::new();
        let (mut cur, mut face) = (start, exit);
        loop {
            cycle.push(cur);
            let nb = self.neighbor(cur.tet, face);
            let next = TetEdge {
                tet: nb.tet,
                i: nb.perm.apply(cur.i),
                j: nb.perm.apply(cur.j),
            };
            let arrive = nb.perm.apply(face);
            let next_exit = complement3(next.i, next.j, arrive);
            cur = next;
            face = next_exit;
            if cur == start && face == exit {
                break;
            }
            assert!(cycle.len() <= 6 * self.nu, "edge walk failed to close");
        }
        cycle
    }

    /// Assembles the vertex-link triangles into surfaces and checks each is a torus.
    pub fn cusp_links(&self) -> Result<Vec<CuspSurface>> {
        let links = self.link_components();
        for (k, c) in links.iter().enumerate() {
            if c.euler_characteristic() != 0 || !c.orientable {
                return Err(Error::NonTorusCusp {
                    cusp: k,
                    euler: c.euler_characteristic(),
                    orientable: c.orientable,
                });
            }
        }
        Ok(links)
    }

    /// Link components without the torus check.
    pub fn link_components(&self) -> Vec<CuspSurface> {
        let mut comp = vec![usize::MAX; 4 * self.nu];
        let mut surfaces = Vec::new();
        for start in 0..4 * self.nu {
            if comp[start] != usize::MAX {
                continue;
            }
            let index = surfaces.len();
            let mut triangles = Vec::new();
            let mut queue = VecDeque::from([start]);
            comp[start] = index;
            while let Some(k) = queue.pop_front() {
                let tri = LinkTriangle {
                    tet: k / 4,
                    vertex: (k % 4) as u8 + 1,
                };
                triangles.push(tri);
                for face in VERTICES {
                    if face == tri.vertex {
                        continue;
                    }
                    let nb = self.neighbor(tri.tet, face);
                    let other = nb.tet * 4 + (nb.perm.apply(tri.vertex) - 1) as usize;
                    if comp[other] == usize::MAX {
                        comp[other] = index;
                        queue.push_back(other);
                    }
                }
            }
            triangles.sort();
            surfaces.push(self.build_surface(index, triangles));
        }
        surfaces
    }

    fn build_surface(&self, index: usize, triangles: Vec<LinkTriangle>) -> CuspSurface {
        let mut adjacency = Vec::new();
        let mut orientation: BTreeMap<LinkTriangle, i8> = BTreeMap::new();
        let mut orientable = true;
        let mut queue = VecDeque::new();
        orientation.insert(triangles[0], 1);
        queue.push_back(triangles[0]);
        while let Some(tri) = queue.pop_front() {
            let eps = orientation[&tri];
            for face in VERTICES {
                if face == tri.vertex {
                    continue;
                }
                let nb = self.neighbor(tri.tet, face);
                let other = LinkTriangle {
                    tet: nb.tet,
                    vertex: nb.perm.apply(tri.vertex),
                };
                // Direction of the shared link edge in each triangle's boundary order.
                let (a, b) = boundary_edge(tri.vertex, face);
                let (a2, b2) = boundary_edge(other.vertex, nb.perm.apply(face));
                let same = nb.perm.apply(a) == a2 && nb.perm.apply(b) == b2;
                debug_assert!(same || (nb.perm.apply(a) == b2 && nb.perm.apply(b) == a2));
                // Coherent orientations traverse the shared edge in opposite directions.
                let required = if same { -eps } else { eps };
                match orientation.get(&other) {
                    None => {
                        orientation.insert(other, required);
                        queue.push_back(other);
                    }
                    Some(&o) if o != required => orientable = false,
                    _ => {}
                }
            }
        }
        for tri in &triangles {
            for face in VERTICES {
                if face == tri.vertex {
                    continue;
                }
                let nb = self.neighbor(tri.tet, face);
                let other = LinkTriangle {
                    tet: nb.tet,
                    vertex: nb.perm.apply(tri.vertex),
                };
                let side = LinkSide { tri: *tri, face };
                let other_side = LinkSide {
                    tri: other,
                    face: nb.perm.apply(face),
                };
                if side < other_side {
                    adjacency.push((side, other_side));
                }
            }
        }
        // Link vertices are corner classes, i.e. oriented edge classes seen from the cusp.
        let mut uf = self.oriented_edge_partition();
        let mut corner_classes = BTreeSet::new();
        for tri in &triangles {
            for w in VERTICES {
                if w != tri.vertex {
                    corner_classes.insert(uf.find(oriented_key(tri.tet, tri.vertex, w)));
                }
            }
        }
        let coherent = orientable && orientation.values().all(|&e| e == 1);
        CuspSurface {
            index,
            triangles,
            adjacency,
            vertex_count: corner_classes.len(),
            orientable,
            coherent,
        }
    }
}

/// The link edge of triangle `(·, v)` lying in face `face`, as the pair of corner
/// labels in the triangle's boundary (cyclic) order.
pub fn boundary_edge(v: u8, face: u8) -> (u8, u8) {
    let c = cyclic_order(v);
    let k = c.iter().position(|&x| x == face).expect("face is not v");
    (c[(k + 1) % 3], c[(k + 2) % 3])
}

/// An ordered pair `(i, j)` of vertices of a tetrahedron; carries the coordinate z_ij,
/// which sits at vertex `i` on the edge `{i, j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TetEdge {
    pub tet: usize,
    pub i: u8,
    pub j: u8,
}

impl TetEdge {
    pub fn reversed(&self) -> TetEdge {
        TetEdge {
            tet: self.tet,
            i: self.j,
            j: self.i,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeClass {
    pub index: usize,
    pub representative: TetEdge,
    /// Incidences in the order met when walking around the edge.
    pub cycle: Vec<TetEdge>,
}

impl EdgeClass {
    pub fn valence(&self) -> usize {
        self.cycle.len()
    }

    /// The incidences of the opposite orientation, in the same walk order.
    pub fn reversed_cycle(&self) -> Vec<TetEdge> {
        self.cycle.iter().map(TetEdge::reversed).collect()
    }
}

/// The vertex-link triangle of `tet` at `vertex`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkTriangle {
    pub tet: usize,
    pub vertex: u8,
}

/// The side of a link triangle lying in face `face` of its tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkSide {
    pub tri: LinkTriangle,
    pub face: u8,
}

#[derive(Clone, Debug)]
pub struct CuspSurface {
    pub index: usize,
    pub triangles: Vec<LinkTriangle>,
    /// Identified triangle sides, each pair listed once.
    pub adjacency: Vec<(LinkSide, LinkSide)>,
    pub vertex_count: usize,
    pub orientable: bool,
    /// Whether the boundary orders of all triangles agree (no flips needed).
    pub coherent: bool,
}

impl CuspSurface {
    pub fn euler_characteristic(&self) -> i64 {
        let f = self.triangles.len() as i64;
        let e = self.adjacency.len() as i64;
        self.vertex_count as i64 - e + f
    }

    /// Corner `(v, w)` of a triangle carries the coordinate z_vw.
    pub fn corner_labels(&self, tri: LinkTriangle) -> [(u8, u8); 3] {
        let c = cyclic_order(tri.vertex);
        [(tri.vertex, c[0]), (tri.vertex, c[1]), (tri.vertex, c[2])]
    }
}

#[inline]
fn oriented_key(tet: usize, i: u8, j: u8) -> usize {
    let local = ORDERED_EDGES
        .iter()
        .position(|&e| e == (i, j))
        .expect("ordered edge");
    tet * 12 + local
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn same(&self, a: usize, b: usize) -> bool {
        let p = self.parent.clone();
        let root = |mut x: usize| {
            while p[x] != x {
                x = p[x];
            }
            x
        };
        root(a) == root(b)
    }
}
