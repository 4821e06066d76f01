//! Numeric linear algebra over ℂ: SVD ranks with gap reporting, kernels,
//! subspace intersections and principal angles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub type CMatrix = DMatrix<Complex64>;

/// Default relative rank tolerance (singular values below `tol * σ_max` count as zero).
pub const RANK_TOL: f64 = 1e-8;

/// Minimum ratio between the smallest kept and largest dropped singular value
/// for a rank to count as determinate.
pub const MIN_GAP: f64 = 1e3;

#[derive(Clone, Debug, Serialize)]
pub struct RankInfo {
    pub rank: usize,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    /// σ_rank / σ_{rank+1}; infinite when either side is empty.
    pub gap: f64,
    /// σ_rank / cutoff: how far the smallest kept value clears the tolerance.
    pub margin: f64,
    pub tolerance: f64,
}

impl RankInfo {
    /// Both the gap and the margin above the cutoff must reach [`MIN_GAP`];
    /// a kept value close to the cutoff means the rank depends on the tolerance.
    pub fn determinate(&self) -> bool {
        self.gap >= MIN_GAP && self.margin >= MIN_GAP
    }
}

pub fn from_real(rows: usize, cols: usize, data: impl Fn(usize, usize) -> f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, c| Complex64::new(data(r, c), 0.0))
}

pub fn from_integer(rows: &[Vec<i64>]) -> CMatrix {
    let cols = rows.first().map_or(0, Vec::len);
    from_real(rows.len(), cols, |r, c| rows[r][c] as f64)
}

/// Singular values (descending) and right singular vectors spanning ℂ^cols.
fn full_svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    if c == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // Pad with zero rows so the thin SVD still yields a full set of right vectors.
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let v = CMatrix::from_fn(c, c, |i, j| v_t[(order[j], i)].conj());
    (sv, v)
}

fn rank_from_values(sv: &[f64], tol: f64) -> RankInfo {
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax;
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > cutoff).count()
    };
    let gap = if rank == 0 || rank == sv.len() {
        f64::INFINITY
    } else {
        let dropped = sv[rank];
        if dropped == 0.0 {
            f64::INFINITY
        } else {
            sv[rank - 1] / dropped
        }
    };
    let margin = if rank == 0 || cutoff == 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / cutoff
    };
    RankInfo {
        rank,
        singular_values: sv.to_vec(),
        gap,
        margin,
        tolerance: tol,
    }
}

pub fn rank(m: &CMatrix, tol: f64) -> RankInfo {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return rank_from_values(&[], tol);
    }
    let sv = m.singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    rank_from_values(&v, tol)
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn kernel(m: &CMatrix, tol: f64) -> (CMatrix, RankInfo) {
    let c = m.ncols();
    let (sv, v) = full_svd(m);
    // The padded matrix has `c` singular values; only the first min(r, c) are meaningful.
    let meaningful = m.nrows().min(c);
    let info = rank_from_values(&sv[..meaningful], tol);
    let basis = v.columns(info.rank, c - info.rank).into_owned();
    (basis, info)
}

/// Orthonormal basis of the column space of `m`.
pub fn column_space(m: &CMatrix, tol: f64) -> (CMatrix, RankInfo) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (CMatrix::zeros(r, 0), rank_from_values(&[], tol));
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let info = rank_from_values(&sv, tol);
    let basis = CMatrix::from_fn(r, info.rank, |i, j| u[(i, order[j])]);
    (basis, info)
}

/// Orthonormal basis of span(a) ∩ span(b).
pub fn intersection(a: &CMatrix, b: &CMatrix, tol: f64) -> (CMatrix, RankInfo) {
    let (qa, _) = column_space(a, tol);
    let (qb, _) = column_space(b, tol);
    let n = qa.nrows();
    let (ka, kb) = (qa.ncols(), qb.ncols());
    if ka == 0 || kb == 0 {
        return (CMatrix::zeros(n, 0), rank_from_values(&[], tol));
    }
    let mut stacked = CMatrix::zeros(n, ka + kb);
    stacked.view_mut((0, 0), (n, ka)).copy_from(&qa);
    stacked.view_mut((0, ka), (n, kb)).copy_from(&(-&qb));
    let (ker, info) = kernel(&stacked, tol);
    let coeffs = ker.rows(0, ka).into_owned();
    let vectors = &qa * coeffs;
    let (basis, _) = column_space(&vectors, tol);
    (basis, info)
}

/// dim U + dim V − rank[U|V] with the rank spectrum used.
pub fn intersection_dimension(a: &CMatrix, b: &CMatrix, tol: f64) -> (usize, RankInfo) {
    let (qa, _) = column_space(a, tol);
    let (qb, _) = column_space(b, tol);
    let n = qa.nrows();
    let (ka, kb) = (qa.ncols(), qb.ncols());
    let mut stacked = CMatrix::zeros(n, ka + kb);
    stacked.view_mut((0, 0), (n, ka)).copy_from(&qa);
    stacked.view_mut((0, ka), (n, kb)).copy_from(&qb);
    let info = rank(&stacked, tol);
    (ka + kb - info.rank, info)
}

/// Sines of the principal angles between two subspaces given by orthonormal
/// columns, largest first. Returns `None` if the dimensions differ.
pub fn principal_sines(u: &CMatrix, v: &CMatrix) -> Option<Vec<f64>> {
    if u.ncols() != v.ncols() || u.nrows() != v.nrows() {
        return None;
    }
    if u.ncols() == 0 {
        return Some(Vec::new());
    }
    let residual = v - u * (u.adjoint() * v);
    let mut s: Vec<f64> = residual.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Some(s)
}

/// Largest principal angle (radians) between equal-dimensional subspaces.
pub fn max_principal_angle(u: &CMatrix, v: &CMatrix) -> Option<f64> {
    principal_sines(u, v).map(|s| s.first().map_or(0.0, |&x| x.clamp(0.0, 1.0).asin()))
}

/// Norm of the component of `x` orthogonal to the orthonormal columns of `q`.
pub fn distance_to_span(q: &CMatrix, x: &CMatrix) -> f64 {
    (x - q * (q.adjoint() * x)).norm()
}
