//! Exact integer linear algebra: echelon forms with unimodular transforms,
//! saturated kernels, lattice intersections, and Smith invariants.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct ZMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for ZMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ZMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ZMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ZMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

impl ZMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = BigInt::from(f(r, c));
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_fn(rows.len(), cols, |r, c| rows[r][c])
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> ZMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &ZMatrix) -> ZMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn neg(&self) -> ZMatrix {
        ZMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &ZMatrix) -> ZMatrix {
        assert_eq!(self.rows, other.rows, "row mismatch");
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                out[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        out
    }

    /// Rows `start..start+len`.
    pub fn row_block(&self, start: usize, len: usize) -> ZMatrix {
        let mut out = Self::zeros(len, self.cols);
        for r in 0..len {
            for c in 0..self.cols {
                out[(r, c)] = self[(start + r, c)].clone();
            }
        }
        out
    }

    pub fn columns(&self, idx: impl IntoIterator<Item = usize>) -> ZMatrix {
        let idx: Vec<usize> = idx.into_iter().collect();
        let mut out = Self::zeros(self.rows, idx.len());
        for (k, &c) in idx.iter().enumerate() {
            for r in 0..self.rows {
                out[(r, k)] = self[(r, c)].clone();
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_skew_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self[(r, c)] == -&self[(c, r)]))
    }

    /// Entries as `i64`, panicking on overflow.
    pub fn to_i64(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| i64::try_from(&self[(r, c)]).expect("entry fits in i64"))
                    .collect()
            })
            .collect()
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// col_dst -= q * col_src
    fn sub_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for r in 0..self.rows {
            let v = &self[(r, src)] * q;
            self[(r, dst)] -= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// row_dst -= q * row_src
    fn sub_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for c in 0..self.cols {
            let v = &self[(src, c)] * q;
            self[(dst, c)] -= v;
        }
    }
}

/// Column echelon form `A·U = H` with `U` unimodular. Returns `(H, U, rank)`;
/// the first `rank` columns of `H` are the nonzero ones.
pub fn column_echelon(a: &ZMatrix) -> (ZMatrix, ZMatrix, usize) {
    let mut h = a.clone();
    let mut u = ZMatrix::identity(a.ncols());
    let n = a.ncols();
    let mut piv = 0;
    for r in 0..a.nrows() {
        if piv == n {
            break;
        }
        loop {
            let best = (piv..n)
                .filter(|&j| !h[(r, j)].is_zero())
                .min_by(|&x, &y| h[(r, x)].abs().cmp(&h[(r, y)].abs()));
            let Some(j) = best else { break };
            h.swap_cols(piv, j);
            u.swap_cols(piv, j);
            let mut done = true;
            for j in piv + 1..n {
                if h[(r, j)].is_zero() {
                    continue;
                }
                let q = h[(r, j)].div_floor(&h[(r, piv)]);
                h.sub_col(j, piv, &q);
                u.sub_col(j, piv, &q);
                if !h[(r, j)].is_zero() {
                    done = false;
                }
            }
            if done {
                piv += 1;
                break;
            }
        }
    }
    (h, u, piv)
}

pub fn rank(a: &ZMatrix) -> usize {
    column_echelon(a).2
}

/// A ℤ-basis (as columns) of the integer kernel of `a`. The result is always saturated.
pub fn kernel(a: &ZMatrix) -> ZMatrix {
    let (_, u, r) = column_echelon(a);
    u.columns(r..a.ncols())
}

/// A ℤ-basis of the lattice generated by the columns of `a`.
pub fn image_basis(a: &ZMatrix) -> ZMatrix {
    let (h, _, r) = column_echelon(a);
    h.columns(0..r)
}

/// ℤ-basis of (ℚ·span a) ∩ ℤⁿ.
pub fn saturation(a: &ZMatrix) -> ZMatrix {
    let annihilator = kernel(&a.transpose());
    if annihilator.ncols() == 0 {
        return ZMatrix::identity(a.nrows());
    }
    kernel(&annihilator.transpose())
}

/// ℤ-basis of the intersection of the lattices spanned by the columns of `a` and `b`.
pub fn lattice_intersection(a: &ZMatrix, b: &ZMatrix) -> ZMatrix {
    let stacked = a.hcat(&b.neg());
    let k = kernel(&stacked);
    let coeffs = k.row_block(0, a.ncols());
    image_basis(&a.mul(&coeffs))
}

/// Whether every column of `b` lies in the ℚ-span of the columns of `a`.
pub fn span_contains(a: &ZMatrix, b: &ZMatrix) -> bool {
    rank(a) == rank(&a.hcat(b))
}

pub fn same_span(a: &ZMatrix, b: &ZMatrix) -> bool {
    span_contains(a, b) && span_contains(b, a)
}

/// Nonzero Smith invariants d₁ | d₂ | …, all positive.
pub fn smith_invariants(a: &ZMatrix) -> Vec<BigInt> {
    let mut m = a.clone();
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: smallest nonzero entry of the trailing block.
        let mut best: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if !m[(r, c)].is_zero()
                    && best.is_none_or(|(br, bc)| m[(r, c)].abs() < m[(br, bc)].abs())
                {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        m.swap_rows(t, pr);
        m.swap_cols(t, pc);
        let mut clean = true;
        for r in t + 1..rows {
            if !m[(r, t)].is_zero() {
                let q = m[(r, t)].div_floor(&m[(t, t)]);
                m.sub_row(r, t, &q);
                clean &= m[(r, t)].is_zero();
            }
        }
        for c in t + 1..cols {
            if !m[(t, c)].is_zero() {
                let q = m[(t, c)].div_floor(&m[(t, t)]);
                m.sub_col(c, t, &q);
                clean &= m[(t, c)].is_zero();
            }
        }
        if !clean {
            continue;
        }
        // Divisibility: fold a violating row into row t and retry.
        let d = m[(t, t)].clone();
        let violation = (t + 1..rows)
            .find(|&r| (t + 1..cols).any(|c| !m[(r, c)].is_multiple_of(&d)));
        if let Some(r) = violation {
            for c in t..cols {
                let v = m[(r, c)].clone();
                m[(t, c)] += v;
            }
            continue;
        }
        out.push(d.abs());
        t += 1;
    }
    out
}

/// Torsion of ℤⁿ ∩ ℚ·L over L, as the Smith invariants above 1 of the
/// generators of L. Empty when L is saturated.
pub fn torsion(a: &ZMatrix) -> Vec<BigInt> {
    smith_invariants(a)
        .into_iter()
        .filter(|d| !d.is_one())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kernel_is_saturated() {
        // 2x + 4y = 0 has kernel generated by (2, -1), not (4, -2).
        let a = ZMatrix::from_rows(&[vec![2, 4]]);
        let k = kernel(&a);
        assert_eq!(k.ncols(), 1);
        assert!(a.mul(&k).is_zero());
        assert!(torsion(&k).is_empty());
        let entries: Vec<i64> = k.to_i64().into_iter().flatten().map(i64::abs).collect();
        assert_eq!(entries, vec![2, 1]);
    }

    #[test]
    fn smith_of_diagonal() {
        let a = ZMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let inv: Vec<i64> = smith_invariants(&a).iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert_eq!(inv, vec![1, 6]);
        let b = ZMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let inv: Vec<i64> = smith_invariants(&b).iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert_eq!(inv, vec![2, 6, 12]);
    }

    #[test]
    fn saturation_of_scaled_vector() {
        let a = ZMatrix::from_rows(&[vec![2], vec![4]]);
        let s = saturation(&a);
        assert_eq!(s.ncols(), 1);
        assert!(torsion(&s).is_empty());
        assert_eq!(torsion(&a).len(), 1);
        assert!(same_span(&a, &s));
    }

    #[test]
    fn intersection_of_lattices() {
        // 2ℤ × ℤ ∩ ℤ × 3ℤ = 2ℤ × 3ℤ
        let a = ZMatrix::from_rows(&[vec![2, 0], vec![0, 1]]);
        let b = ZMatrix::from_rows(&[vec![1, 0], vec![0, 3]]);
        let i = lattice_intersection(&a, &b);
        assert_eq!(rank(&i), 2);
        let inv: Vec<i64> = smith_invariants(&i).iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert_eq!(inv.iter().product::<i64>(), 6);
    }

    proptest! {
        #[test]
        fn echelon_transform_is_consistent(entries in proptest::collection::vec(-5i64..=5, 12)) {
            let a = ZMatrix::from_fn(3, 4, |r, c| entries[r * 4 + c]);
            let (h, u, r) = column_echelon(&a);
            prop_assert_eq!(a.mul(&u), h.clone());
            prop_assert!(h.columns(r..4).is_zero());
            let k = kernel(&a);
            prop_assert!(a.mul(&k).is_zero());
            prop_assert_eq!(k.ncols() + r, 4);
            // Unimodular: Smith invariants of U are all 1.
            prop_assert!(smith_invariants(&u).iter().all(|d| d.is_one()));
        }
    }
}
