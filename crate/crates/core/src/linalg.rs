//! Dense row-major linear algebra: Cholesky with pivot diagnostics,
//! symmetric eigenvalues (Householder tridiagonalisation + implicit QL) and
//! a thin Householder QR.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::numeric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::identity(n);
        m.data.iter_mut().for_each(|x| *x *= c);
        m
    }

    /// Builds a matrix from row-major data; `None` if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows; `None` if they are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Option<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.as_ref().len() != cols {
                return None;
            }
            data.extend_from_slice(r.as_ref());
        }
        Some(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        self.iter_rows().map(|r| numeric::dot(r, v)).collect()
    }

    /// `self * other^T`.
    pub fn mul_transpose(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.cols);
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                out[(i, j)] = numeric::dot(self.row(i), other.row(j));
            }
        }
        out
    }

    /// Principal submatrix with row and column `skip` removed.
    pub fn without_index(&self, skip: usize) -> Matrix {
        let n = self.rows - 1;
        let mut out = Self::zeros(n, self.cols - 1);
        for (oi, i) in (0..self.rows).filter(|&i| i != skip).enumerate() {
            for (oj, j) in (0..self.cols).filter(|&j| j != skip).enumerate() {
                out[(oi, oj)] = self[(i, j)];
            }
        }
        out
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        let mut out = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        numeric::max_abs(&self.data)
    }

    /// Largest absolute row sum (the infinity norm).
    pub fn max_row_sum(&self) -> f64 {
        self.iter_rows()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        numeric::sum((0..self.rows.min(self.cols)).map(|i| self[(i, i)]))
    }

    /// Replaces the matrix by `(A + A^T) / 2`.
    pub fn symmetrize(&mut self) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..i {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor `A = L L^T`.
///
/// The pivots are the squared diagonal entries of `L`, i.e. the successive
/// Schur complements of the elimination.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
    pivots: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix using its lower triangle.
    ///
    /// Returns `Err(k)` when the `k`-th pivot is not strictly positive.
    pub fn factor(a: &Matrix) -> Result<Self, usize> {
        let n = a.rows();
        debug_assert_eq!(n, a.cols());
        let mut l = Matrix::zeros(n, n);
        let mut pivots = Vec::with_capacity(n);
        for j in 0..n {
            let pivot = a[(j, j)] - numeric::dot(&l.row(j)[..j], &l.row(j)[..j]);
            if !(pivot > 0.0) {
                return Err(j);
            }
            let ljj = pivot.sqrt();
            l[(j, j)] = ljj;
            pivots.push(pivot);
            for i in j + 1..n {
                let s = a[(i, j)] - numeric::dot(&l.row(i)[..j], &l.row(j)[..j]);
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l, pivots })
    }

    pub fn order(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn min_pivot(&self) -> f64 {
        self.pivots.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_pivot(&self) -> f64 {
        self.pivots.iter().copied().fold(0.0, f64::max)
    }

    /// Pivot test `min <= n * eps * max`.
    pub fn is_numerically_singular(&self) -> bool {
        let n = self.order() as f64;
        self.min_pivot() <= n * f64::EPSILON * self.max_pivot()
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        numeric::sum(self.pivots.iter().map(|p| p.ln()))
    }

    /// Solves `A x = b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order();
        debug_assert_eq!(b.len(), n);
        let l = &self.l;
        let mut x = b.to_vec();
        for i in 0..n {
            let s = x[i] - numeric::dot(&l.row(i)[..i], &x[..i]);
            x[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = numeric::CompensatedSum::new();
            acc.add(x[i]);
            for k in i + 1..n {
                acc.add(-l[(k, i)] * x[k]);
            }
            x[i] = acc.value() / l[(i, i)];
        }
        x
    }

    /// Solve followed by up to five steps of iterative refinement against
    /// `a`, stopping once the correction stops shrinking geometrically or
    /// drops to the rounding level of `x`.
    pub fn solve_refined(&self, a: &Matrix, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve(b);
        let mut last = f64::INFINITY;
        for _ in 0..5 {
            let r = residual(a, &x, b);
            if r.iter().all(|&v| v == 0.0) {
                break;
            }
            let dx = self.solve(&r);
            let dn = numeric::max_abs(&dx);
            if !(dn < 0.5 * last) {
                break;
            }
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
            if dn <= f64::EPSILON * numeric::max_abs(&x) {
                break;
            }
            last = dn;
        }
        x
    }
}

/// `b - A x` with compensated accumulation and exact products, so that
/// refinement reaches working accuracy for condition numbers well past
/// `1 / sqrt(eps)`.
pub fn residual(a: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter_rows()
        .zip(b)
        .map(|(row, &bi)| {
            let mut acc = numeric::CompensatedSum::new();
            acc.add(bi);
            row.iter().zip(x).for_each(|(aij, xj)| acc.add_product(-aij, *xj));
            acc.value()
        })
        .collect()
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Uses only the lower triangle. Householder reduction to tridiagonal form
/// followed by the implicit QL iteration with Wilkinson-style shifts.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    if n == 0 {
        return Vec::new();
    }
    let mut a = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let mut f = a[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[(j, k)] -= f * e[k] + g * a[(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[(i, i)];
    }

    tridiagonal_ql(&mut d, &mut e);
    d.sort_by(|x, y| x.total_cmp(y));
    d
}

/// Implicit QL on a symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e[1..]`. Eigenvalues are left in `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                // Convergence failure is not expected for symmetric input;
                // accept the current approximation.
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Orthonormal factor `Q` (rows x cols, rows >= cols) of the thin QR
/// decomposition `A = Q R`, normalised so that `diag(R) >= 0`.
pub fn thin_qr_q(a: &Matrix) -> Matrix {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "thin QR needs at least as many rows as columns");
    let mut work = a.clone();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    let mut r_diag = Vec::with_capacity(n);

    for j in 0..n {
        let x: Vec<f64> = (j..m).map(|i| work[(i, j)]).collect();
        let norm = numeric::norm2(&x);
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm2 = numeric::dot(&v, &v);
        if vnorm2 == 0.0 {
            reflectors.push(None);
            r_diag.push(work[(j, j)]);
            continue;
        }
        for col in j..n {
            let proj = numeric::sum((j..m).map(|i| v[i - j] * work[(i, col)]));
            let factor = 2.0 * proj / vnorm2;
            for i in j..m {
                work[(i, col)] -= factor * v[i - j];
            }
        }
        r_diag.push(alpha);
        reflectors.push(Some(v));
    }

    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for (j, refl) in reflectors.iter().enumerate().rev() {
        let Some(v) = refl else { continue };
        let vnorm2 = numeric::dot(v, v);
        for col in 0..n {
            let proj = numeric::sum((j..m).map(|i| v[i - j] * q[(i, col)]));
            if proj == 0.0 {
                continue;
            }
            let factor = 2.0 * proj / vnorm2;
            for i in j..m {
                q[(i, col)] -= factor * v[i - j];
            }
        }
    }
    for (j, &r) in r_diag.iter().enumerate() {
        if r < 0.0 {
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    /// Cyclic Jacobi eigenvalue oracle, independent of the QL route.
    fn jacobi_eigenvalues(a: &Matrix) -> Vec<f64> {
        let n = a.rows();
        let mut a = a.clone();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)] == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        d.sort_by(|x, y| x.total_cmp(y));
        d
    }

    fn pseudo_random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn eigenvalues_match_jacobi_oracle() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (7, 4), (20, 5), (41, 6)] {
            let m = pseudo_random_symmetric(n, seed);
            let ql = symmetric_eigenvalues(&m);
            let jac = jacobi_eigenvalues(&m);
            for (a, b) in ql.iter().zip(&jac) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let ev = symmetric_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-15);
        assert!((ev[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn cholesky_solves_and_flags() {
        let m = Matrix::from_rows(&[[4.0, 12.0, -16.0], [12.0, 37.0, -43.0], [-16.0, -43.0, 98.0]])
            .unwrap();
        let c = Cholesky::factor(&m).unwrap();
        assert_eq!(c.pivots(), &[4.0, 1.0, 9.0]);
        assert!(!c.is_numerically_singular());
        let x = c.solve_refined(&m, &[1.0, 2.0, 3.0]);
        let r = residual(&m, &x, &[1.0, 2.0, 3.0]);
        assert!(numeric::max_abs(&r) < 1e-12);

        let rank_one = Matrix::from_rows(&[[2.0, 2.0], [2.0, 2.0]]).unwrap();
        match Cholesky::factor(&rank_one) {
            Err(1) => {}
            Ok(c) => assert!(c.is_numerically_singular()),
            Err(k) => panic!("unexpected breakdown at {k}"),
        }
    }

    #[test]
    fn thin_qr_is_orthonormal_with_positive_r() {
        let m = pseudo_random_symmetric(9, 11);
        let a = Matrix::from_vec(9, 4, m.as_slice()[..36].to_vec()).unwrap();
        let q = thin_qr_q(&a);
        let qtq = q.transpose().mul_transpose(&q.transpose());
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-14);
            }
        }
        // R = Q^T A must be upper triangular with non-negative diagonal.
        let r = q.transpose().mul_transpose(&a.transpose());
        for i in 0..4 {
            assert!(r[(i, i)] > 0.0);
            for j in 0..i {
                assert!(r[(i, j)].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn without_index_drops_row_and_column() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]).unwrap();
        let s = m.without_index(1);
        assert_eq!(s.as_slice(), &[1.0, 3.0, 7.0, 9.0]);
        assert_eq!(m.principal(&[2, 0]).as_slice(), &[9.0, 7.0, 3.0, 1.0]);
    }
}
