//! Dense matrices over the dual-mode scalars.
//!
//! One generic kernel serves both the real and the complex side. Rank
//! decisions are made through a [`ZeroTest`]: structural zero for exact
//! entries, absolute tolerance for floats, so the same elimination code is
//! correct in both modes.

use crate::scalar::{ComplexScalar, Scalar};

/// Field element usable by the elimination kernel.
pub trait Entry: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Structural (exact) zero test; used for correctness in exact mode.
    fn is_zero(&self) -> bool;
    /// Magnitude used for pivot selection and float-mode zero tests.
    fn abs_f64(&self) -> f64;
    /// Complex conjugate; identity on real scalars.
    fn conj(&self) -> Self;
    fn is_exact(&self) -> bool;
    fn to_float(&self) -> Self;
}

impl Entry for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn is_exact(&self) -> bool {
        Scalar::is_exact(self)
    }
    fn to_float(&self) -> Self {
        Scalar::to_float(self)
    }
}

impl Entry for ComplexScalar {
    fn zero() -> Self {
        ComplexScalar::zero()
    }
    fn one() -> Self {
        ComplexScalar::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        ComplexScalar::is_zero(self)
    }
    fn abs_f64(&self) -> f64 {
        ComplexScalar::abs_f64(self)
    }
    fn conj(&self) -> Self {
        ComplexScalar::conj(self)
    }
    fn is_exact(&self) -> bool {
        ComplexScalar::is_exact(self)
    }
    fn to_float(&self) -> Self {
        ComplexScalar::to_float(self)
    }
}

/// Zero decision used by rank computations.
#[derive(Clone, Copy, Debug)]
pub enum ZeroTest {
    /// Structural zero only; correct for exact data.
    Exact,
    /// `|x| < tol` counts as zero; for float data.
    Tol(f64),
}

impl ZeroTest {
    pub fn is_zero<T: Entry>(&self, x: &T) -> bool {
        match self {
            ZeroTest::Exact => x.is_zero(),
            ZeroTest::Tol(t) => x.abs_f64() < *t,
        }
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T: Entry> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

pub type RMat = Mat<Scalar>;
pub type CMat = Mat<ComplexScalar>;

impl<T: Entry> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<T> {
        self.row(i).to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matmul shape mismatch");
        let mut out: Mat<T> = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.cols {
                    if !self[(i, j)].is_zero() && !v[j].is_zero() {
                        acc = acc.add(&self[(i, j)].mul(&v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add_mat(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].add(&o[(i, j)]))
    }

    pub fn sub_mat(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].sub(&o[(i, j)]))
    }

    pub fn scale(&self, s: &T) -> Self {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mul(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(|x| x.is_exact())
    }

    pub fn to_float(&self) -> Self {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_float())
    }

    /// In-place reduced row echelon form. Returns the pivot columns.
    pub fn rref(&mut self, zt: ZeroTest) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // Largest magnitude pivot for float stability; any nonzero works
            // in exact mode.
            let mut best = r;
            let mut best_mag = self[(r, c)].abs_f64();
            for i in r + 1..self.rows {
                let mag = self[(i, c)].abs_f64();
                if mag > best_mag {
                    best = i;
                    best_mag = mag;
                }
            }
            if zt.is_zero(&self[(best, c)]) {
                // Exact nonzero entries whose f64 image underflows still count.
                if let ZeroTest::Exact = zt {
                    if let Some(i) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) {
                        best = i;
                    } else {
                        continue;
                    }
                } else {
                    continue;
                }
            }
            self.swap_rows(r, best);
            let inv = T::one().div(&self[(r, c)]);
            for j in c..self.cols {
                self[(r, j)] = self[(r, j)].mul(&inv);
            }
            self[(r, c)] = T::one();
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let factor = self[(i, c)].clone();
                for j in c..self.cols {
                    let delta = factor.mul(&self[(r, j)]);
                    self[(i, j)] = self[(i, j)].sub(&delta);
                }
                self[(i, c)] = T::zero();
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, zt: ZeroTest) -> usize {
        let mut m = self.clone();
        m.rref(zt).len()
    }

    /// Basis of the right kernel `{x : A x = 0}` as matrix rows.
    pub fn kernel(&self, zt: ZeroTest) -> Vec<Vec<T>> {
        let mut m = self.clone();
        let pivots = m.rref(zt);
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![T::zero(); self.cols];
            v[fc] = T::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = m[(r, fc)].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `A x = b` for a single right-hand side. `None` if inconsistent
    /// (or rank-deficient in a way that leaves `b` unreachable).
    pub fn solve(&self, b: &[T], zt: ZeroTest) -> Option<Vec<T>> {
        assert_eq!(self.rows, b.len(), "solve shape mismatch");
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let pivots = aug.rref(zt);
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column: inconsistent
        }
        let mut x = vec![T::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }

    /// Inverse of a square matrix; `None` when singular under `zt`.
    pub fn inverse(&self, zt: ZeroTest) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = T::one();
        }
        let pivots = aug.rref(zt);
        if pivots.len() < n || pivots.iter().enumerate().any(|(r, &c)| r != c) {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| aug[(i, n + j)].clone()))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T: Entry> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Entry> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl RMat {
    /// Symmetric positive definiteness via the pivots of a symmetric
    /// elimination: all leading pivots positive, no row exchanges needed.
    pub fn is_positive_definite(&self, zt: ZeroTest) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let n = self.rows;
        let mut m = self.clone();
        for k in 0..n {
            let pivot = m[(k, k)].clone();
            let pos = match zt {
                ZeroTest::Exact => pivot.sign() > 0,
                ZeroTest::Tol(t) => pivot.to_f64() > t,
            };
            if !pos {
                return false;
            }
            for i in k + 1..n {
                if m[(i, k)].is_zero() {
                    continue;
                }
                let f = &m[(i, k)] / &pivot;
                for j in k..n {
                    let delta = &f * &m[(k, j)];
                    m[(i, j)] = &m[(i, j)] - &delta;
                }
            }
        }
        true
    }

    pub fn is_symmetric(&self, zt: ZeroTest) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if !zt.is_zero(&(&self[(i, j)] - &self[(j, i)])) {
                    return false;
                }
            }
        }
        true
    }

    /// Lift to a complex matrix with zero imaginary part.
    pub fn complexify(&self) -> CMat {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            ComplexScalar::from_real(self[(i, j)].clone())
        })
    }
}

/// Max-norm of the entrywise difference.
pub fn max_diff<T: Entry>(a: &Mat<T>, b: &Mat<T>) -> f64 {
    a.sub_mat(b).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::int(n)
    }

    #[test]
    fn exact_inverse_round_trips() {
        let m = Mat::from_rows(vec![
            vec![s(2), s(1), s(0)],
            vec![s(1), s(3), s(1)],
            vec![s(0), s(1), s(4)],
        ]);
        let inv = m.inverse(ZeroTest::Exact).unwrap();
        assert_eq!(m.matmul(&inv), Mat::identity(3));
        assert!(inv.is_exact());
    }

    #[test]
    fn singular_matrix_has_no_inverse_and_a_kernel() {
        let m = Mat::from_rows(vec![vec![s(1), s(2)], vec![s(2), s(4)]]);
        assert!(m.inverse(ZeroTest::Exact).is_none());
        let k = m.kernel(ZeroTest::Exact);
        assert_eq!(k.len(), 1);
        let img = m.mul_vec(&k[0]);
        assert!(img.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn rank_respects_float_tolerance() {
        let m = Mat::from_rows(vec![
            vec![Scalar::float(1.0), Scalar::float(0.0)],
            vec![Scalar::float(0.0), Scalar::float(1e-14)],
        ]);
        assert_eq!(m.rank(ZeroTest::Tol(1e-10)), 1);
        assert_eq!(m.rank(ZeroTest::Tol(1e-16)), 2);
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = Mat::from_rows(vec![vec![s(1), s(1)], vec![s(2), s(2)]]);
        assert!(m.solve(&[s(1), s(3)], ZeroTest::Exact).is_none());
        let x = m.solve(&[s(1), s(2)], ZeroTest::Exact).unwrap();
        let img = m.mul_vec(&x);
        assert_eq!(img[0], s(1));
        assert_eq!(img[1], s(2));
    }

    #[test]
    fn positive_definiteness_sees_signs_exactly() {
        let pd = Mat::from_rows(vec![vec![s(2), s(1)], vec![s(1), s(2)]]);
        assert!(pd.is_positive_definite(ZeroTest::Exact));
        let indef = Mat::from_rows(vec![vec![s(1), s(2)], vec![s(2), s(1)]]);
        assert!(!indef.is_positive_definite(ZeroTest::Exact));
    }

    #[test]
    fn complex_elimination_inverts_a_unitary_like_matrix() {
        let i = ComplexScalar::i();
        let one = ComplexScalar::one();
        let m = Mat::from_rows(vec![vec![one.clone(), i.clone()], vec![i.clone(), one.clone()]]);
        let inv = m.inverse(ZeroTest::Exact).unwrap();
        assert_eq!(m.matmul(&inv), Mat::identity(2));
    }
}
