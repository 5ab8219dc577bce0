//! Small dense f64 kernels for the numeric hot paths: the integrability
//! search and eigenvalue splitting. Matrices are flat row-major `Vec<f64>`.

/// Row-major n x n (or rows x cols) f64 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, o: &FMat) -> FMat {
        assert_eq!(self.cols, o.rows);
        let mut out = FMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0.0 {
                    continue;
                }
                let row_o = &o.data[k * o.cols..(k + 1) * o.cols];
                let row_out = &mut out.data[i * o.cols..(i + 1) * o.cols];
                for (outv, &b) in row_out.iter_mut().zip(row_o) {
                    *outv += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> FMat {
        let mut out = FMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    pub fn add(&self, o: &FMat) -> FMat {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, o: &FMat) -> FMat {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> FMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Inverse by LU with partial pivoting; `None` when a pivot falls under
    /// `tiny`.
    pub fn inverse(&self, tiny: f64) -> Option<FMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = FMat::identity(n);
        for c in 0..n {
            let (p, mag) = (c..n)
                .map(|r| (r, a.at(r, c).abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if mag < tiny {
                return None;
            }
            for j in 0..n {
                a.data.swap(c * n + j, p * n + j);
                inv.data.swap(c * n + j, p * n + j);
            }
            let d = a.at(c, c);
            for j in 0..n {
                a.data[c * n + j] /= d;
                inv.data[c * n + j] /= d;
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a.at(r, c);
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let ac = a.at(c, j);
                    let ic = inv.at(c, j);
                    a.data[r * n + j] -= f * ac;
                    inv.data[r * n + j] -= f * ic;
                }
            }
        }
        Some(inv)
    }
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
/// Returns `(eigenvalues, v)` with columns of `v` the eigenvectors,
/// eigenvalues ascending.
pub fn symmetric_eigen(m: &FMat) -> (Vec<f64>, FMat) {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut v = FMat::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a.at(i, j).abs();
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.at(i, i).total_cmp(&a.at(j, j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.at(i, i)).collect();
    let mut vs = FMat::zeros(n, n);
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            vs.set(r, newc, v.at(r, oldc));
        }
    }
    (eigenvalues, vs)
}

/// Orthogonal polar factor by Newton iteration `P <- (P + P^{-T})/2`.
/// For a skew-symmetric start the iterates stay skew, so the limit is a
/// skew-symmetric orthogonal matrix.
pub fn polar_orthogonal(m: &FMat) -> Option<FMat> {
    let mut p = m.clone();
    for _ in 0..60 {
        let pinv_t = p.inverse(1e-300)?.transpose();
        let next = p.add(&pinv_t).scale(0.5);
        let drift = next.sub(&p).max_abs();
        p = next;
        if drift < 1e-15 {
            break;
        }
    }
    Some(p)
}

/// Frobenius norm of `M^T M - I`.
pub fn orthogonality_defect(m: &FMat) -> f64 {
    let g = m.transpose().matmul(m);
    g.sub(&FMat::identity(m.rows)).max_abs()
}

/// Lower-triangular Cholesky factor `L` with `L L^T = M` for a symmetric
/// positive-definite `M`; `None` when a pivot is not safely positive.
pub fn cholesky(m: &FMat) -> Option<FMat> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut l = FMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m.at(i, j);
            for k in 0..j {
                sum -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if sum <= 1e-300 {
                    return None;
                }
                l.set(i, i, sum.sqrt());
            } else {
                l.set(i, j, sum / l.at(j, j));
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // diag(1, 3) conjugated by a rotation.
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let r = FMat {
            rows: 2,
            cols: 2,
            data: vec![c, -s, s, c],
        };
        let d = FMat {
            rows: 2,
            cols: 2,
            data: vec![1.0, 0.0, 0.0, 3.0],
        };
        let m = r.matmul(&d).matmul(&r.transpose());
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        assert!(orthogonality_defect(&vecs) < 1e-12);
        // M v = lambda v for each column.
        for k in 0..2 {
            let v: Vec<f64> = (0..2).map(|i| vecs.at(i, k)).collect();
            let mv = m.mul_vec(&v);
            for i in 0..2 {
                assert!((mv[i] - vals[k] * v[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn polar_factor_of_skew_is_skew_orthogonal() {
        // Skew 4x4 with distinct singular values.
        let mut s = FMat::zeros(4, 4);
        let pairs = [(0usize, 1usize, 0.8), (2, 3, 1.7), (0, 2, 0.3)];
        for &(i, j, v) in &pairs {
            s.set(i, j, v);
            s.set(j, i, -v);
        }
        let p = polar_orthogonal(&s).unwrap();
        assert!(orthogonality_defect(&p) < 1e-13);
        let skew_defect = p.add(&p.transpose()).max_abs();
        assert!(skew_defect < 1e-13);
        let p2 = p.matmul(&p);
        let neg_id = FMat::identity(4).scale(-1.0);
        assert!(p2.sub(&neg_id).max_abs() < 1e-12);
    }

    #[test]
    fn lu_inverse_round_trips() {
        let m = FMat {
            rows: 3,
            cols: 3,
            data: vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0],
        };
        let inv = m.inverse(1e-300).unwrap();
        let prod = m.matmul(&inv);
        assert!(prod.sub(&FMat::identity(3)).max_abs() < 1e-13);
    }

    #[test]
    fn cholesky_factors_positive_definite_input() {
        let m = FMat {
            rows: 3,
            cols: 3,
            data: vec![4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0],
        };
        let l = cholesky(&m).unwrap();
        let prod = l.matmul(&l.transpose());
        assert!(prod.sub(&m).max_abs() < 1e-13);
        // Strict upper triangle is zero.
        for i in 0..3 {
            for j in i + 1..3 {
                assert_eq!(l.at(i, j), 0.0);
            }
        }
        // An indefinite matrix is rejected.
        let bad = FMat {
            rows: 2,
            cols: 2,
            data: vec![1.0, 2.0, 2.0, 1.0],
        };
        assert!(cholesky(&bad).is_none());
    }
}
