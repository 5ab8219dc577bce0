//! Linear subspaces of the algebra's underlying coordinate space, with the
//! lattice operations (sum, intersection, metric complement) used by the
//! structural decompositions.

use crate::error::{Error, Result};
use crate::mat::{Entry, Mat, RMat, ZeroTest};
use crate::scalar::{ArithmeticPolicy, Scalar};

/// A subspace of `K^ambient`, stored as a canonical (reduced row echelon)
/// basis. Two subspaces over exact scalars are equal iff their stored bases
/// are equal; in float mode use [`Subspace::equals`].
#[derive(Clone, Debug)]
pub struct Subspace<T: Entry> {
    pub ambient: usize,
    basis: Vec<Vec<T>>,
}

impl<T: Entry> Subspace<T> {
    /// The zero subspace.
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    /// The whole space.
    pub fn full(ambient: usize) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                (0..ambient)
                    .map(|j| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        Subspace { ambient, basis }
    }

    /// Canonical subspace spanned by the given vectors.
    pub fn from_spanning(ambient: usize, vectors: &[Vec<T>], zt: ZeroTest) -> Self {
        for v in vectors {
            assert_eq!(v.len(), ambient, "spanning vector has wrong length");
        }
        if vectors.is_empty() {
            return Subspace::zero(ambient);
        }
        let mut m = Mat::from_rows(vectors.to_vec());
        m.rref(zt);
        let basis = (0..m.rows)
            .map(|i| (0..ambient).map(|j| m[(i, j)].clone()).collect::<Vec<T>>())
            .filter(|row: &Vec<T>| row.iter().any(|x| !zt.is_zero(x)))
            .collect();
        Subspace { ambient, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    fn basis_mat(&self) -> Mat<T> {
        if self.basis.is_empty() {
            Mat::zeros(0, self.ambient)
        } else {
            Mat::from_rows(self.basis.clone())
        }
    }

    /// Does `v` lie in the span?
    pub fn contains_vec(&self, v: &[T], zt: ZeroTest) -> bool {
        assert_eq!(v.len(), self.ambient);
        if v.iter().all(|x| zt.is_zero(x)) {
            return true;
        }
        if self.basis.is_empty() {
            return false;
        }
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        let mut m = Mat::from_rows(rows);
        m.rref(zt);
        m.rank(zt) == self.dim()
    }

    pub fn contains(&self, other: &Subspace<T>, zt: ZeroTest) -> bool {
        other.basis.iter().all(|v| self.contains_vec(v, zt))
    }

    pub fn equals(&self, other: &Subspace<T>, zt: ZeroTest) -> bool {
        self.dim() == other.dim() && self.contains(other, zt)
    }

    /// Span of the union.
    pub fn sum(&self, other: &Subspace<T>, zt: ZeroTest) -> Subspace<T> {
        assert_eq!(self.ambient, other.ambient);
        let mut rows = self.basis.clone();
        rows.extend(other.basis.clone());
        Subspace::from_spanning(self.ambient, &rows, zt)
    }

    /// Intersection, via the kernel of the column-stacked basis matrices:
    /// a vector lies in both spans iff coefficients `(u, w)` with
    /// `A^T u = B^T w` exist.
    pub fn intersect(&self, other: &Subspace<T>, zt: ZeroTest) -> Subspace<T> {
        assert_eq!(self.ambient, other.ambient);
        let k = self.dim();
        let m = other.dim();
        if k == 0 || m == 0 {
            return Subspace::zero(self.ambient);
        }
        let stacked = Mat::from_fn(self.ambient, k + m, |r, c| {
            if c < k {
                self.basis[c][r].clone()
            } else {
                other.basis[c - k][r].neg()
            }
        });
        let ker = stacked.kernel(zt);
        let vectors: Vec<Vec<T>> = ker
            .iter()
            .map(|uw| {
                let mut v = vec![T::zero(); self.ambient];
                for (i, coeff) in uw.iter().take(k).enumerate() {
                    for (slot, b) in v.iter_mut().zip(&self.basis[i]) {
                        *slot = slot.add(&coeff.mul(b));
                    }
                }
                v
            })
            .collect();
        Subspace::from_spanning(self.ambient, &vectors, zt)
    }

    /// Orthogonal complement with respect to the bilinear form `g`:
    /// all `v` with `b g v = 0` for every basis vector `b`.
    pub fn complement_wrt(&self, g: &Mat<T>, zt: ZeroTest) -> Subspace<T> {
        assert_eq!(g.rows, self.ambient);
        if self.basis.is_empty() {
            return Subspace::full(self.ambient);
        }
        let bg = self.basis_mat().matmul(g);
        let ker = bg.kernel(zt);
        Subspace::from_spanning(self.ambient, &ker, zt)
    }

    /// Image under the linear map `m` (acting on coordinate vectors).
    pub fn apply(&self, m: &Mat<T>, zt: ZeroTest) -> Subspace<T> {
        assert_eq!(m.cols, self.ambient);
        let vectors: Vec<Vec<T>> = self.basis.iter().map(|v| m.mul_vec(v)).collect();
        Subspace::from_spanning(m.rows, &vectors, zt)
    }

    /// Gram matrix `B g B^T` of the stored basis.
    pub fn gram(&self, g: &Mat<T>) -> Mat<T> {
        self.basis_mat().matmul(g).matmul(&self.basis_mat().transpose())
    }
}

/// Inner product `u^T g v`.
pub fn dot_g(u: &[Scalar], v: &[Scalar], g: &RMat) -> Scalar {
    let gv = g.mul_vec(v);
    u.iter()
        .zip(&gv)
        .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
}

/// Gram–Schmidt orthonormalization of `vectors` with respect to `g`.
///
/// Exact inputs stay exact when every intermediate norm happens to be a
/// square in ℚ(√2); otherwise the behavior is set by `policy`: degrade the
/// whole family to binary64, or fail. Returns an error if the vectors are
/// linearly dependent.
pub fn orthonormalize(
    vectors: &[Vec<Scalar>],
    g: &RMat,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
) -> Result<Vec<Vec<Scalar>>> {
    let mut out: Vec<Vec<Scalar>> = Vec::with_capacity(vectors.len());
    let mut work: Vec<Vec<Scalar>> = vectors.to_vec();
    let mut g_work = g.clone();
    let mut degraded = false;
    let mut idx = 0;
    while idx < work.len() {
        let mut v = work[idx].clone();
        for u in &out {
            let c = dot_g(&v, u, &g_work);
            for (slot, uj) in v.iter_mut().zip(u) {
                *slot = &*slot - &(&c * uj);
            }
        }
        let norm_sq = dot_g(&v, &v, &g_work);
        if zt.is_zero(&norm_sq) {
            return Err(Error::DependentFrame);
        }
        if norm_sq.sign() < 0 {
            return Err(Error::InvalidInput(
                "metric is not positive definite on the given vectors".into(),
            ));
        }
        let norm = match norm_sq.sqrt_exact() {
            Some(s) => s,
            None => match policy {
                ArithmeticPolicy::RequireExact => {
                    return Err(Error::ExactnessLost(format!(
                        "norm^2 = {} has no exact square root",
                        norm_sq
                    )))
                }
                ArithmeticPolicy::Auto => {
                    if !degraded {
                        degraded = true;
                        for w in out.iter_mut().chain(work.iter_mut()) {
                            for x in w.iter_mut() {
                                *x = x.to_float();
                            }
                        }
                        g_work = g_work.to_float();
                        // Restart the current vector in float mode.
                        continue;
                    }
                    Scalar::float(norm_sq.to_f64().sqrt())
                }
            },
        };
        let inv = norm.recip();
        for slot in v.iter_mut() {
            *slot = &*slot * &inv;
        }
        out.push(v);
        idx += 1;
    }
    Ok(out)
}
