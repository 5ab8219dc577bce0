//! Finite-dimensional Lie algebras given by structure constants, inner
//! products on them, and almost complex structures.
//!
//! The bracket is stored as the full table `c[k][i][j]` with
//! `[x_i, x_j] = Σ_k c[k][i][j] x_k`; constructors only accept the upper
//! triangle `i < j` and antisymmetrize, so the table is antisymmetric by
//! construction in both arithmetic modes.

use crate::error::{Error, Result};
use crate::mat::{RMat, ZeroTest};
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// A Lie algebra structure on `K^dim` (Jacobi is *not* enforced by
/// construction; see [`LieAlgebra::jacobi_defect`]). Keeping invalid tables
/// representable is deliberate: the identity checks must be able to report
/// nonzero defects on corrupted inputs.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    pub dim: usize,
    /// Flattened `c[k][i][j]`, row-major in `(k, i, j)`.
    table: Vec<Scalar>,
    /// All `(k, i, j, value)` with nonzero `value` (both `(i,j)` orders).
    nonzero: Vec<(usize, usize, usize, Scalar)>,
}

impl LieAlgebra {
    #[inline]
    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra {
            dim,
            table: vec![Scalar::zero(); dim * dim * dim],
            nonzero: Vec::new(),
        }
    }

    /// Build from upper-triangle entries `(i, j, k, value)` meaning the
    /// coefficient of `x_k` in `[x_i, x_j]`, `i < j`. Duplicate `(i, j, k)`
    /// keys and out-of-range indices are rejected.
    pub fn from_entries(
        dim: usize,
        entries: &[(usize, usize, usize, Scalar)],
    ) -> Result<Self> {
        let mut alg = LieAlgebra::abelian(dim);
        let mut seen = std::collections::HashSet::new();
        for &(i, j, k, ref v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidInput(format!(
                    "structure constant index ({i},{j},{k}) out of range for dimension {dim}"
                )));
            }
            if i >= j {
                return Err(Error::InvalidInput(format!(
                    "structure constant ({i},{j},{k}) must have i < j; the lower triangle \
                     is implied by antisymmetry"
                )));
            }
            if !seen.insert((i, j, k)) {
                return Err(Error::InvalidInput(format!(
                    "duplicate structure constant for ({i},{j},{k})"
                )));
            }
            let p = alg.idx(k, i, j);
            alg.table[p] = v.clone();
            let q = alg.idx(k, j, i);
            alg.table[q] = -v;
        }
        alg.rebuild_nonzero();
        Ok(alg)
    }

    /// Build from a function on the upper triangle: `f(k, i, j)` is read for
    /// `i < j` only and the lower triangle is its exact negation.
    pub fn from_upper_fn(dim: usize, f: impl Fn(usize, usize, usize) -> Scalar) -> Self {
        let mut alg = LieAlgebra::abelian(dim);
        for k in 0..dim {
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let v = f(k, i, j);
                    if v.is_zero() {
                        continue;
                    }
                    let p = alg.idx(k, i, j);
                    alg.table[p] = v.clone();
                    let q = alg.idx(k, j, i);
                    alg.table[q] = -&v;
                }
            }
        }
        alg.rebuild_nonzero();
        alg
    }

    fn rebuild_nonzero(&mut self) {
        self.nonzero.clear();
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let v = &self.table[self.idx(k, i, j)];
                    if !v.is_zero() {
                        self.nonzero.push((k, i, j, v.clone()));
                    }
                }
            }
        }
    }

    /// Coefficient of `x_k` in `[x_i, x_j]`.
    #[inline]
    pub fn c(&self, k: usize, i: usize, j: usize) -> &Scalar {
        &self.table[(k * self.dim + i) * self.dim + j]
    }

    /// All nonzero `(k, i, j, c[k][i][j])`, both `(i, j)` orders.
    pub fn nonzero(&self) -> &[(usize, usize, usize, Scalar)] {
        &self.nonzero
    }

    pub fn is_exact(&self) -> bool {
        self.table.iter().all(|x| x.is_exact())
    }

    pub fn to_float(&self) -> Self {
        let mut alg = LieAlgebra {
            dim: self.dim,
            table: self.table.iter().map(|x| x.to_float()).collect(),
            nonzero: Vec::new(),
        };
        alg.rebuild_nonzero();
        alg
    }

    /// `[x_i, x_j]` as a coordinate vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<Scalar> {
        (0..self.dim).map(|k| self.c(k, i, j).clone()).collect()
    }

    /// `[x, y]` for arbitrary coordinate vectors, using the sparse table.
    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let mut out = vec![Scalar::zero(); self.dim];
        for &(k, i, j, ref v) in &self.nonzero {
            if x[i].is_zero() || y[j].is_zero() {
                continue;
            }
            out[k] = &out[k] + &(&(&x[i] * &y[j]) * v);
        }
        out
    }

    /// Matrix of `ad_x = [x, ·]` in the standard basis.
    pub fn ad(&self, x: &[Scalar]) -> RMat {
        let mut m = RMat::zeros(self.dim, self.dim);
        for &(k, i, j, ref v) in &self.nonzero {
            if x[i].is_zero() {
                continue;
            }
            m[(k, j)] = &m[(k, j)] + &(&x[i] * v);
        }
        m
    }

    pub fn ad_basis(&self, i: usize) -> RMat {
        RMat::from_fn(self.dim, self.dim, |k, j| self.c(k, i, j).clone())
    }

    /// The Jacobi cycle `[[x_i,x_j],x_k] + [[x_j,x_k],x_i] + [[x_k,x_i],x_j]`.
    pub fn jacobi_cycle(&self, i: usize, j: usize, k: usize) -> Vec<Scalar> {
        let ei: Vec<Scalar> = basis_vector(self.dim, i);
        let ej: Vec<Scalar> = basis_vector(self.dim, j);
        let ek: Vec<Scalar> = basis_vector(self.dim, k);
        let mut out = self.bracket(&self.bracket_basis(i, j), &ek);
        for (slot, t) in out
            .iter_mut()
            .zip(self.bracket(&self.bracket_basis(j, k), &ei))
        {
            *slot = &*slot + &t;
        }
        for (slot, t) in out
            .iter_mut()
            .zip(self.bracket(&self.bracket_basis(k, i), &ej))
        {
            *slot = &*slot + &t;
        }
        out
    }

    /// Max-norm of all Jacobi cycles over basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                for k in (j + 1)..self.dim {
                    for t in self.jacobi_cycle(i, j, k) {
                        worst = worst.max(t.to_f64().abs());
                    }
                }
            }
        }
        worst
    }

    /// Trace of `ad_{x_i}` vanishes for every `i`.
    pub fn is_unimodular(&self, zt: ZeroTest) -> bool {
        (0..self.dim).all(|i| {
            let tr = (0..self.dim).fold(Scalar::zero(), |acc, k| &acc + self.c(k, i, k));
            zt.is_zero(&tr)
        })
    }

    /// The derived algebra `[g, g]`, spanned by all basis brackets.
    pub fn derived_algebra(&self, zt: ZeroTest) -> Subspace<Scalar> {
        let mut vectors = Vec::new();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                vectors.push(self.bracket_basis(i, j));
            }
        }
        Subspace::from_spanning(self.dim, &vectors, zt)
    }

    /// The center: all `x` with `[x, x_j] = 0` for every `j`.
    pub fn center(&self, zt: ZeroTest) -> Subspace<Scalar> {
        // Stack the constraints: row (j*dim + k) of M is i |-> c[k][i][j].
        let m = RMat::from_fn(self.dim * self.dim, self.dim, |row, i| {
            let j = row / self.dim;
            let k = row % self.dim;
            self.c(k, i, j).clone()
        });
        Subspace::from_spanning(self.dim, &m.kernel(zt), zt)
    }

    /// Whether the derived algebra is abelian.
    pub fn is_two_step_solvable(&self, zt: ZeroTest) -> bool {
        let derived = self.derived_algebra(zt);
        let b = derived.basis();
        for (p, u) in b.iter().enumerate() {
            for v in b.iter().skip(p + 1) {
                if self
                    .bracket(u, v)
                    .iter()
                    .any(|x| !zt.is_zero(x))
                {
                    return false;
                }
            }
        }
        true
    }
}

pub fn basis_vector(dim: usize, i: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(); dim];
    v[i] = Scalar::one();
    v
}

/// A positive-definite symmetric bilinear form, with its inverse cached.
#[derive(Clone, Debug)]
pub struct MetricTensor {
    mat: RMat,
    inv: RMat,
}

impl MetricTensor {
    pub fn new(mat: RMat, zt: ZeroTest) -> Result<Self> {
        if mat.rows != mat.cols {
            return Err(Error::DimensionMismatch(format!(
                "metric must be square, got {}x{}",
                mat.rows, mat.cols
            )));
        }
        if !mat.is_symmetric(zt) {
            return Err(Error::InvalidInput("metric is not symmetric".into()));
        }
        if !mat.is_positive_definite(zt) {
            return Err(Error::InvalidInput(
                "metric is not positive definite".into(),
            ));
        }
        let inv = mat
            .inverse(zt)
            .ok_or_else(|| Error::InvalidInput("metric is singular".into()))?;
        Ok(MetricTensor { mat, inv })
    }

    pub fn identity(dim: usize) -> Self {
        MetricTensor {
            mat: RMat::identity(dim),
            inv: RMat::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn mat(&self) -> &RMat {
        &self.mat
    }

    pub fn inv(&self) -> &RMat {
        &self.inv
    }

    /// `⟨x, y⟩`.
    pub fn inner(&self, x: &[Scalar], y: &[Scalar]) -> Scalar {
        crate::subspace::dot_g(x, y, &self.mat)
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.mat[(i, j)]
    }

    pub fn is_exact(&self) -> bool {
        self.mat.is_exact()
    }

    pub fn to_float(&self) -> Self {
        MetricTensor {
            mat: self.mat.to_float(),
            inv: self.inv.to_float(),
        }
    }
}

/// A candidate complex structure: a linear map `J`. Construction does not
/// validate `J² = -I`; call [`AlmostComplexStructure::validate`].
#[derive(Clone, Debug)]
pub struct AlmostComplexStructure {
    pub mat: RMat,
}

impl AlmostComplexStructure {
    pub fn new(mat: RMat) -> Self {
        AlmostComplexStructure { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    /// Max-norm of `J² + I`.
    pub fn square_defect(&self) -> f64 {
        let n = self.mat.rows;
        let j2 = self.mat.matmul(&self.mat);
        crate::mat::max_diff(&j2, &RMat::identity(n).scale(&Scalar::int(-1)))
    }

    pub fn validate(&self, zt: ZeroTest) -> Result<()> {
        if self.mat.rows != self.mat.cols {
            return Err(Error::DimensionMismatch(format!(
                "complex structure must be square, got {}x{}",
                self.mat.rows, self.mat.cols
            )));
        }
        let n = self.mat.rows;
        let j2 = self.mat.matmul(&self.mat);
        let neg_id = RMat::identity(n).scale(&Scalar::int(-1));
        let ok = (0..n).all(|i| (0..n).all(|j| zt.is_zero(&(&j2[(i, j)] - &neg_id[(i, j)]))));
        if ok {
            Ok(())
        } else {
            Err(Error::NotComplexStructure {
                defect: crate::mat::max_diff(&j2, &neg_id),
            })
        }
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.mat.mul_vec(v)
    }

    pub fn is_exact(&self) -> bool {
        self.mat.is_exact()
    }

    pub fn to_float(&self) -> Self {
        AlmostComplexStructure {
            mat: self.mat.to_float(),
        }
    }

    /// The standard block structure `J x_{2i} = x_{2i+1}` on even dimension.
    pub fn standard(dim: usize) -> Self {
        assert!(dim % 2 == 0, "standard complex structure needs even dimension");
        let mut m = RMat::zeros(dim, dim);
        for p in 0..dim / 2 {
            m[(2 * p + 1, 2 * p)] = Scalar::one();
            m[(2 * p, 2 * p + 1)] = Scalar::int(-1);
        }
        AlmostComplexStructure::new(m)
    }
}

/// The torsion of `J` against the bracket:
/// `N(x, y) = [x,y] - [Jx,Jy] + J[Jx,y] + J[x,Jy]`.
/// `J` integrates to a complex structure iff this vanishes on all pairs.
pub fn nijenhuis(
    alg: &LieAlgebra,
    j: &AlmostComplexStructure,
    x: &[Scalar],
    y: &[Scalar],
) -> Vec<Scalar> {
    let jx = j.apply(x);
    let jy = j.apply(y);
    let mut out = alg.bracket(x, y);
    for (slot, t) in out.iter_mut().zip(alg.bracket(&jx, &jy)) {
        *slot = &*slot - &t;
    }
    for (slot, t) in out.iter_mut().zip(j.apply(&alg.bracket(&jx, y))) {
        *slot = &*slot + &t;
    }
    for (slot, t) in out.iter_mut().zip(j.apply(&alg.bracket(x, &jy))) {
        *slot = &*slot + &t;
    }
    out
}

/// Max-norm integrability defect over all basis pairs. Fails with
/// [`Error::NotComplexStructure`] before evaluating the bracket condition
/// when `J² ≠ -I`.
pub fn integrability_defect(
    alg: &LieAlgebra,
    j: &AlmostComplexStructure,
    zt: ZeroTest,
) -> Result<f64> {
    if alg.dim != j.dim() {
        return Err(Error::DimensionMismatch(format!(
            "algebra has dimension {} but J is {}x{}",
            alg.dim,
            j.mat.rows,
            j.mat.cols
        )));
    }
    j.validate(zt)?;
    let mut worst: f64 = 0.0;
    for a in 0..alg.dim {
        let ea = basis_vector(alg.dim, a);
        for b in (a + 1)..alg.dim {
            let eb = basis_vector(alg.dim, b);
            for t in nijenhuis(alg, j, &ea, &eb) {
                worst = worst.max(t.to_f64().abs());
            }
        }
    }
    Ok(worst)
}

/// Max-norm of `JᵀgJ - g`: how far `J` is from acting by isometries.
pub fn compatibility_defect(g: &MetricTensor, j: &AlmostComplexStructure) -> f64 {
    let jt_g_j = j.mat.transpose().matmul(g.mat()).matmul(&j.mat);
    crate::mat::max_diff(&jt_g_j, g.mat())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Scalar {
        Scalar::one()
    }

    /// [x0, x1] = x2, with x3 extra central.
    fn heisenberg4() -> LieAlgebra {
        LieAlgebra::from_entries(4, &[(0, 1, 2, one())]).unwrap()
    }

    /// Cross-product algebra: [x0,x1]=x2, [x1,x2]=x0, [x2,x0]=x1.
    fn cross3() -> LieAlgebra {
        LieAlgebra::from_entries(
            3,
            &[(0, 1, 2, one()), (1, 2, 0, one()), (0, 2, 1, -one())],
        )
        .unwrap()
    }

    #[test]
    fn bracket_is_antisymmetric_and_sparse_matches_table() {
        let alg = heisenberg4();
        assert_eq!(*alg.c(2, 0, 1), one());
        assert_eq!(*alg.c(2, 1, 0), -one());
        let x = basis_vector(4, 0);
        let y = basis_vector(4, 1);
        assert_eq!(alg.bracket(&x, &y), basis_vector(4, 2));
        let yx = alg.bracket(&y, &x);
        assert_eq!(yx[2], -one());
    }

    #[test]
    fn jacobi_holds_on_valid_tables_and_detects_corruption() {
        assert_eq!(heisenberg4().jacobi_defect(), 0.0);
        assert_eq!(cross3().jacobi_defect(), 0.0);
        // [x0,x1]=x2 and [x1,x2]=x1 violate the identity:
        // [[x0,x1],x2] + [[x1,x2],x0] + [[x2,x0],x1] = 0 + [x1,x0] + 0 = -x2.
        let bad = LieAlgebra::from_entries(3, &[(0, 1, 2, one()), (1, 2, 1, one())]).unwrap();
        assert_eq!(bad.jacobi_defect(), 1.0);
    }

    #[test]
    fn structural_subspaces_of_heisenberg() {
        let alg = heisenberg4();
        let zt = ZeroTest::Exact;
        let derived = alg.derived_algebra(zt);
        assert_eq!(derived.dim(), 1);
        assert!(derived.contains_vec(&basis_vector(4, 2), zt));
        let center = alg.center(zt);
        assert_eq!(center.dim(), 2);
        assert!(center.contains_vec(&basis_vector(4, 2), zt));
        assert!(center.contains_vec(&basis_vector(4, 3), zt));
        assert!(alg.is_two_step_solvable(zt));
        assert!(alg.is_unimodular(zt));
    }

    #[test]
    fn cross_product_algebra_is_not_solvable() {
        let alg = cross3();
        let zt = ZeroTest::Exact;
        assert_eq!(alg.derived_algebra(zt).dim(), 3);
        assert_eq!(alg.center(zt).dim(), 0);
        assert!(!alg.is_two_step_solvable(zt));
        assert!(alg.is_unimodular(zt));
    }

    #[test]
    fn non_unimodular_example() {
        // [x0, x1] = x1: tr ad_{x0} = 1.
        let alg = LieAlgebra::from_entries(2, &[(0, 1, 1, one())]).unwrap();
        assert!(!alg.is_unimodular(ZeroTest::Exact));
    }

    #[test]
    fn complex_structure_validation() {
        let j = AlmostComplexStructure::standard(4);
        assert!(j.validate(ZeroTest::Exact).is_ok());
        let bad = AlmostComplexStructure::new(RMat::identity(4));
        match bad.validate(ZeroTest::Exact) {
            Err(Error::NotComplexStructure { defect }) => assert_eq!(defect, 2.0),
            other => panic!("expected NotComplexStructure, got {:?}", other),
        }
    }

    #[test]
    fn abelian_algebra_is_integrable_for_any_j() {
        let alg = LieAlgebra::abelian(4);
        let j = AlmostComplexStructure::standard(4);
        let d = integrability_defect(&alg, &j, ZeroTest::Exact).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn compatibility_defect_detects_stretch() {
        let j = AlmostComplexStructure::standard(2);
        let g_ok = MetricTensor::identity(2);
        assert_eq!(compatibility_defect(&g_ok, &j), 0.0);
        let mut m = RMat::identity(2);
        m[(1, 1)] = Scalar::int(2);
        let g_bad = MetricTensor::new(m, ZeroTest::Exact).unwrap();
        assert!(compatibility_defect(&g_bad, &j) > 0.9);
    }

    #[test]
    fn entry_constructors_reject_bad_input() {
        assert!(LieAlgebra::from_entries(2, &[(1, 0, 0, one())]).is_err());
        assert!(LieAlgebra::from_entries(2, &[(0, 1, 5, one())]).is_err());
        assert!(
            LieAlgebra::from_entries(2, &[(0, 1, 0, one()), (0, 1, 0, one())]).is_err()
        );
    }
}
