//! Left-invariant Riemannian geometry of a metric Lie algebra: the
//! Levi-Civita connection, the curvature tensor, and the rotation-block
//! normal form that characterizes flat metrics.
//!
//! Conventions. `gamma[k][i][j]` are the coefficients of
//! `∇_{x_i} x_j = Σ_k Γ^k_{ij} x_k` defined by
//! `2⟨∇_x y, z⟩ = ⟨[x,y],z⟩ − ⟨[y,z],x⟩ + ⟨[z,x],y⟩`,
//! and the curvature is `R(x,y)z = ∇_x ∇_y z − ∇_y ∇_x z − ∇_{[x,y]} z`,
//! stored as `r[l][i][j][k]` with `R(x_i,x_j)x_k = Σ_l R^l_{ijk} x_l`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fmat::{symmetric_eigen, FMat};
use crate::lie::{basis_vector, LieAlgebra, MetricTensor};
use crate::mat::{RMat, ZeroTest};
use crate::scalar::{ArithmeticPolicy, Scalar};
use crate::subspace::{dot_g, orthonormalize, Subspace};

/// Connection coefficients `Γ^k_{ij}` of a left-invariant metric.
#[derive(Clone, Debug)]
pub struct Connection {
    pub dim: usize,
    gamma: Vec<Scalar>,
}

impl Connection {
    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Scalar {
        &self.gamma[(k * self.dim + i) * self.dim + j]
    }

    /// Matrix of `v ↦ ∇_{x_i} v` (entry `(k, j)` is `Γ^k_{ij}`).
    pub fn matrix(&self, i: usize) -> RMat {
        RMat::from_fn(self.dim, self.dim, |k, j| self.gamma(k, i, j).clone())
    }

    /// `∇_x y` for coordinate vectors, bilinear in both slots.
    pub fn apply(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.dim];
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, slot) in out.iter_mut().enumerate() {
                    let gm = self.gamma(k, i, j);
                    if !gm.is_zero() {
                        *slot = &*slot + &(&xy * gm);
                    }
                }
            }
        }
        out
    }
}

/// Levi-Civita connection of `(alg, g)` from the Koszul formula.
pub fn levi_civita(alg: &LieAlgebra, g: &MetricTensor) -> Connection {
    let n = alg.dim;
    assert_eq!(n, g.dim(), "metric dimension mismatch");
    let half = Scalar::ratio(1, 2);
    let mut gamma = vec![Scalar::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            // k(l) = <[x_i,x_j], x_l> - <[x_j,x_l], x_i> + <[x_l,x_i], x_j>
            let b_ij = alg.bracket_basis(i, j);
            let g_bij = g.mat().mul_vec(&b_ij);
            let mut k_vec = Vec::with_capacity(n);
            for l in 0..n {
                let mut t = g_bij[l].clone();
                for m in 0..n {
                    let c_jl = alg.c(m, j, l);
                    if !c_jl.is_zero() {
                        t = &t - &(c_jl * g.entry(m, i));
                    }
                    let c_li = alg.c(m, l, i);
                    if !c_li.is_zero() {
                        t = &t + &(c_li * g.entry(m, j));
                    }
                }
                k_vec.push(&t * &half);
            }
            let coeffs = g.inv().mul_vec(&k_vec);
            for (k, v) in coeffs.into_iter().enumerate() {
                gamma[(k * n + i) * n + j] = v;
            }
        }
    }
    Connection { dim: n, gamma }
}

/// Full curvature tensor `R^l_{ijk}`.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    pub dim: usize,
    data: Vec<Scalar>,
}

impl CurvatureTensor {
    #[inline]
    pub fn component(&self, l: usize, i: usize, j: usize, k: usize) -> &Scalar {
        let n = self.dim;
        &self.data[((l * n + i) * n + j) * n + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.to_f64().abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// `⟨R(x_i, x_j) x_k, x_l⟩` lowered with `g`.
    pub fn lowered(&self, g: &MetricTensor, i: usize, j: usize, k: usize, l: usize) -> Scalar {
        let rv: Vec<Scalar> = (0..self.dim)
            .map(|m| self.component(m, i, j, k).clone())
            .collect();
        g.inner(&rv, &basis_vector(self.dim, l))
    }

    /// The sectional numerator `⟨R(x_i, x_j) x_j, x_i⟩`.
    pub fn sectional_numerator(&self, g: &MetricTensor, i: usize, j: usize) -> Scalar {
        self.lowered(g, i, j, j, i)
    }
}

/// Curvature of the Levi-Civita connection.
pub fn riemann_curvature(alg: &LieAlgebra, conn: &Connection) -> CurvatureTensor {
    let n = alg.dim;
    let nabla: Vec<RMat> = (0..n).map(|i| conn.matrix(i)).collect();
    let mut data = vec![Scalar::zero(); n * n * n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            // R(x_i, x_j) = [nabla_i, nabla_j] - nabla_{[x_i, x_j]}
            let mut m = nabla[i]
                .matmul(&nabla[j])
                .sub_mat(&nabla[j].matmul(&nabla[i]));
            for s in 0..n {
                let c = alg.c(s, i, j);
                if !c.is_zero() {
                    m = m.sub_mat(&nabla[s].scale(c));
                }
            }
            for l in 0..n {
                for k in 0..n {
                    let v = m[(l, k)].clone();
                    data[((l * n + i) * n + j) * n + k] = v.clone();
                    data[((l * n + j) * n + i) * n + k] = -&v;
                }
            }
        }
    }
    CurvatureTensor { dim: n, data }
}

/// Max-norm of the curvature tensor of `(alg, g)`.
pub fn flatness_defect(alg: &LieAlgebra, g: &MetricTensor) -> f64 {
    let conn = levi_civita(alg, g);
    riemann_curvature(alg, &conn).max_abs()
}

pub fn is_flat(alg: &LieAlgebra, g: &MetricTensor, zt: ZeroTest) -> bool {
    match zt {
        ZeroTest::Exact => {
            let conn = levi_civita(alg, g);
            riemann_curvature(alg, &conn).is_zero()
        }
        ZeroTest::Tol(t) => flatness_defect(alg, g) < t,
    }
}

/// A claimed rotation-block splitting of a metric Lie algebra:
/// an abelian complement `h`, a central part `z`, orthonormal plane pairs
/// `(ε_{2i}, ε_{2i+1})` spanning the derived algebra, and the rate matrix
/// `f[i][j] = ⟨[h_j, ε_{2i}], ε_{2i+1}⟩`.
#[derive(Clone, Debug)]
pub struct FlatStructure {
    pub h_basis: Vec<Vec<Scalar>>,
    pub z_basis: Vec<Vec<Scalar>>,
    pub eps_pairs: Vec<(Vec<Scalar>, Vec<Scalar>)>,
    pub f: Vec<Vec<Scalar>>,
}

impl FlatStructure {
    pub fn is_exact(&self) -> bool {
        self.h_basis
            .iter()
            .chain(self.z_basis.iter())
            .flatten()
            .all(|x| x.is_exact())
            && self
                .eps_pairs
                .iter()
                .flat_map(|(a, b)| a.iter().chain(b.iter()))
                .all(|x| x.is_exact())
            && self.f.iter().flatten().all(|x| x.is_exact())
    }
}

/// One verified clause of the normal-form check.
#[derive(Clone, Debug)]
pub struct ClauseCheck {
    pub name: &'static str,
    pub defect: f64,
    pub pass: bool,
}

/// Result of checking a [`FlatStructure`] against an algebra.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub clauses: Vec<ClauseCheck>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn max_defect(&self) -> f64 {
        self.clauses.iter().fold(0.0, |m, c| m.max(c.defect))
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.clauses
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect()
    }
}

fn vec_max_abs(v: &[Scalar]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.to_f64().abs()))
}

/// Check every clause of the rotation-block normal form. A passing report
/// certifies flatness of the metric: the clauses pin the whole bracket
/// table (central part central, complement abelian, derived part abelian,
/// complement acting by the stated skew rotations), and a metric with such
/// a table has vanishing curvature.
///
/// Note the `derived_abelian` clause: without it, resonant rotation rates
/// admit an extra bracket between planes that satisfies every other clause
/// while the metric curves, so the clause list would not be sufficient.
pub fn milnor_verify(
    alg: &LieAlgebra,
    g: &MetricTensor,
    fs: &FlatStructure,
    zt: ZeroTest,
) -> Result<VerifyReport> {
    let n = alg.dim;
    if g.dim() != n {
        return Err(Error::DimensionMismatch(
            "metric and algebra dimensions differ".into(),
        ));
    }
    for v in fs
        .h_basis
        .iter()
        .chain(fs.z_basis.iter())
        .chain(fs.eps_pairs.iter().flat_map(|(a, b)| [a, b]))
    {
        if v.len() != n {
            return Err(Error::DimensionMismatch(
                "splitting vector has wrong length".into(),
            ));
        }
    }
    let p = fs.eps_pairs.len();
    let dim_h = fs.h_basis.len();
    let dim_z = fs.z_basis.len();
    let mut clauses = Vec::new();
    let derived = alg.derived_algebra(zt);

    // 1. block_dimensions: the three parts account for the whole space and
    //    the derived algebra is exactly the plane sum; f has one row per
    //    plane and one column per complement vector.
    {
        let dim_ok = dim_h + dim_z + 2 * p == n && derived.dim() == 2 * p;
        let f_ok = fs.f.len() == p && fs.f.iter().all(|row| row.len() == dim_h);
        clauses.push(ClauseCheck {
            name: "block_dimensions",
            defect: if dim_ok && f_ok { 0.0 } else { 1.0 },
            pass: dim_ok && f_ok,
        });
    }

    // 2. orthogonal_splitting: the three families are pairwise orthogonal
    //    and together span the space.
    {
        let mut defect: f64 = 0.0;
        let eps_flat: Vec<&Vec<Scalar>> =
            fs.eps_pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        for hv in &fs.h_basis {
            for zv in &fs.z_basis {
                defect = defect.max(g.inner(hv, zv).to_f64().abs());
            }
            for ev in &eps_flat {
                defect = defect.max(g.inner(hv, ev).to_f64().abs());
            }
        }
        for zv in &fs.z_basis {
            for ev in &eps_flat {
                defect = defect.max(g.inner(zv, ev).to_f64().abs());
            }
        }
        let mut all: Vec<Vec<Scalar>> = fs.h_basis.clone();
        all.extend(fs.z_basis.iter().cloned());
        all.extend(eps_flat.iter().map(|v| (*v).clone()));
        let span_ok = if all.is_empty() {
            n == 0
        } else {
            crate::mat::Mat::from_rows(all).rank(zt) == n
        };
        let ortho_ok = match zt {
            ZeroTest::Exact => defect == 0.0,
            ZeroTest::Tol(t) => defect < t,
        };
        clauses.push(ClauseCheck {
            name: "orthogonal_splitting",
            defect: if span_ok { defect } else { 1.0 },
            pass: ortho_ok && span_ok,
        });
    }

    // 3. rotation_planes_orthonormal.
    {
        let eps_flat: Vec<&Vec<Scalar>> =
            fs.eps_pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        let mut defect: f64 = 0.0;
        for (a, va) in eps_flat.iter().enumerate() {
            for (b, vb) in eps_flat.iter().enumerate() {
                let want = if a == b { Scalar::one() } else { Scalar::zero() };
                defect = defect.max((&g.inner(va, vb) - &want).to_f64().abs());
            }
        }
        let pass = match zt {
            ZeroTest::Exact => defect == 0.0,
            ZeroTest::Tol(t) => defect < t,
        };
        clauses.push(ClauseCheck {
            name: "rotation_planes_orthonormal",
            defect,
            pass,
        });
    }

    // 4. central_part_matches_center: span(z) is exactly the center.
    {
        let zspan = Subspace::from_spanning(n, &fs.z_basis, zt);
        let center = alg.center(zt);
        let pass = zspan.equals(&center, zt);
        clauses.push(ClauseCheck {
            name: "central_part_matches_center",
            defect: if pass { 0.0 } else { 1.0 },
            pass,
        });
    }

    // 5. rotation_planes_span_derived.
    {
        let eps_vecs: Vec<Vec<Scalar>> = fs
            .eps_pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect();
        let espan = Subspace::from_spanning(n, &eps_vecs, zt);
        let pass = espan.equals(&derived, zt) && espan.dim() == 2 * p;
        clauses.push(ClauseCheck {
            name: "rotation_planes_span_derived",
            defect: if pass { 0.0 } else { 1.0 },
            pass,
        });
    }

    // 6. complement_abelian: [h, h] = 0.
    {
        let mut defect: f64 = 0.0;
        for (a, u) in fs.h_basis.iter().enumerate() {
            for v in fs.h_basis.iter().skip(a + 1) {
                defect = defect.max(vec_max_abs(&alg.bracket(u, v)));
            }
        }
        let pass = match zt {
            ZeroTest::Exact => defect == 0.0,
            ZeroTest::Tol(t) => defect < t,
        };
        clauses.push(ClauseCheck {
            name: "complement_abelian",
            defect,
            pass,
        });
    }

    // 7. derived_abelian: brackets between plane vectors vanish. Required
    //    for sufficiency; see the function comment.
    {
        let eps_flat: Vec<&Vec<Scalar>> =
            fs.eps_pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        let mut defect: f64 = 0.0;
        for (a, u) in eps_flat.iter().enumerate() {
            for v in eps_flat.iter().skip(a + 1) {
                defect = defect.max(vec_max_abs(&alg.bracket(u, v)));
            }
        }
        let pass = match zt {
            ZeroTest::Exact => defect == 0.0,
            ZeroTest::Tol(t) => defect < t,
        };
        clauses.push(ClauseCheck {
            name: "derived_abelian",
            defect,
            pass,
        });
    }

    // 8. rotation_block_form: [h_j, ε_{2i}] = f_ij ε_{2i+1} and
    //    [h_j, ε_{2i+1}] = -f_ij ε_{2i}.
    {
        let mut defect: f64 = 0.0;
        for (i, (e1, e2)) in fs.eps_pairs.iter().enumerate() {
            for (j, h) in fs.h_basis.iter().enumerate() {
                let fij = fs
                    .f
                    .get(i)
                    .and_then(|row| row.get(j))
                    .cloned()
                    .unwrap_or_else(Scalar::zero);
                let mut r1 = alg.bracket(h, e1);
                for (slot, t) in r1.iter_mut().zip(e2) {
                    *slot = &*slot - &(&fij * t);
                }
                let mut r2 = alg.bracket(h, e2);
                for (slot, t) in r2.iter_mut().zip(e1) {
                    *slot = &*slot + &(&fij * t);
                }
                defect = defect.max(vec_max_abs(&r1)).max(vec_max_abs(&r2));
            }
        }
        let pass = match zt {
            ZeroTest::Exact => defect == 0.0,
            ZeroTest::Tol(t) => defect < t,
        };
        clauses.push(ClauseCheck {
            name: "rotation_block_form",
            defect,
            pass,
        });
    }

    // 9. rotation_rates_injective: the rate matrix separates the complement
    //    (no central directions hide in h) and every plane actually rotates.
    {
        let pass = if p == 0 && dim_h == 0 {
            true
        } else {
            let fm = if p == 0 {
                RMat::zeros(0, dim_h)
            } else {
                RMat::from_rows(fs.f.clone())
            };
            let rank_ok = if dim_h == 0 {
                true
            } else {
                fm.rank(zt) == dim_h
            };
            let rows_ok = fs
                .f
                .iter()
                .all(|row| row.iter().any(|x| !zt.is_zero(x)));
            rank_ok && rows_ok
        };
        clauses.push(ClauseCheck {
            name: "rotation_rates_injective",
            defect: if pass { 0.0 } else { 1.0 },
            pass,
        });
    }

    Ok(VerifyReport { clauses })
}

const SPLIT_RETRY_CAP: usize = 6;

/// Compute a rotation-block splitting of a flat metric Lie algebra.
///
/// Fails with [`Error::NotFlat`] when the metric has curvature. The plane
/// splitting inside the derived algebra stays exact when a single plane
/// suffices and the normalizations stay inside ℚ(√2); beyond that it uses
/// a floating-point eigensolver (under `ArithmeticPolicy::RequireExact`
/// this is reported as exactness loss). The result always passes
/// [`milnor_verify`] before being returned.
pub fn milnor_decompose(
    alg: &LieAlgebra,
    g: &MetricTensor,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
    seed: u64,
) -> Result<FlatStructure> {
    let n = alg.dim;
    let defect = flatness_defect(alg, g);
    let flat = match zt {
        ZeroTest::Exact => defect == 0.0,
        ZeroTest::Tol(t) => defect < t,
    };
    if !flat {
        return Err(Error::NotFlat { defect });
    }
    let derived = alg.derived_algebra(zt);
    if derived.dim() % 2 != 0 {
        return Err(Error::DegenerateSplitting(
            "derived algebra of a flat metric algebra must be even-dimensional".into(),
        ));
    }
    let p = derived.dim() / 2;
    let center = alg.center(zt);
    let zspace = center.intersect(&derived.complement_wrt(g.mat(), zt), zt);
    let hspace = zspace
        .sum(&derived, zt)
        .complement_wrt(g.mat(), zt);
    if hspace.dim() + zspace.dim() + 2 * p != n {
        return Err(Error::DegenerateSplitting(format!(
            "splitting dimensions {} + {} + {} do not fill the space",
            hspace.dim(),
            zspace.dim(),
            2 * p
        )));
    }
    // Orthonormal bases for both non-rotating blocks, so the reported rates
    // are canonical up to permutation, sign, and orthogonal changes of the
    // complement basis — raw spanning bases would scale the rates by their
    // norms.
    let h_basis: Vec<Vec<Scalar>> = orthonormalize(hspace.basis(), g.mat(), policy, zt)?;
    let z_basis: Vec<Vec<Scalar>> = orthonormalize(zspace.basis(), g.mat(), policy, zt)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eps_pairs: Vec<(Vec<Scalar>, Vec<Scalar>)> = Vec::with_capacity(p);
    if p > 0 {
        let q0 = orthonormalize(derived.basis(), g.mat(), policy, zt)?;
        split_planes(alg, g, &h_basis, q0, policy, zt, &mut rng, &mut eps_pairs)?;
    }

    // Rates with respect to the h basis.
    let mut f: Vec<Vec<Scalar>> = eps_pairs
        .iter()
        .map(|(e1, e2)| {
            h_basis
                .iter()
                .map(|h| g.inner(&alg.bracket(h, e1), e2))
                .collect()
        })
        .collect();
    // Deterministic plane order: descending rate magnitude.
    let mut order: Vec<usize> = (0..eps_pairs.len()).collect();
    order.sort_by(|&a, &b| {
        vec_max_abs(&f[b])
            .partial_cmp(&vec_max_abs(&f[a]))
            .unwrap()
    });
    let eps_pairs: Vec<_> = order.iter().map(|&i| eps_pairs[i].clone()).collect();
    f = order.iter().map(|&i| f[i].clone()).collect();

    let fs = FlatStructure {
        h_basis,
        z_basis,
        eps_pairs,
        f,
    };
    let verify_zt = if fs.is_exact() && alg.is_exact() && g.is_exact() {
        ZeroTest::Exact
    } else {
        ZeroTest::Tol(1e-8)
    };
    let report = milnor_verify(alg, g, &fs, verify_zt)?;
    if !report.pass() {
        return Err(Error::DegenerateSplitting(format!(
            "computed splitting failed verification on clauses {:?}",
            report.failing()
        )));
    }
    Ok(fs)
}

/// Random nonzero small-integer combination of the given vectors.
fn random_combination(
    rng: &mut ChaCha8Rng,
    basis: &[Vec<Scalar>],
    dim: usize,
) -> Vec<Scalar> {
    loop {
        let coeffs: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(-4..=4)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let mut v = vec![Scalar::zero(); dim];
        for (c, b) in coeffs.iter().zip(basis) {
            if *c == 0 {
                continue;
            }
            let cs = Scalar::int(*c);
            for (slot, x) in v.iter_mut().zip(b) {
                *slot = &*slot + &(&cs * x);
            }
        }
        return v;
    }
}

/// Recursively split an orthonormal family `q` spanning an invariant
/// subspace of the derived algebra into rotation planes.
#[allow(clippy::too_many_arguments)]
fn split_planes(
    alg: &LieAlgebra,
    g: &MetricTensor,
    h_basis: &[Vec<Scalar>],
    q: Vec<Vec<Scalar>>,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<(Vec<Scalar>, Vec<Scalar>)>,
) -> Result<()> {
    let n = alg.dim;
    let k = q.len();
    if k == 0 {
        return Ok(());
    }
    if h_basis.is_empty() {
        return Err(Error::DegenerateSplitting(
            "derived algebra is nonzero but nothing acts on it".into(),
        ));
    }
    for _attempt in 0..SPLIT_RETRY_CAP {
        let u = random_combination(rng, h_basis, n);
        if k == 2 {
            // A single plane: pair the first basis vector with its rotated
            // image. This path preserves exact arithmetic.
            let e1 = q[0].clone();
            let w = alg.bracket(&u, &e1);
            let rate_sq = g.inner(&w, &w);
            if zt.is_zero(&rate_sq) {
                continue; // u happened to act as zero; retry
            }
            let rate = match rate_sq.sqrt_exact() {
                Some(r) => r,
                None => match policy {
                    ArithmeticPolicy::RequireExact => {
                        return Err(Error::ExactnessLost(format!(
                            "plane normalization needs sqrt of {}",
                            rate_sq
                        )))
                    }
                    ArithmeticPolicy::Auto => Scalar::float(rate_sq.to_f64().sqrt()),
                },
            };
            let inv = rate.recip();
            let e2: Vec<Scalar> = w.iter().map(|x| x * &inv).collect();
            out.push((e1, e2));
            return Ok(());
        }
        if policy == ArithmeticPolicy::RequireExact {
            return Err(Error::ExactnessLost(
                "splitting several rotation planes uses a floating-point eigensolver".into(),
            ));
        }
        // Action of u on span(q) in the orthonormal coordinates.
        let mut a = FMat::zeros(k, k);
        for (b, qb) in q.iter().enumerate() {
            let w = alg.bracket(&u, qb);
            for (r, qr) in q.iter().enumerate() {
                a.set(r, b, g.inner(qr, &w).to_f64());
            }
        }
        // S = AᵀA is PSD with plane rates squared as eigenvalues;
        // its eigenspaces are invariant for the whole (commuting) action.
        let s_raw = a.transpose().matmul(&a);
        let s = s_raw.add(&s_raw.transpose()).scale(0.5);
        let (vals, vecs) = symmetric_eigen(&s);
        let scale = vals.last().copied().unwrap_or(0.0).max(1.0);
        let gap_tol = 1e-6 * scale;
        if vals[k - 1] < gap_tol {
            continue; // u acts as (numerical) zero; retry
        }
        // Cluster the eigenvalues.
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        for idx in 1..k {
            if vals[idx] - vals[idx - 1] > gap_tol {
                groups.push(vec![idx]);
            } else {
                groups.last_mut().unwrap().push(idx);
            }
        }
        if groups.len() == 1 {
            // Fully degenerate: u rotates the whole component at one rate.
            // Peel planes (v, [u,v]/rate) greedily; each plane and its
            // complement are invariant because the squared action is scalar.
            let qf: Vec<Vec<Scalar>> = q
                .iter()
                .map(|v| v.iter().map(|x| x.to_float()).collect())
                .collect();
            let mut remaining = qf;
            let gf = g.mat().to_float();
            while remaining.len() >= 2 {
                let e1 = remaining[0].clone();
                let w = alg.bracket(&u, &e1);
                let mut e2: Vec<Scalar> = w.iter().map(|x| x.to_float()).collect();
                // Re-orthogonalize against e1 to absorb rounding.
                let c = dot_g(&e2, &e1, &gf);
                for (slot, t) in e2.iter_mut().zip(&e1) {
                    *slot = &*slot - &(&c * t);
                }
                let norm = dot_g(&e2, &e2, &gf).to_f64().sqrt();
                if norm < 1e-9 {
                    return Err(Error::DegenerateSplitting(
                        "rotated image collapsed during plane peeling".into(),
                    ));
                }
                let inv = Scalar::float(1.0 / norm);
                for slot in e2.iter_mut() {
                    *slot = &*slot * &inv;
                }
                out.push((e1.clone(), e2.clone()));
                // Project the rest off the plane and re-orthonormalize.
                let rest: Vec<Vec<Scalar>> = remaining
                    .iter()
                    .skip(1)
                    .map(|v| {
                        let c1 = dot_g(v, &e1, &gf);
                        let c2 = dot_g(v, &e2, &gf);
                        v.iter()
                            .zip(e1.iter().zip(&e2))
                            .map(|(x, (t1, t2))| &(x - &(&c1 * t1)) - &(&c2 * t2))
                            .collect()
                    })
                    .collect();
                let sub = Subspace::from_spanning(n, &rest, ZeroTest::Tol(1e-9));
                remaining = orthonormalize(
                    sub.basis(),
                    &gf,
                    ArithmeticPolicy::Auto,
                    ZeroTest::Tol(1e-9),
                )?;
            }
            if !remaining.is_empty() {
                return Err(Error::DegenerateSplitting(
                    "odd leftover while peeling rotation planes".into(),
                ));
            }
            return Ok(());
        }
        // Proper split: recurse on each eigenvalue cluster.
        for group in groups {
            let sub_q: Vec<Vec<Scalar>> = group
                .iter()
                .map(|&col| {
                    let mut v = vec![Scalar::zero(); n];
                    for (r, qr) in q.iter().enumerate() {
                        let c = Scalar::float(vecs.at(r, col));
                        for (slot, x) in v.iter_mut().zip(qr) {
                            *slot = &*slot + &(&c * &x.to_float());
                        }
                    }
                    v
                })
                .collect();
            split_planes(alg, g, h_basis, sub_q, policy, zt, rng, out)?;
        }
        return Ok(());
    }
    Err(Error::DegenerateSplitting(format!(
        "no generic rotation found after {} attempts",
        SPLIT_RETRY_CAP
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Scalar {
        Scalar::ratio(1, 2)
    }

    /// [x0, x1] = x2 with a fourth central direction, identity metric.
    fn heis4() -> (LieAlgebra, MetricTensor) {
        let alg = LieAlgebra::from_entries(4, &[(0, 1, 2, Scalar::one())]).unwrap();
        (alg, MetricTensor::identity(4))
    }

    /// Rotation algebra on basis (x, z, e2, e3): [x, e2] = e3, [x, e3] = -e2.
    fn e2r() -> (LieAlgebra, MetricTensor) {
        let alg = LieAlgebra::from_entries(
            4,
            &[(0, 2, 3, Scalar::one()), (0, 3, 2, Scalar::int(-1))],
        )
        .unwrap();
        (alg, MetricTensor::identity(4))
    }

    #[test]
    fn connection_of_central_extension_matches_hand_computation() {
        let (alg, g) = heis4();
        let conn = levi_civita(&alg, &g);
        // nabla_x0 x1 = w/2, nabla_x1 x0 = -w/2, nabla_x0 x2 = -x1/2,
        // nabla_x2 x1 = x0/2.
        assert_eq!(*conn.gamma(2, 0, 1), half());
        assert_eq!(*conn.gamma(2, 1, 0), -half());
        assert_eq!(*conn.gamma(1, 0, 2), -half());
        assert_eq!(*conn.gamma(1, 2, 0), -half());
        assert_eq!(*conn.gamma(0, 1, 2), half());
        assert_eq!(*conn.gamma(0, 2, 1), half());
        // Metric compatibility: <nabla_i x_j, x_k> + <x_j, nabla_i x_k> = 0
        // for the flat-metric pairing with identity g.
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let s = conn.gamma(k, i, j).clone() + conn.gamma(j, i, k).clone();
                    assert!(s.is_zero(), "compatibility failed at {i}{j}{k}");
                }
            }
        }
    }

    #[test]
    fn curvature_of_central_extension_is_the_known_value() {
        let (alg, g) = heis4();
        let conn = levi_civita(&alg, &g);
        let r = riemann_curvature(&alg, &conn);
        let sec = r.sectional_numerator(&g, 0, 1);
        assert_eq!(sec, Scalar::ratio(-3, 4));
        assert!(r.max_abs() > 0.5);
    }

    #[test]
    fn abelian_and_rotation_algebras_are_exactly_flat() {
        let abelian = LieAlgebra::abelian(5);
        let g5 = MetricTensor::identity(5);
        assert!(is_flat(&abelian, &g5, ZeroTest::Exact));
        let (alg, g) = e2r();
        let conn = levi_civita(&alg, &g);
        let r = riemann_curvature(&alg, &conn);
        assert!(r.is_zero());
    }

    #[test]
    fn decompose_rotation_algebra_exactly() {
        let (alg, g) = e2r();
        let fs = milnor_decompose(&alg, &g, ArithmeticPolicy::RequireExact, ZeroTest::Exact, 7)
            .unwrap();
        assert!(fs.is_exact());
        assert_eq!(fs.h_basis.len(), 1);
        assert_eq!(fs.z_basis.len(), 1);
        assert_eq!(fs.eps_pairs.len(), 1);
        let report = milnor_verify(&alg, &g, &fs, ZeroTest::Exact).unwrap();
        assert!(report.pass(), "failing: {:?}", report.failing());
        // The recovered rate is ±1 on the (normalized) complement vector.
        let rate = fs.f[0][0].to_f64().abs();
        let hnorm = g.inner(&fs.h_basis[0], &fs.h_basis[0]).to_f64().sqrt();
        assert!((rate / hnorm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_rejects_curved_input() {
        let (alg, g) = heis4();
        match milnor_decompose(&alg, &g, ArithmeticPolicy::Auto, ZeroTest::Exact, 1) {
            Err(Error::NotFlat { defect }) => assert!(defect > 0.5),
            other => panic!("expected NotFlat, got {:?}", other),
        }
    }

    #[test]
    fn verify_rejects_wrong_rate_sign() {
        let (alg, g) = e2r();
        let mut fs =
            milnor_decompose(&alg, &g, ArithmeticPolicy::Auto, ZeroTest::Exact, 3).unwrap();
        fs.f[0][0] = -&fs.f[0][0];
        let report = milnor_verify(&alg, &g, &fs, ZeroTest::Exact).unwrap();
        assert!(!report.pass());
        assert!(report.failing().contains(&"rotation_block_form"));
    }

    /// Resonant rates with a bracket between the planes: every clause of the
    /// rotation-block form except `derived_abelian` holds, yet the metric
    /// curves. This pins down why that clause is part of the check.
    #[test]
    fn resonant_inter_plane_bracket_is_caught_by_derived_abelian() {
        // Basis: u, a1, b1, a2, b2, a3, b3 with rates 1, 2, 3 and
        // [a1,a2]=a3/2, [b1,b2]=-a3/2, [a1,b2]=b3/2, [b1,a2]=b3/2.
        let one = Scalar::one;
        let entries = vec![
            (0usize, 1usize, 2usize, one()),
            (0, 2, 1, -one()),
            (0, 3, 4, Scalar::int(2)),
            (0, 4, 3, Scalar::int(-2)),
            (0, 5, 6, Scalar::int(3)),
            (0, 6, 5, Scalar::int(-3)),
            (1, 3, 5, half()),
            (2, 4, 5, -half()),
            (1, 4, 6, half()),
            (2, 3, 6, half()),
        ];
        let alg = LieAlgebra::from_entries(7, &entries).unwrap();
        assert_eq!(alg.jacobi_defect(), 0.0, "the resonant table must be a Lie algebra");
        let g = MetricTensor::identity(7);
        let ei = |i: usize| basis_vector(7, i);
        let fs = FlatStructure {
            h_basis: vec![ei(0)],
            z_basis: vec![],
            eps_pairs: vec![(ei(1), ei(2)), (ei(3), ei(4)), (ei(5), ei(6))],
            f: vec![
                vec![one()],
                vec![Scalar::int(2)],
                vec![Scalar::int(3)],
            ],
        };
        let report = milnor_verify(&alg, &g, &fs, ZeroTest::Exact).unwrap();
        assert!(!report.pass());
        let failing = report.failing();
        assert_eq!(failing, vec!["derived_abelian"]);
        assert!(
            flatness_defect(&alg, &g) > 0.1,
            "the resonant example must actually curve"
        );
    }

    #[test]
    fn decompose_splits_two_planes_with_distinct_rates() {
        // u acting on two planes at rates 1 and 2, plus nothing central.
        let one = Scalar::one;
        let alg = LieAlgebra::from_entries(
            5,
            &[
                (0, 1, 2, one()),
                (0, 2, 1, -one()),
                (0, 3, 4, Scalar::int(2)),
                (0, 4, 3, Scalar::int(-2)),
            ],
        )
        .unwrap();
        let g = MetricTensor::identity(5);
        assert!(is_flat(&alg, &g, ZeroTest::Exact));
        let fs =
            milnor_decompose(&alg, &g, ArithmeticPolicy::Auto, ZeroTest::Exact, 11).unwrap();
        assert_eq!(fs.eps_pairs.len(), 2);
        assert_eq!(fs.z_basis.len(), 0);
        let verify_zt = ZeroTest::Tol(1e-8);
        let report = milnor_verify(&alg, &g, &fs, verify_zt).unwrap();
        assert!(report.pass(), "failing: {:?}", report.failing());
        // Rates 2 and 1 in descending order (h vector is x0 exactly).
        let rates: Vec<f64> = fs.f.iter().map(|r| r[0].to_f64().abs()).collect();
        assert!((rates[0] - 2.0).abs() < 1e-8);
        assert!((rates[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn decompose_handles_equal_rates_by_peeling() {
        // Two planes at the same rate: the eigen-split degenerates and the
        // peeling path must produce a valid splitting.
        let one = Scalar::one;
        let alg = LieAlgebra::from_entries(
            5,
            &[
                (0, 1, 2, one()),
                (0, 2, 1, -one()),
                (0, 3, 4, one()),
                (0, 4, 3, -one()),
            ],
        )
        .unwrap();
        let g = MetricTensor::identity(5);
        let fs =
            milnor_decompose(&alg, &g, ArithmeticPolicy::Auto, ZeroTest::Exact, 19).unwrap();
        assert_eq!(fs.eps_pairs.len(), 2);
        let report = milnor_verify(&alg, &g, &fs, ZeroTest::Tol(1e-8)).unwrap();
        assert!(report.pass(), "failing: {:?}", report.failing());
    }
}
