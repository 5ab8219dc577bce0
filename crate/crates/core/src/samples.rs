//! Named example structures and randomized sample machinery: realified
//! complex Lie algebras, hyperbolic blocks, rotation algebras, negative
//! controls, exact orthogonal/unipotent changes of basis, and random
//! Hermitian instances for large-scale checks.

use crate::error::Result;
use crate::generators::{build_kaehler_flat, random_kaehler_flat_spec};
use crate::lie::{AlmostComplexStructure, LieAlgebra, MetricTensor};
use crate::mat::{RMat, ZeroTest};
use crate::scalar::{ComplexScalar, Scalar};
use rand::Rng;

/// The rotation algebra `[x, ε₁] = ε₂`, `[x, ε₂] = −ε₁` on basis
/// `(x, z, ε₁, ε₂)`, identity metric, with the Kähler complex structure
/// pairing `x ↔ z` and `ε₁ ↔ ε₂`.
pub fn e2r() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let alg = LieAlgebra::from_entries(
        4,
        &[(0, 2, 3, Scalar::one()), (0, 3, 2, Scalar::int(-1))],
    )
    .unwrap();
    let mut jm = RMat::zeros(4, 4);
    j_pair(&mut jm, 0, 1);
    j_pair(&mut jm, 2, 3);
    (alg, MetricTensor::identity(4), AlmostComplexStructure::new(jm))
}

/// The rotation algebra with an orthogonal complex structure pairing
/// `x ↔ ε₁` and `z ↔ ε₂` instead: not integrable, with Nijenhuis defect
/// exactly 1.
pub fn e2r_bad_j() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let (alg, g, _) = e2r();
    let mut jm = RMat::zeros(4, 4);
    j_pair(&mut jm, 0, 2);
    j_pair(&mut jm, 1, 3);
    (alg, g, AlmostComplexStructure::new(jm))
}

/// Central extension `[x₀, x₁] = x₂` with a fourth direction, identity
/// metric, standard complex structure: integrable, compatible, and not
/// Kähler.
pub fn heis4() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let alg = LieAlgebra::from_entries(4, &[(0, 1, 2, Scalar::one())]).unwrap();
    (
        alg,
        MetricTensor::identity(4),
        AlmostComplexStructure::standard(4),
    )
}

/// Abelian algebra with identity metric.
pub fn abelian(dim: usize) -> (LieAlgebra, MetricTensor) {
    (LieAlgebra::abelian(dim), MetricTensor::identity(dim))
}

/// An 8-dimensional Kähler flat spec: one J-pair in the complement, one
/// J-pair in the center, two planes at rates 1 and 2.
pub fn kf8_spec() -> crate::generators::KahlerFlatSpec {
    crate::generators::KahlerFlatSpec {
        p: 2,
        q: 1,
        m: 0,
        t: 1,
        f: vec![
            vec![Scalar::one(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::int(2)],
        ],
    }
}

fn j_pair(jm: &mut RMat, a: usize, b: usize) {
    jm[(b, a)] = Scalar::one();
    jm[(a, b)] = Scalar::int(-1);
}

/// Realify a complex Lie algebra given by entries `[w_i, w_j] = v·w_k`
/// (`i < j`): real basis `x_0, y_0, …` with `y_k = J x_k`, bracket extended
/// so that multiplication by `i` becomes `J`. The returned structure is
/// automatically integrable and bi-invariant (`D ≡ 0` in any holomorphic
/// frame built from it).
pub fn realify(
    cdim: usize,
    entries: &[(usize, usize, usize, ComplexScalar)],
) -> (LieAlgebra, AlmostComplexStructure) {
    let dim = 2 * cdim;
    let mut real_entries: Vec<(usize, usize, usize, Scalar)> = Vec::new();
    let mut push = |i: usize, j: usize, k: usize, v: Scalar| {
        if !v.is_zero() {
            real_entries.push((i, j, k, v));
        }
    };
    for &(i, j, k, ref v) in entries {
        let (a, b) = (v.re.clone(), v.im.clone());
        let (xi, yi, xj, yj, xk, yk) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        // [x_i, x_j] = a x_k + b y_k
        push(xi, xj, xk, a.clone());
        push(xi, xj, yk, b.clone());
        // [x_i, y_j] = -b x_k + a y_k
        push(xi, yj, xk, -&b);
        push(xi, yj, yk, a.clone());
        // [y_i, x_j] = -b x_k + a y_k
        push(yi, xj, xk, -&b);
        push(yi, xj, yk, a.clone());
        // [y_i, y_j] = -a x_k - b y_k
        push(yi, yj, xk, -&a);
        push(yi, yj, yk, -&b);
    }
    let alg = LieAlgebra::from_entries(dim, &real_entries).unwrap();
    let mut jm = RMat::zeros(dim, dim);
    for k in 0..cdim {
        j_pair(&mut jm, 2 * k, 2 * k + 1);
    }
    (alg, AlmostComplexStructure::new(jm))
}

/// Realified complex Heisenberg algebra `[w₁, w₂] = w₃` (real dimension 6):
/// 2-step nilpotent, integrable, never Kähler for the identity metric.
pub fn complex_heisenberg6() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let (alg, j) = realify(3, &[(0, 1, 2, ComplexScalar::one())]);
    (alg, MetricTensor::identity(6), j)
}

/// Realified complex filiform algebra `[w₁, w₂] = w₃`, `[w₁, w₃] = w₄`
/// (real dimension 8): 3-step nilpotent but with abelian derived algebra.
pub fn complex_filiform8() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let (alg, j) = realify(
        4,
        &[
            (0, 1, 2, ComplexScalar::one()),
            (0, 2, 3, ComplexScalar::one()),
        ],
    );
    (alg, MetricTensor::identity(8), j)
}

/// Realified `sl(2, ℂ)` (real dimension 6): semisimple, hence not
/// solvable at all.
pub fn realified_sl2c() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let two = ComplexScalar::from_real(Scalar::int(2));
    // basis (h, e, f): [h,e] = 2e, [h,f] = -2f, [e,f] = h.
    let (alg, j) = realify(
        3,
        &[
            (0, 1, 1, two.clone()),
            (0, 2, 2, -&two),
            (1, 2, 0, ComplexScalar::one()),
        ],
    );
    (alg, MetricTensor::identity(6), j)
}

/// Realified complex affine algebra `[w₁, w₂] = λ w₂` (real dimension 4):
/// 2-step solvable, integrable, and not Kähler for the identity metric
/// when `λ ≠ 0`.
pub fn complex_diag4(lambda: Scalar) -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let (alg, j) = realify(2, &[(0, 1, 1, ComplexScalar::from_real(lambda))]);
    (alg, MetricTensor::identity(4), j)
}

/// Direct sum of hyperbolic blocks `[x_i, u_i] = λ_i u_i` with `J x_i = u_i`
/// on basis `(x_0, u_0, x_1, u_1, …)`: integrable, 2-step solvable, and
/// Kähler for the identity metric.
pub fn hyperbolic_pairs(rates: &[Scalar]) -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let dim = 2 * rates.len();
    let mut entries = Vec::new();
    for (i, r) in rates.iter().enumerate() {
        if !r.is_zero() {
            entries.push((2 * i, 2 * i + 1, 2 * i + 1, r.clone()));
        }
    }
    let alg = LieAlgebra::from_entries(dim, &entries).unwrap();
    let mut jm = RMat::zeros(dim, dim);
    for i in 0..rates.len() {
        j_pair(&mut jm, 2 * i, 2 * i + 1);
    }
    (
        alg,
        MetricTensor::identity(dim),
        AlmostComplexStructure::new(jm),
    )
}

/// One hyperbolic block plus two abelian J-pairs (real dimension 6): the
/// derived algebra meets its J-image trivially yet the structure is
/// Kähler.
pub fn axb6() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let alg = LieAlgebra::from_entries(6, &[(0, 1, 1, Scalar::one())]).unwrap();
    let mut jm = RMat::zeros(6, 6);
    j_pair(&mut jm, 0, 1);
    j_pair(&mut jm, 2, 3);
    j_pair(&mut jm, 4, 5);
    (
        alg,
        MetricTensor::identity(6),
        AlmostComplexStructure::new(jm),
    )
}

/// Exact-rational rotation pairs `(cos, sin)` on Pythagorean triples.
const PYTHAGOREAN: [(i64, i64, i64); 6] = [
    (3, 4, 5),
    (5, 12, 13),
    (8, 15, 17),
    (7, 24, 25),
    (20, 21, 29),
    (9, 40, 41),
];

/// Random exact orthogonal matrix: a signed permutation composed with
/// `2·dim` exact rational Givens rotations.
pub fn random_orthogonal<R: Rng>(rng: &mut R, dim: usize) -> RMat {
    let mut p = RMat::zeros(dim, dim);
    // Signed permutation.
    let mut perm: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    for (row, &col) in perm.iter().enumerate() {
        p[(row, col)] = if rng.gen_bool(0.5) {
            Scalar::one()
        } else {
            Scalar::int(-1)
        };
    }
    if dim < 2 {
        return p;
    }
    for _ in 0..(2 * dim) {
        let a = rng.gen_range(0..dim);
        let b = loop {
            let b = rng.gen_range(0..dim);
            if b != a {
                break b;
            }
        };
        let (x, y, h) = PYTHAGOREAN[rng.gen_range(0..PYTHAGOREAN.len())];
        let c = Scalar::ratio(x, h);
        let s = if rng.gen_bool(0.5) {
            Scalar::ratio(y, h)
        } else {
            Scalar::ratio(-y, h)
        };
        let mut giv = RMat::identity(dim);
        giv[(a, a)] = c.clone();
        giv[(b, b)] = c;
        giv[(a, b)] = -&s;
        giv[(b, a)] = s;
        p = p.matmul(&giv);
    }
    p
}

/// Random unipotent integer matrix: identity plus strictly upper
/// triangular entries in `-2..=2`.
pub fn random_unipotent<R: Rng>(rng: &mut R, dim: usize) -> RMat {
    let mut p = RMat::identity(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = rng.gen_range(-2i64..=2);
            if v != 0 {
                p[(i, j)] = Scalar::int(v);
            }
        }
    }
    p
}

/// Change of basis by an invertible matrix `P` whose columns are the new
/// basis vectors: transforms the bracket table, the metric
/// (`g ↦ PᵀgP`) and optionally a complex structure (`J ↦ P⁻¹JP`).
pub fn conjugate(
    alg: &LieAlgebra,
    g: &MetricTensor,
    j: Option<&AlmostComplexStructure>,
    p: &RMat,
) -> Result<(LieAlgebra, MetricTensor, Option<AlmostComplexStructure>)> {
    let dim = alg.dim;
    let zt = if p.is_exact() {
        ZeroTest::Exact
    } else {
        ZeroTest::Tol(1e-12)
    };
    let pinv = p
        .inverse(zt)
        .ok_or_else(|| crate::error::Error::InvalidInput("basis change is singular".into()))?;
    let mut entries = Vec::new();
    for i in 0..dim {
        let ci = p.col_vec(i);
        for jcol in (i + 1)..dim {
            let cj = p.col_vec(jcol);
            let br = alg.bracket(&ci, &cj);
            let coords = pinv.mul_vec(&br);
            for (k, v) in coords.into_iter().enumerate() {
                if !v.is_zero() {
                    entries.push((i, jcol, k, v));
                }
            }
        }
    }
    let new_alg = LieAlgebra::from_entries(dim, &entries)?;
    let new_g = MetricTensor::new(p.transpose().matmul(g.mat()).matmul(p), zt)?;
    let new_j = match j {
        Some(acs) => Some(AlmostComplexStructure::new(
            pinv.matmul(&acs.mat).matmul(p),
        )),
        None => None,
    };
    Ok((new_alg, new_g, new_j))
}

/// Random metric compatible with `J` by construction:
/// `g = AᵀA + JᵀAᵀAJ` for a random invertible `A`.
pub fn random_compatible_metric<R: Rng>(
    rng: &mut R,
    j: &AlmostComplexStructure,
    exact: bool,
) -> MetricTensor {
    let dim = j.dim();
    loop {
        let mut a = RMat::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                if exact {
                    let num = rng.gen_range(-2i64..=2);
                    if num != 0 {
                        a[(r, c)] = Scalar::ratio(num, rng.gen_range(1..=2));
                    }
                } else {
                    // Diagonally dominant, so the metric stays well
                    // conditioned.
                    let base = if r == c { 1.0 } else { 0.0 };
                    a[(r, c)] = Scalar::float(base + rng.gen_range(-0.3..0.3));
                }
            }
        }
        let zt = if exact {
            ZeroTest::Exact
        } else {
            ZeroTest::Tol(1e-10)
        };
        if a.rank(zt) != dim {
            continue;
        }
        let ata = a.transpose().matmul(&a);
        let jt_ata_j = j.mat.transpose().matmul(&ata).matmul(&j.mat);
        if let Ok(g) = MetricTensor::new(ata.add_mat(&jt_ata_j), zt) {
            return g;
        }
    }
}

fn base_hermitian_family<R: Rng>(
    rng: &mut R,
    idx: usize,
    max_dim: usize,
) -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    match idx {
        0 => complex_heisenberg6(),
        1 if max_dim >= 8 => complex_filiform8(),
        2 => realified_sl2c(),
        3 => {
            let lam = Scalar::ratio(rng.gen_range(1..=3), rng.gen_range(1..=2));
            complex_diag4(lam)
        }
        4 => {
            let k = rng.gen_range(1..=(max_dim / 2).min(4));
            let rates: Vec<Scalar> = (0..k)
                .map(|_| {
                    let n = loop {
                        let n = rng.gen_range(-3i64..=3);
                        if n != 0 {
                            break n;
                        }
                    };
                    Scalar::int(n)
                })
                .collect();
            hyperbolic_pairs(&rates)
        }
        5 => {
            let spec = random_kaehler_flat_spec(rng, max_dim.min(8));
            let (alg, g, j, _) = build_kaehler_flat(&spec).unwrap();
            (alg, g, j)
        }
        6 => axb6(),
        _ => {
            let half = rng.gen_range(2..=max_dim / 2);
            let (alg, g) = abelian(2 * half);
            (alg, g, AlmostComplexStructure::standard(2 * half))
        }
    }
}

fn decorate_sample<R: Rng>(
    rng: &mut R,
    base: (LieAlgebra, MetricTensor, AlmostComplexStructure),
    exact: bool,
) -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    let (mut alg, mut g, mut j) = base;
    if rng.gen_bool(0.6) {
        let p = random_orthogonal(rng, alg.dim);
        let (a2, g2, j2) = conjugate(&alg, &g, Some(&j), &p).unwrap();
        alg = a2;
        g = g2;
        j = j2.unwrap();
    }
    if rng.gen_bool(0.5) {
        g = random_compatible_metric(rng, &j, exact);
    }
    if !exact {
        alg = alg.to_float();
        g = g.to_float();
        j = j.to_float();
    }
    (alg, g, j)
}

/// Random Hermitian structure (integrable, compatible) of mixed
/// solvability class, optionally degraded to floating point.
pub fn random_hermitian_sample<R: Rng>(
    rng: &mut R,
    max_dim: usize,
    exact: bool,
) -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    assert!(max_dim >= 6);
    let idx = rng.gen_range(0..8usize);
    let base = base_hermitian_family(rng, idx, max_dim);
    decorate_sample(rng, base, exact)
}

/// Random Hermitian structure on an algebra whose derived algebra is
/// abelian.
pub fn random_two_step_hermitian_sample<R: Rng>(
    rng: &mut R,
    max_dim: usize,
    exact: bool,
) -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
    assert!(max_dim >= 6);
    let idx = [0usize, 1, 3, 4, 5, 6, 7][rng.gen_range(0..7)];
    let base = base_hermitian_family(rng, idx, max_dim);
    decorate_sample(rng, base, exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{
        admissible_frame, chern_connection_torsion, chern_torsion, decompose, kaehler_defect,
    };
    use crate::lie::{compatibility_defect, integrability_defect};
    use crate::riemannian::flatness_defect;
    use crate::scalar::ArithmeticPolicy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn named_structures_are_integrable_and_compatible() {
        let fixtures: Vec<(&str, LieAlgebra, MetricTensor, AlmostComplexStructure)> = vec![
            ("e2r", e2r().0, e2r().1, e2r().2),
            ("heis4", heis4().0, heis4().1, heis4().2),
            (
                "heis6",
                complex_heisenberg6().0,
                complex_heisenberg6().1,
                complex_heisenberg6().2,
            ),
            (
                "filiform8",
                complex_filiform8().0,
                complex_filiform8().1,
                complex_filiform8().2,
            ),
            (
                "sl2c",
                realified_sl2c().0,
                realified_sl2c().1,
                realified_sl2c().2,
            ),
            (
                "diag4",
                complex_diag4(Scalar::int(2)).0,
                complex_diag4(Scalar::int(2)).1,
                complex_diag4(Scalar::int(2)).2,
            ),
            ("axb6", axb6().0, axb6().1, axb6().2),
        ];
        for (name, alg, g, j) in &fixtures {
            assert_eq!(alg.jacobi_defect(), 0.0, "{name}: bracket table");
            assert_eq!(
                integrability_defect(alg, j, ZeroTest::Exact).unwrap(),
                0.0,
                "{name}: integrability"
            );
            assert_eq!(compatibility_defect(g, j), 0.0, "{name}: compatibility");
        }
    }

    #[test]
    fn twisted_rotation_structure_has_unit_nijenhuis_defect() {
        let (alg, _, j) = e2r_bad_j();
        assert_eq!(integrability_defect(&alg, &j, ZeroTest::Exact).unwrap(), 1.0);
    }

    #[test]
    fn realified_affine_torsion_is_frozen() {
        let lam = Scalar::int(2);
        let (alg, g, j) = complex_diag4(lam);
        let (frame, layout) = admissible_frame(
            &alg,
            &g,
            &j,
            ArithmeticPolicy::RequireExact,
            ZeroTest::Exact,
        )
        .unwrap();
        assert_eq!((layout.r, layout.s, layout.n), (1, 1, 2));
        let t = chern_torsion(&frame);
        // T^0_{10} = -sqrt(2)*lambda in the (derived-first) admissible order.
        let want = ComplexScalar::from_real(&Scalar::sqrt2() * &Scalar::int(-2));
        assert_eq!(*t.at(0, 1, 0), want);
        assert!(kaehler_defect(&frame) > 2.0);
    }

    #[test]
    fn hyperbolic_and_mixed_blocks_are_kaehler() {
        for (alg, g, j) in [
            hyperbolic_pairs(&[Scalar::one(), Scalar::int(-2)]),
            axb6(),
        ] {
            let (frame, _) = admissible_frame(
                &alg,
                &g,
                &j,
                ArithmeticPolicy::RequireExact,
                ZeroTest::Exact,
            )
            .unwrap();
            assert_eq!(kaehler_defect(&frame), 0.0);
        }
        let (alg, g, j) = axb6();
        let dec = decompose(&alg, &g, &j, ZeroTest::Exact).unwrap();
        assert_eq!((dec.r, dec.s, dec.n), (0, 1, 3));
        assert_eq!(dec.w.dim(), 4);
    }

    #[test]
    fn semisimple_sample_is_not_two_step_solvable() {
        let (alg, _, _) = realified_sl2c();
        assert!(!alg.is_two_step_solvable(ZeroTest::Exact));
        let (alg, _, _) = complex_filiform8();
        assert!(alg.is_two_step_solvable(ZeroTest::Exact));
    }

    #[test]
    fn orthogonal_conjugation_preserves_flatness_and_torsion_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (alg, g, j) = e2r();
        for _ in 0..5 {
            let p = random_orthogonal(&mut rng, 4);
            let (a2, g2, j2) = conjugate(&alg, &g, Some(&j), &p).unwrap();
            let j2 = j2.unwrap();
            // The table, metric and J stay exact under an exact basis change.
            assert_eq!(a2.jacobi_defect(), 0.0);
            assert_eq!(flatness_defect(&a2, &g2), 0.0);
            assert_eq!(integrability_defect(&a2, &j2, ZeroTest::Exact).unwrap(), 0.0);
            // Frame normalization may leave the exact field, so the frame
            // route gets a tolerance.
            let (frame, _) = admissible_frame(
                &a2,
                &g2,
                &j2,
                ArithmeticPolicy::Auto,
                ZeroTest::Tol(1e-10),
            )
            .unwrap();
            let defect = kaehler_defect(&frame);
            assert!(defect < 1e-12, "torsion after basis change: {defect}");
        }
    }

    #[test]
    fn unipotent_conjugation_exercises_nonidentity_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (alg, g, j) = heis4();
        let p = loop {
            let p = random_unipotent(&mut rng, 4);
            if crate::mat::max_diff(&p, &RMat::identity(4)) > 0.0 {
                break p;
            }
        };
        let (a2, g2, j2) = conjugate(&alg, &g, Some(&j), &p).unwrap();
        let j2 = j2.unwrap();
        assert!(crate::mat::max_diff(g2.mat(), MetricTensor::identity(4).mat()) > 0.0);
        let (frame, _) = admissible_frame(
            &a2,
            &g2,
            &j2,
            ArithmeticPolicy::Auto,
            ZeroTest::Exact,
        )
        .unwrap();
        let t1 = chern_torsion(&frame);
        let (t2, consistency) = chern_connection_torsion(&frame, ZeroTest::Exact).unwrap();
        assert_eq!(consistency, 0.0);
        assert_eq!(t1.max_diff(&t2), 0.0);
        assert!(t1.max_abs() > 1e-6, "still not Kähler after a basis change");
    }

    #[test]
    fn random_hermitian_samples_are_valid_and_route_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let exact = trial % 2 == 0;
            let (alg, g, j) = random_hermitian_sample(&mut rng, 8, exact);
            // Frame normalization can degrade exact input to floats, so the
            // frame pipeline always runs with a tolerance here.
            let zt = ZeroTest::Tol(1e-9);
            let defect = integrability_defect(&alg, &j, zt).unwrap();
            assert!(defect < 1e-9, "trial {trial}: integrability {defect}");
            let (frame, _) =
                admissible_frame(&alg, &g, &j, ArithmeticPolicy::Auto, zt).unwrap();
            let t1 = chern_torsion(&frame);
            let (t2, _) = chern_connection_torsion(&frame, zt).unwrap();
            let diff = t1.max_diff(&t2);
            if exact && frame.is_exact() {
                assert_eq!(diff, 0.0, "trial {trial}");
            } else {
                assert!(diff < 1e-10, "trial {trial}: routes differ by {diff}");
            }
        }
    }

    #[test]
    fn two_step_samples_satisfy_the_structure_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..12 {
            let exact = trial % 2 == 0;
            let (alg, g, j) = random_two_step_hermitian_sample(&mut rng, 8, exact);
            let zt = ZeroTest::Tol(1e-9);
            assert!(alg.is_two_step_solvable(zt));
            let defect = crate::hermitian::two_step_constraint_check(
                &alg,
                &g,
                &j,
                ArithmeticPolicy::Auto,
                zt,
            )
            .unwrap();
            assert!(defect < 1e-9, "trial {trial}: constraint defect {defect}");
        }
    }
}
