//! Generators for guaranteed-flat metric Lie algebras and guaranteed-Kähler
//! flat Hermitian structures, driven by small parameter specs. Every
//! generated instance uses the identity metric on a basis ordered so the
//! rotation-block structure is visible by construction.

use crate::error::{Error, Result};
use crate::lie::{AlmostComplexStructure, LieAlgebra, MetricTensor};
use crate::mat::{RMat, ZeroTest};
use crate::riemannian::FlatStructure;
use crate::scalar::Scalar;
use rand::Rng;

/// Parameters for a flat metric Lie algebra: an abelian complement of
/// dimension `dim_h` rotating `p` orthogonal planes at the rates in the
/// `p × dim_h` matrix `f`, plus `dim_z` central directions. The basis is
/// ordered complement, center, then plane pairs; the metric is the
/// identity.
#[derive(Clone, Debug)]
pub struct FlatSpec {
    pub p: usize,
    pub dim_h: usize,
    pub dim_z: usize,
    pub f: Vec<Vec<Scalar>>,
}

/// Parameters for a Kähler flat Hermitian structure. The complement splits
/// into `q` J-invariant pairs and `m` directions paired by `J` with `m`
/// central directions; the center additionally holds `t` J-invariant
/// pairs; `p` rotation planes are J-invariant with `J` acting as the
/// positive quarter turn. `f` is `p × (2q + m)`.
#[derive(Clone, Debug)]
pub struct KahlerFlatSpec {
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub t: usize,
    pub f: Vec<Vec<Scalar>>,
}

fn validate_rates(p: usize, dim_h: usize, f: &[Vec<Scalar>]) -> Result<()> {
    if f.len() != p {
        return Err(Error::SpecInvalid(format!(
            "rate matrix has {} rows, expected {}",
            f.len(),
            p
        )));
    }
    for (i, row) in f.iter().enumerate() {
        if row.len() != dim_h {
            return Err(Error::SpecInvalid(format!(
                "rate row {} has {} entries, expected {}",
                i,
                row.len(),
                dim_h
            )));
        }
    }
    if p > 0 && dim_h == 0 {
        return Err(Error::SpecInvalid(
            "planes without any rotating direction would be flat only if absent".into(),
        ));
    }
    for (i, row) in f.iter().enumerate() {
        if row.iter().all(|x| x.is_zero()) {
            return Err(Error::SpecInvalid(format!(
                "rate row {} is zero: plane {} would not rotate",
                i, i
            )));
        }
    }
    if dim_h > 0 {
        let fm = RMat::from_rows(f.to_vec());
        let exact = fm.is_exact();
        let zt = if exact {
            ZeroTest::Exact
        } else {
            ZeroTest::Tol(1e-12)
        };
        if fm.rank(zt) != dim_h {
            return Err(Error::SpecInvalid(
                "rate matrix must have full column rank: the rotation rates of \
                 independent directions must be independent"
                    .into(),
            ));
        }
    }
    Ok(())
}

/// Build the flat algebra described by `spec`, together with its identity
/// metric and the rotation-block structure realized on the standard basis.
pub fn build_flat(spec: &FlatSpec) -> Result<(LieAlgebra, MetricTensor, FlatStructure)> {
    validate_rates(spec.p, spec.dim_h, &spec.f)?;
    let dim = spec.dim_h + spec.dim_z + 2 * spec.p;
    if dim == 0 {
        return Err(Error::SpecInvalid("empty algebra".into()));
    }
    let eps0 = spec.dim_h + spec.dim_z;
    let mut entries = Vec::new();
    for i in 0..spec.p {
        for j in 0..spec.dim_h {
            let rate = &spec.f[i][j];
            if rate.is_zero() {
                continue;
            }
            entries.push((j, eps0 + 2 * i, eps0 + 2 * i + 1, rate.clone()));
            entries.push((j, eps0 + 2 * i + 1, eps0 + 2 * i, -rate));
        }
    }
    let alg = LieAlgebra::from_entries(dim, &entries)?;
    debug_assert_eq!(alg.jacobi_defect(), 0.0);
    let g = MetricTensor::identity(dim);
    let basis = |i: usize| crate::lie::basis_vector(dim, i);
    let fs = FlatStructure {
        h_basis: (0..spec.dim_h).map(basis).collect(),
        z_basis: (spec.dim_h..spec.dim_h + spec.dim_z).map(basis).collect(),
        eps_pairs: (0..spec.p)
            .map(|i| (basis(eps0 + 2 * i), basis(eps0 + 2 * i + 1)))
            .collect(),
        f: spec.f.clone(),
    };
    Ok((alg, g, fs))
}

/// Build the Kähler flat Hermitian structure described by `spec`:
/// the flat algebra on basis order (complement pairs, `a_i`, central
/// pairs, `b_i = J a_i`, plane pairs) with the orthogonal complex
/// structure described by [`KahlerFlatSpec`].
pub fn build_kaehler_flat(
    spec: &KahlerFlatSpec,
) -> Result<(
    LieAlgebra,
    MetricTensor,
    AlmostComplexStructure,
    FlatStructure,
)> {
    let dim_h = 2 * spec.q + spec.m;
    let dim_z = 2 * spec.t + spec.m;
    let flat = FlatSpec {
        p: spec.p,
        dim_h,
        dim_z,
        f: spec.f.clone(),
    };
    let (alg, g, fs) = build_flat(&flat)?;
    let dim = alg.dim;
    let mut jm = RMat::zeros(dim, dim);
    let pair = |a: usize, b: usize, jm: &mut RMat| {
        // J a = b, J b = -a.
        jm[(b, a)] = Scalar::one();
        jm[(a, b)] = Scalar::int(-1);
    };
    for i in 0..spec.q {
        pair(2 * i, 2 * i + 1, &mut jm);
    }
    let zoff = 2 * spec.q + spec.m;
    for i in 0..spec.t {
        pair(zoff + 2 * i, zoff + 2 * i + 1, &mut jm);
    }
    let boff = zoff + 2 * spec.t;
    for i in 0..spec.m {
        pair(2 * spec.q + i, boff + i, &mut jm);
    }
    let eoff = boff + spec.m;
    for i in 0..spec.p {
        pair(eoff + 2 * i, eoff + 2 * i + 1, &mut jm);
    }
    let j = AlmostComplexStructure::new(jm);
    debug_assert_eq!(j.square_defect(), 0.0);
    Ok((alg, g, j, fs))
}

fn small_rate<R: Rng>(rng: &mut R) -> Scalar {
    let num = loop {
        let n = rng.gen_range(-4i64..=4);
        if n != 0 {
            break n;
        }
    };
    let den = if rng.gen_bool(0.25) { 2 } else { 1 };
    Scalar::ratio(num, den)
}

fn random_rate_matrix<R: Rng>(rng: &mut R, p: usize, dim_h: usize) -> Vec<Vec<Scalar>> {
    loop {
        let mut f = vec![vec![Scalar::zero(); dim_h]; p];
        // A guaranteed full-column-rank core: row i gets a nonzero pivot in
        // column i for i < dim_h, plus random noise elsewhere.
        for (i, row) in f.iter_mut().enumerate() {
            for (jc, slot) in row.iter_mut().enumerate() {
                if i < dim_h && jc == i {
                    *slot = small_rate(rng);
                } else if rng.gen_bool(0.4) {
                    *slot = small_rate(rng);
                }
            }
        }
        if validate_rates(p, dim_h, &f).is_ok() {
            return f;
        }
    }
}

/// Draw a random valid flat spec of total dimension at most `max_dim`
/// (and at least 2).
pub fn random_flat_spec<R: Rng>(rng: &mut R, max_dim: usize) -> FlatSpec {
    assert!(max_dim >= 4, "need room for at least one rotating plane");
    loop {
        let dim_h = rng.gen_range(1..=2usize);
        let p = rng.gen_range(dim_h..=dim_h + 2);
        let dim_z = rng.gen_range(0..=2usize);
        let dim = dim_h + dim_z + 2 * p;
        if dim < 2 || dim > max_dim {
            continue;
        }
        let f = random_rate_matrix(rng, p, dim_h);
        return FlatSpec { p, dim_h, dim_z, f };
    }
}

/// Draw a random valid Kähler flat spec of total real dimension at most
/// `max_dim`.
pub fn random_kaehler_flat_spec<R: Rng>(rng: &mut R, max_dim: usize) -> KahlerFlatSpec {
    assert!(max_dim >= 4, "need room for at least one rotating plane");
    loop {
        let q = rng.gen_range(0..=1usize);
        let m = rng.gen_range(0..=1usize);
        let dim_h = 2 * q + m;
        if dim_h == 0 {
            continue;
        }
        let t = rng.gen_range(0..=1usize);
        let p = rng.gen_range(dim_h..=dim_h + 1);
        let dim = 2 * q + 2 * m + 2 * t + 2 * p;
        if dim > max_dim {
            continue;
        }
        let f = random_rate_matrix(rng, p, dim_h);
        return KahlerFlatSpec { p, q, m, t, f };
    }
}
