//! Complex frames on the (1,0)-part of a complexified Lie algebra with a
//! compatible complex structure, and the identities their structure
//! constants must satisfy.
//!
//! Conventions. A frame `e_1, …, e_n` spans the +i eigenspace of `J`; each
//! constructor builds `e_k = (v_k − i J v_k)/√2` from chosen real vectors.
//! The structure constants are defined by
//! `[e_i, e_j] = Σ_k C^k_{ij} e_k` and
//! `[e_i, ē_j] = Σ_k ( conj(D^i_{kj}) e_k − D^j_{ki} ē_k )`,
//! and the metric components are `g_{ij̄} = ⟨e_i, ē_j⟩` for the complex
//! bilinear extension of the real inner product.

use crate::error::{Error, Result};
use crate::lie::{AlmostComplexStructure, LieAlgebra, MetricTensor};
use crate::mat::{CMat, ZeroTest};
use crate::scalar::{ComplexScalar, Scalar};

/// Componentwise conjugate of a complex coordinate vector.
pub fn conj_vec(v: &[ComplexScalar]) -> Vec<ComplexScalar> {
    v.iter().map(|x| x.conj()).collect()
}

/// Bracket of complex coordinate vectors, the bilinear extension of the
/// real bracket table.
pub fn bracket_complex(
    alg: &LieAlgebra,
    x: &[ComplexScalar],
    y: &[ComplexScalar],
) -> Vec<ComplexScalar> {
    assert_eq!(x.len(), alg.dim);
    assert_eq!(y.len(), alg.dim);
    let mut out = vec![ComplexScalar::zero(); alg.dim];
    for &(k, i, j, ref v) in alg.nonzero() {
        if x[i].is_zero() || y[j].is_zero() {
            continue;
        }
        out[k] = &out[k] + &(&x[i] * &y[j]).scale(v);
    }
    out
}

/// Complex bilinear extension of the metric: `⟨u, v⟩ = Σ u_a v_b g_{ab}`
/// with no conjugation.
pub fn inner_complex(g: &MetricTensor, u: &[ComplexScalar], v: &[ComplexScalar]) -> ComplexScalar {
    let mut acc = ComplexScalar::zero();
    for (a, ua) in u.iter().enumerate() {
        if ua.is_zero() {
            continue;
        }
        for (b, vb) in v.iter().enumerate() {
            if vb.is_zero() {
                continue;
            }
            acc = &acc + &(ua * vb).scale(g.entry(a, b));
        }
    }
    acc
}

/// A frame of the (1,0)-space with its structure constants and metric
/// components. Frames built from an algebra keep the frame vectors and the
/// change-of-basis data; synthetic frames built from raw tensors omit them.
#[derive(Clone, Debug)]
pub struct ComplexFrame {
    /// Complex dimension `n` (the real algebra has dimension `2n`).
    pub cdim: usize,
    /// `C^j_{ik}`, flattened as `[j][i][k]`.
    c: Vec<ComplexScalar>,
    /// `D^j_{ik}`, flattened as `[j][i][k]`.
    d: Vec<ComplexScalar>,
    /// `g_{ij̄}`.
    pub gmat: CMat,
    /// `g^{īj}`: inverse of `gmat`.
    pub ginv: CMat,
    /// The frame vectors `e_k` as complex coordinate vectors (empty for
    /// synthetic frames).
    pub evecs: Vec<Vec<ComplexScalar>>,
    /// Inverse of the basis matrix `(e_1 … e_n ē_1 … ē_n)`.
    basis_inv: Option<CMat>,
    /// Max deviation of the `e`-part of `[e_i, ē_j]` from `conj(D^i_{kj})`;
    /// this is forced by conjugation symmetry, so it measures only the
    /// solver's internal consistency.
    pub reconstruction_defect: f64,
}

impl ComplexFrame {
    #[inline]
    fn t_idx(&self, j: usize, i: usize, k: usize) -> usize {
        (j * self.cdim + i) * self.cdim + k
    }

    /// `C^j_{ik}`.
    pub fn c_at(&self, j: usize, i: usize, k: usize) -> &ComplexScalar {
        &self.c[self.t_idx(j, i, k)]
    }

    /// `D^j_{ik}`.
    pub fn d_at(&self, j: usize, i: usize, k: usize) -> &ComplexScalar {
        &self.d[self.t_idx(j, i, k)]
    }

    pub fn is_exact(&self) -> bool {
        self.c.iter().chain(self.d.iter()).all(|x| x.is_exact()) && self.gmat.is_exact()
    }

    /// Build a frame from raw structure-constant tensors and a metric
    /// matrix, for synthetic inputs that need not come from any bracket
    /// table. `c` and `d` are flattened `[j][i][k]`.
    pub fn from_tensors(
        cdim: usize,
        c: Vec<ComplexScalar>,
        d: Vec<ComplexScalar>,
        gmat: CMat,
        zt: ZeroTest,
    ) -> Result<Self> {
        if c.len() != cdim * cdim * cdim || d.len() != cdim * cdim * cdim {
            return Err(Error::DimensionMismatch(
                "structure tensor has wrong length".into(),
            ));
        }
        if gmat.rows != cdim || gmat.cols != cdim {
            return Err(Error::DimensionMismatch("metric matrix has wrong shape".into()));
        }
        let ginv = gmat
            .inverse(zt)
            .ok_or_else(|| Error::InvalidInput("frame metric is singular".into()))?;
        Ok(ComplexFrame {
            cdim,
            c,
            d,
            gmat,
            ginv,
            evecs: Vec::new(),
            basis_inv: None,
            reconstruction_defect: 0.0,
        })
    }

    /// Build the frame `e_k = (v_k − i J v_k)/√2` from the given real
    /// vectors. Validates in order: `J² = −I`, metric compatibility of `J`,
    /// linear independence of the frame, and integrability (the bracket of
    /// two frame vectors may have no conjugate part).
    pub fn from_vectors(
        alg: &LieAlgebra,
        g: &MetricTensor,
        j: &AlmostComplexStructure,
        real_vectors: &[Vec<Scalar>],
        zt: ZeroTest,
    ) -> Result<Self> {
        let rdim = alg.dim;
        if rdim % 2 != 0 {
            return Err(Error::DimensionMismatch(
                "complex frames need even real dimension".into(),
            ));
        }
        let n = rdim / 2;
        if real_vectors.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "need {} frame vectors for real dimension {}, got {}",
                n,
                rdim,
                real_vectors.len()
            )));
        }
        j.validate(zt)?;
        let compat = crate::lie::compatibility_defect(g, j);
        let compat_ok = match zt {
            ZeroTest::Exact => compat == 0.0,
            ZeroTest::Tol(t) => compat < t,
        };
        if !compat_ok {
            return Err(Error::NotCompatible { defect: compat });
        }
        // e_k = (v_k - i J v_k) / sqrt(2)
        let inv_s2 = Scalar::inv_sqrt2();
        let evecs: Vec<Vec<ComplexScalar>> = real_vectors
            .iter()
            .map(|v| {
                let jv = j.apply(v);
                v.iter()
                    .zip(&jv)
                    .map(|(a, b)| {
                        ComplexScalar::new(a * &inv_s2, -&(b * &inv_s2))
                    })
                    .collect()
            })
            .collect();
        Self::from_onezero_vectors(alg, g, evecs, zt)
    }

    /// Build from explicit (1,0) vectors (already of the form `x − iJx` up
    /// to complex scaling).
    pub fn from_onezero_vectors(
        alg: &LieAlgebra,
        g: &MetricTensor,
        evecs: Vec<Vec<ComplexScalar>>,
        zt: ZeroTest,
    ) -> Result<Self> {
        let rdim = alg.dim;
        let n = rdim / 2;
        // Basis matrix (e_1 .. e_n, conj e_1 .. conj e_n) as columns.
        let basis = CMat::from_fn(rdim, rdim, |r, col| {
            if col < n {
                evecs[col][r].clone()
            } else {
                evecs[col - n][r].conj()
            }
        });
        let basis_inv = basis.inverse(zt).ok_or(Error::DependentFrame)?;

        let tlen = n * n * n;
        let mut c = vec![ComplexScalar::zero(); tlen];
        let mut d = vec![ComplexScalar::zero(); tlen];
        let t_idx = |j: usize, i: usize, k: usize| (j * n + i) * n + k;

        // (1,0)-(1,0) brackets: conjugate part must vanish (integrability),
        // holomorphic part defines C.
        let mut integrability: f64 = 0.0;
        for i in 0..n {
            for jj in (i + 1)..n {
                let w = bracket_complex(alg, &evecs[i], &evecs[jj]);
                let coeffs = basis_inv.mul_vec(&w);
                for k in 0..n {
                    integrability = integrability.max(coeffs[n + k].abs_f64());
                }
                let bad = coeffs[n..].iter().any(|x| !zt.is_zero(x));
                if bad {
                    return Err(Error::NotIntegrable {
                        defect: integrability,
                    });
                }
                for k in 0..n {
                    c[t_idx(k, i, jj)] = coeffs[k].clone();
                    c[t_idx(k, jj, i)] = -&coeffs[k];
                }
            }
        }

        // Mixed brackets define D through the conjugate part; the
        // holomorphic part is pinned by conjugation symmetry and is
        // re-checked below.
        let mut epart: Vec<Vec<ComplexScalar>> = vec![Vec::new(); n * n];
        for i in 0..n {
            for jj in 0..n {
                let w = bracket_complex(alg, &evecs[i], &conj_vec(&evecs[jj]));
                let coeffs = basis_inv.mul_vec(&w);
                for k in 0..n {
                    // coefficient of conj(e_k) is -D^j_{ki}
                    d[t_idx(jj, k, i)] = -&coeffs[n + k];
                }
                epart[i * n + jj] = coeffs[..n].to_vec();
            }
        }
        let mut reconstruction_defect: f64 = 0.0;
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let expect = d[t_idx(i, k, jj)].conj();
                    let got = &epart[i * n + jj][k];
                    reconstruction_defect =
                        reconstruction_defect.max((got - &expect).abs_f64());
                }
            }
        }

        let gmat = CMat::from_fn(n, n, |i, jj| {
            inner_complex(g, &evecs[i], &conj_vec(&evecs[jj]))
        });
        let ginv = gmat
            .inverse(zt)
            .ok_or_else(|| Error::InvalidInput("frame metric is singular".into()))?;
        Ok(ComplexFrame {
            cdim: n,
            c,
            d,
            gmat,
            ginv,
            evecs,
            basis_inv: Some(basis_inv),
            reconstruction_defect,
        })
    }

    /// Choose frame vectors greedily from the standard basis and build the
    /// frame.
    pub fn complexify(
        alg: &LieAlgebra,
        g: &MetricTensor,
        j: &AlmostComplexStructure,
        zt: ZeroTest,
    ) -> Result<Self> {
        let rdim = alg.dim;
        if rdim % 2 != 0 {
            return Err(Error::DimensionMismatch(
                "complex frames need even real dimension".into(),
            ));
        }
        j.validate(zt)?;
        let mut chosen: Vec<Vec<Scalar>> = Vec::new();
        let mut spanning: Vec<Vec<Scalar>> = Vec::new();
        for m in 0..rdim {
            if chosen.len() == rdim / 2 {
                break;
            }
            let v = crate::lie::basis_vector(rdim, m);
            let jv = j.apply(&v);
            let mut trial = spanning.clone();
            trial.push(v.clone());
            trial.push(jv);
            let rank = crate::mat::Mat::from_rows(trial.clone()).rank(zt);
            if rank == spanning.len() + 2 {
                chosen.push(v);
                spanning = trial;
            }
        }
        if chosen.len() != rdim / 2 {
            return Err(Error::DependentFrame);
        }
        Self::from_vectors(alg, g, j, &chosen, zt)
    }

    /// Coefficients of an arbitrary complexified vector in the frame basis:
    /// `(holomorphic part, conjugate part)`.
    pub fn coefficients(
        &self,
        w: &[ComplexScalar],
    ) -> Result<(Vec<ComplexScalar>, Vec<ComplexScalar>)> {
        let binv = self.basis_inv.as_ref().ok_or_else(|| {
            Error::InvalidInput("synthetic frame carries no basis data".into())
        })?;
        let coeffs = binv.mul_vec(w);
        Ok((coeffs[..self.cdim].to_vec(), coeffs[self.cdim..].to_vec()))
    }

    /// Defect of the frame's exterior-derivative identity: for every `i`,
    /// compare `dφ_i(X, Y) = −φ_i([X, Y])` against
    /// `−½ Σ C^i_{jk} (φ_j ∧ φ_k) − Σ conj(D^j_{ik}) (φ_j ∧ φ̄_k)`
    /// evaluated on all pairs from `{e_a, ē_b}`, with
    /// `(φ∧ψ)(X,Y) = φ(X)ψ(Y) − φ(Y)ψ(X)`. The left side is computed from
    /// the raw bracket table, independently of the stored tensors.
    pub fn structure_equation_defect(&self, alg: &LieAlgebra) -> Result<f64> {
        let n = self.cdim;
        let mut worst: f64 = 0.0;
        // Pair types: (e_a, e_b) a<b, (e_a, conj e_b) all, (conj e_a, conj e_b) a<b.
        for a in 0..n {
            for b in 0..n {
                for &ty in &[0u8, 1, 2] {
                    match ty {
                        0 | 2 if b <= a => continue,
                        _ => {}
                    }
                    let (x, y): (Vec<ComplexScalar>, Vec<ComplexScalar>) = match ty {
                        0 => (self.evecs[a].clone(), self.evecs[b].clone()),
                        1 => (self.evecs[a].clone(), conj_vec(&self.evecs[b])),
                        _ => (conj_vec(&self.evecs[a]), conj_vec(&self.evecs[b])),
                    };
                    // phi_j(X), phibar_j(X) for X = x and y.
                    let phix = self.phi_values(&x, ty, a, true);
                    let phiy = self.phi_values(&y, ty, b, false);
                    let w = bracket_complex(alg, &x, &y);
                    let (he, hbar) = self.coefficients(&w)?;
                    let _ = hbar;
                    for i in 0..n {
                        // LHS: -phi_i([x,y]).
                        let lhs = -&he[i];
                        // RHS from the tensors.
                        let mut rhs = ComplexScalar::zero();
                        for jj in 0..n {
                            for k in 0..n {
                                let cijk = self.c_at(i, jj, k);
                                if !cijk.is_zero() {
                                    // -1/2 C^i_{jk} (phi_j wedge phi_k)(x, y)
                                    let wedge = &(&phix.0[jj] * &phiy.0[k])
                                        - &(&phiy.0[jj] * &phix.0[k]);
                                    rhs = &rhs
                                        - &(cijk * &wedge)
                                            .scale(&Scalar::ratio(1, 2));
                                }
                                let dj = self.d_at(jj, i, k).conj();
                                if !dj.is_zero() {
                                    // - conj(D^j_{ik}) (phi_j wedge phibar_k)(x, y)
                                    let wedge = &(&phix.0[jj] * &phiy.1[k])
                                        - &(&phiy.0[jj] * &phix.1[k]);
                                    rhs = &rhs - &(&dj * &wedge);
                                }
                            }
                        }
                        worst = worst.max((&lhs - &rhs).abs_f64());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// `(phi_1..n(X), phibar_1..n(X))` for a vector known to be `e_idx`
    /// or `conj(e_idx)`.
    fn phi_values(
        &self,
        _x: &[ComplexScalar],
        ty: u8,
        idx: usize,
        first: bool,
    ) -> (Vec<ComplexScalar>, Vec<ComplexScalar>) {
        let n = self.cdim;
        let mut hol = vec![ComplexScalar::zero(); n];
        let mut anti = vec![ComplexScalar::zero(); n];
        let is_holomorphic = match ty {
            0 => true,
            1 => first,
            _ => false,
        };
        if is_holomorphic {
            hol[idx] = ComplexScalar::one();
        } else {
            anti[idx] = ComplexScalar::one();
        }
        (hol, anti)
    }

    /// Defects of the three bracket-identity families that the structure
    /// constants of any genuine Lie bracket satisfy:
    /// `Σ_t (C^t_{ij}C^ℓ_{tk} + C^t_{jk}C^ℓ_{ti} + C^t_{ki}C^ℓ_{tj}) = 0`,
    /// `Σ_t (C^t_{ik}D^ℓ_{jt} + D^t_{ji}D^ℓ_{tk} − D^t_{jk}D^ℓ_{ti}) = 0`,
    /// `Σ_t (C^t_{ik}conj(D^t_{jℓ}) − C^j_{tk}conj(D^i_{tℓ}) + C^j_{ti}conj(D^k_{tℓ})`
    /// `      − D^ℓ_{ti}conj(D^k_{jt}) + D^ℓ_{tk}conj(D^i_{jt})) = 0`.
    /// Returns the max-norm defect of each family.
    pub fn bianchi_defect(&self) -> (f64, f64, f64) {
        let n = self.cdim;
        let mut f1: f64 = 0.0;
        let mut f2: f64 = 0.0;
        let mut f3: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s1 = ComplexScalar::zero();
                        let mut s2 = ComplexScalar::zero();
                        let mut s3 = ComplexScalar::zero();
                        for t in 0..n {
                            s1 = &s1
                                + &(&(self.c_at(t, i, j) * self.c_at(l, t, k))
                                    + &(&(self.c_at(t, j, k) * self.c_at(l, t, i))
                                        + &(self.c_at(t, k, i) * self.c_at(l, t, j))));
                            s2 = &s2
                                + &(&(self.c_at(t, i, k) * self.d_at(l, j, t))
                                    + &(&(self.d_at(t, j, i) * self.d_at(l, t, k))
                                        - &(self.d_at(t, j, k) * self.d_at(l, t, i))));
                            s3 = &s3
                                + &(&(&(self.c_at(t, i, k) * &self.d_at(t, j, l).conj())
                                    - &(self.c_at(j, t, k) * &self.d_at(i, t, l).conj()))
                                    + &(&(self.c_at(j, t, i) * &self.d_at(k, t, l).conj())
                                        + &(&(self.d_at(l, t, k)
                                            * &self.d_at(i, j, t).conj())
                                            - &(self.d_at(l, t, i)
                                                * &self.d_at(k, j, t).conj()))));
                        }
                        f1 = f1.max(s1.abs_f64());
                        f2 = f2.max(s2.abs_f64());
                        f3 = f3.max(s3.abs_f64());
                    }
                }
            }
        }
        (f1, f2, f3)
    }

    /// Max of the three identity-family defects.
    pub fn bianchi_max_defect(&self) -> f64 {
        let (a, b, c) = self.bianchi_defect();
        a.max(b).max(c)
    }

    /// Clone with a tensor entry replaced (for corruption tests):
    /// `which` selects the `C` (true) or `D` (false) tensor. Replacing a
    /// `C` entry also replaces the antisymmetric partner.
    pub fn with_perturbed_entry(
        &self,
        which_c: bool,
        j: usize,
        i: usize,
        k: usize,
        value: ComplexScalar,
    ) -> Self {
        let mut out = self.clone();
        let idx = out.t_idx(j, i, k);
        if which_c {
            out.c[idx] = value.clone();
            let idx2 = out.t_idx(j, k, i);
            out.c[idx2] = -&value;
        } else {
            out.d[idx] = value;
        }
        out.evecs = Vec::new();
        out.basis_inv = None;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::basis_vector;
    use crate::mat::RMat;

    /// Rotation algebra on basis (x, z, eps1, eps2):
    /// [x, eps1] = eps2, [x, eps2] = -eps1, with the complex structure
    /// x -> z, eps1 -> eps2 and the identity metric.
    fn e2r() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
        let alg = LieAlgebra::from_entries(
            4,
            &[(0, 2, 3, Scalar::one()), (0, 3, 2, Scalar::int(-1))],
        )
        .unwrap();
        let g = MetricTensor::identity(4);
        let mut jm = RMat::zeros(4, 4);
        jm[(1, 0)] = Scalar::one();
        jm[(0, 1)] = Scalar::int(-1);
        jm[(3, 2)] = Scalar::one();
        jm[(2, 3)] = Scalar::int(-1);
        (alg, g, AlmostComplexStructure::new(jm))
    }

    fn i_over_sqrt2() -> ComplexScalar {
        ComplexScalar::new(Scalar::zero(), Scalar::inv_sqrt2())
    }

    #[test]
    fn rotation_algebra_frame_has_the_known_constants() {
        let (alg, g, j) = e2r();
        // Frame vectors (eps1, x): e1 = (eps1 - i eps2)/sqrt2, e2 = (x - i z)/sqrt2.
        let frame = ComplexFrame::from_vectors(
            &alg,
            &g,
            &j,
            &[basis_vector(4, 2), basis_vector(4, 0)],
            ZeroTest::Exact,
        )
        .unwrap();
        assert!(frame.is_exact());
        assert_eq!(frame.reconstruction_defect, 0.0);
        // C^1_{21} = i/sqrt2, C^1_{12} = -i/sqrt2, D^1_{12} = i/sqrt2, rest 0.
        assert_eq!(*frame.c_at(0, 1, 0), i_over_sqrt2());
        assert_eq!(*frame.c_at(0, 0, 1), -&i_over_sqrt2());
        assert_eq!(*frame.d_at(0, 0, 1), i_over_sqrt2());
        let n = 2;
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let cv = frame.c_at(j, i, k);
                    let dv = frame.d_at(j, i, k);
                    if (j, i, k) != (0, 1, 0) && (j, i, k) != (0, 0, 1) {
                        assert!(cv.is_zero(), "unexpected C at {j}{i}{k}: {cv:?}");
                    }
                    if (j, i, k) != (0, 0, 1) {
                        assert!(dv.is_zero(), "unexpected D at {j}{i}{k}: {dv:?}");
                    }
                }
            }
        }
        // gmat is the identity.
        for a in 0..n {
            for b in 0..n {
                let want = if a == b {
                    ComplexScalar::one()
                } else {
                    ComplexScalar::zero()
                };
                assert_eq!(frame.gmat[(a, b)], want);
            }
        }
    }

    #[test]
    fn identities_hold_on_the_rotation_frame() {
        let (alg, g, j) = e2r();
        let frame = ComplexFrame::from_vectors(
            &alg,
            &g,
            &j,
            &[basis_vector(4, 2), basis_vector(4, 0)],
            ZeroTest::Exact,
        )
        .unwrap();
        let (b1, b2, b3) = frame.bianchi_defect();
        assert_eq!((b1, b2, b3), (0.0, 0.0, 0.0));
        assert_eq!(frame.structure_equation_defect(&alg).unwrap(), 0.0);
    }

    #[test]
    fn greedy_frame_choice_works_and_respects_j() {
        let (alg, g, j) = e2r();
        let frame = ComplexFrame::complexify(&alg, &g, &j, ZeroTest::Exact).unwrap();
        assert_eq!(frame.cdim, 2);
        assert_eq!(frame.reconstruction_defect, 0.0);
        assert_eq!(frame.bianchi_max_defect(), 0.0);
        assert_eq!(frame.structure_equation_defect(&alg).unwrap(), 0.0);
    }

    #[test]
    fn non_integrable_j_is_rejected_with_defect() {
        let (alg, g, _) = e2r();
        // J swapping x <-> eps1 and z <-> eps2 breaks integrability.
        let mut jm = RMat::zeros(4, 4);
        jm[(2, 0)] = Scalar::one();
        jm[(0, 2)] = Scalar::int(-1);
        jm[(3, 1)] = Scalar::one();
        jm[(1, 3)] = Scalar::int(-1);
        let j = AlmostComplexStructure::new(jm);
        match ComplexFrame::complexify(&alg, &g, &j, ZeroTest::Exact) {
            Err(Error::NotIntegrable { defect }) => assert!(defect > 0.0),
            other => panic!("expected NotIntegrable, got {:?}", other),
        }
    }

    #[test]
    fn incompatible_metric_is_rejected() {
        let (alg, _, j) = e2r();
        let mut gm = RMat::identity(4);
        gm[(0, 0)] = Scalar::int(2);
        let g = MetricTensor::new(gm, ZeroTest::Exact).unwrap();
        match ComplexFrame::complexify(&alg, &g, &j, ZeroTest::Exact) {
            Err(Error::NotCompatible { defect }) => assert!(defect > 0.9),
            other => panic!("expected NotCompatible, got {:?}", other),
        }
    }

    #[test]
    fn perturbing_tensors_breaks_the_identities() {
        let (alg, g, j) = e2r();
        let frame = ComplexFrame::from_vectors(
            &alg,
            &g,
            &j,
            &[basis_vector(4, 2), basis_vector(4, 0)],
            ZeroTest::Exact,
        )
        .unwrap();
        let bad = frame.with_perturbed_entry(
            false,
            0,
            0,
            0,
            ComplexScalar::from_real(Scalar::ratio(1, 10)),
        );
        assert!(bad.bianchi_max_defect() > 1e-3);
    }

    #[test]
    fn abelian_frame_is_totally_flat() {
        let alg = LieAlgebra::abelian(4);
        let g = MetricTensor::identity(4);
        let j = AlmostComplexStructure::standard(4);
        let frame = ComplexFrame::complexify(&alg, &g, &j, ZeroTest::Exact).unwrap();
        assert!(frame
            .c
            .iter()
            .chain(frame.d.iter())
            .all(|x| x.is_zero()));
        assert_eq!(frame.bianchi_max_defect(), 0.0);
    }
}
