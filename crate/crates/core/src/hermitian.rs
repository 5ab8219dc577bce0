//! Hermitian structure theory: the canonical subspace decomposition induced
//! by a compatible complex structure, admissible frames, Chern torsion (two
//! independent routes), the structure-constant constraints forced by 2-step
//! solvability, and the identity suite whose vanishing certifies that flat
//! Hermitian metrics have vanishing Chern torsion.

use crate::error::{Error, Result};
use crate::frames::ComplexFrame;
use crate::lie::{AlmostComplexStructure, LieAlgebra, MetricTensor};
use crate::mat::{CMat, ZeroTest};
use crate::scalar::{ArithmeticPolicy, ComplexScalar, Scalar};
use crate::subspace::{dot_g, orthonormalize, Subspace};

/// Index layout of an admissible frame: `0..r` spans the J-invariant part
/// of the derived algebra, `r..s` the middle block over `V`, `s..n` the
/// block over `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameLayout {
    pub r: usize,
    pub s: usize,
    pub n: usize,
}

impl FrameLayout {
    pub fn core(&self) -> std::ops::Range<usize> {
        0..self.r
    }
    pub fn middle(&self) -> std::ops::Range<usize> {
        self.r..self.s
    }
    pub fn wblock(&self) -> std::ops::Range<usize> {
        self.s..self.n
    }
}

/// The canonical orthogonal decomposition induced by `(J, g)`:
/// `gprime_j = 𝔤′ ∩ J𝔤′`, `w = (𝔤′ + J𝔤′)^⊥`,
/// `u = (𝔤′_J)^⊥ ∩ (𝔤′ + J𝔤′)`, `v = (𝔤′_J)^⊥ ∩ 𝔤′`, `v_prime = v^⊥ ∩ u`.
#[derive(Clone, Debug)]
pub struct HermitianDecomposition {
    pub gprime_j: Subspace<Scalar>,
    pub w: Subspace<Scalar>,
    pub u: Subspace<Scalar>,
    pub v: Subspace<Scalar>,
    pub v_prime: Subspace<Scalar>,
    /// Half the real dimension of `gprime_j`.
    pub r: usize,
    /// `r` plus the dimension of `v`.
    pub s: usize,
    /// Half the real dimension of the algebra.
    pub n: usize,
}

impl HermitianDecomposition {
    pub fn layout(&self) -> FrameLayout {
        FrameLayout {
            r: self.r,
            s: self.s,
            n: self.n,
        }
    }

    /// `(I, II, III)`: whether `𝔤′ ∩ J𝔤′ = 0`, `J𝔤′ = 𝔤′`, or
    /// `𝔤′ + J𝔤′` is everything.
    pub fn pure_types(&self) -> (bool, bool, bool) {
        (
            self.r == 0,
            self.s == self.r,
            self.w.dim() == 0,
        )
    }
}

/// Compute the canonical decomposition. Validates `J² = −I` and metric
/// compatibility first.
pub fn decompose(
    alg: &LieAlgebra,
    g: &MetricTensor,
    j: &AlmostComplexStructure,
    zt: ZeroTest,
) -> Result<HermitianDecomposition> {
    let rdim = alg.dim;
    if rdim % 2 != 0 {
        return Err(Error::DimensionMismatch(
            "a complex structure needs even real dimension".into(),
        ));
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
    let gprime = alg.derived_algebra(zt);
    let j_gprime = gprime.apply(&j.mat, zt);
    let gprime_j = gprime.intersect(&j_gprime, zt);
    if gprime_j.dim() % 2 != 0 {
        return Err(Error::DegenerateSplitting(
            "J-invariant part of the derived algebra has odd dimension".into(),
        ));
    }
    let sum = gprime.sum(&j_gprime, zt);
    let w = sum.complement_wrt(g.mat(), zt);
    let perp_gj = gprime_j.complement_wrt(g.mat(), zt);
    let u = perp_gj.intersect(&sum, zt);
    let v = perp_gj.intersect(&gprime, zt);
    let v_prime = v.complement_wrt(g.mat(), zt).intersect(&u, zt);
    let r = gprime_j.dim() / 2;
    let s = r + v.dim();
    let n = rdim / 2;
    if u.dim() != 2 * v.dim() || w.dim() != 2 * (n - s) {
        return Err(Error::DegenerateSplitting(format!(
            "inconsistent block dimensions: dim u = {}, dim v = {}, dim w = {}",
            u.dim(),
            v.dim(),
            w.dim()
        )));
    }
    Ok(HermitianDecomposition {
        gprime_j,
        w,
        u,
        v,
        v_prime,
        r,
        s,
        n,
    })
}

/// Orthonormal family `v_1, …, v_m` of a J-invariant subspace such that
/// `(v_1, Jv_1, …, v_m, Jv_m)` is a g-orthonormal basis of it.
pub fn j_adapted_family(
    space: &Subspace<Scalar>,
    g: &MetricTensor,
    j: &AlmostComplexStructure,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
) -> Result<Vec<Vec<Scalar>>> {
    let mut chosen: Vec<Vec<Scalar>> = Vec::new();
    let mut span: Vec<Vec<Scalar>> = Vec::new();
    for w0 in space.basis() {
        if span.len() == space.dim() {
            break;
        }
        // Project off the (orthonormal) span collected so far.
        let mut w = w0.clone();
        for u in &span {
            let c = g.inner(&w, u);
            for (slot, t) in w.iter_mut().zip(u) {
                *slot = &*slot - &(&c * t);
            }
        }
        let norm_sq = g.inner(&w, &w);
        if zt.is_zero(&norm_sq) {
            continue;
        }
        let norm = match norm_sq.sqrt_exact() {
            Some(x) => x,
            None => match policy {
                ArithmeticPolicy::RequireExact => {
                    return Err(Error::ExactnessLost(format!(
                        "frame normalization needs sqrt of {}",
                        norm_sq
                    )))
                }
                ArithmeticPolicy::Auto => Scalar::float(norm_sq.to_f64().sqrt()),
            },
        };
        let inv = norm.recip();
        let v: Vec<Scalar> = w.iter().map(|x| x * &inv).collect();
        let jv = j.apply(&v);
        chosen.push(v.clone());
        span.push(v);
        span.push(jv);
    }
    if span.len() != space.dim() {
        return Err(Error::DegenerateSplitting(
            "could not exhaust the J-invariant subspace with J-adapted pairs".into(),
        ));
    }
    Ok(chosen)
}

/// Build an admissible frame: unitary over the J-invariant derived part and
/// over `W`, and of the form `(ε_α − iJε_α)/√2` over an orthonormal basis
/// of `V` in the middle.
pub fn admissible_frame(
    alg: &LieAlgebra,
    g: &MetricTensor,
    j: &AlmostComplexStructure,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
) -> Result<(ComplexFrame, FrameLayout)> {
    let dec = decompose(alg, g, j, zt)?;
    let mut vectors = j_adapted_family(&dec.gprime_j, g, j, policy, zt)?;
    let middle = orthonormalize(dec.v.basis(), g.mat(), policy, zt)?;
    vectors.extend(middle);
    vectors.extend(j_adapted_family(&dec.w, g, j, policy, zt)?);
    let frame = ComplexFrame::from_vectors(alg, g, j, &vectors, zt)?;
    Ok((frame, dec.layout()))
}

/// A unitary frame of the whole algebra (J-adapted pairs everywhere),
/// without regard to the derived-algebra decomposition.
pub fn unitary_frame(
    alg: &LieAlgebra,
    g: &MetricTensor,
    j: &AlmostComplexStructure,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
) -> Result<ComplexFrame> {
    let full = Subspace::full(alg.dim);
    let vectors = j_adapted_family(&full, g, j, policy, zt)?;
    ComplexFrame::from_vectors(alg, g, j, &vectors, zt)
}

/// Chern torsion components, antisymmetric in the lower pair.
#[derive(Clone, Debug)]
pub struct TorsionTensor {
    pub cdim: usize,
    data: Vec<ComplexScalar>,
}

impl TorsionTensor {
    #[inline]
    pub fn at(&self, j: usize, i: usize, k: usize) -> &ComplexScalar {
        &self.data[(j * self.cdim + i) * self.cdim + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs_f64()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn max_diff(&self, o: &TorsionTensor) -> f64 {
        assert_eq!(self.cdim, o.cdim);
        self.data
            .iter()
            .zip(&o.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs_f64()))
    }
}

/// Chern torsion from the closed formula
/// `T^j_{ik} = −C^j_{ik} − Σ_{ℓm} D^m_{ℓk} g^{m̄j} g_{iℓ̄}
///            + Σ_{ℓm} D^m_{ℓi} g^{m̄j} g_{kℓ̄}`.
pub fn chern_torsion(frame: &ComplexFrame) -> TorsionTensor {
    let n = frame.cdim;
    let mut data = vec![ComplexScalar::zero(); n * n * n];
    for j in 0..n {
        for i in 0..n {
            for k in 0..=i {
                if i == k {
                    continue;
                }
                let mut t = -frame.c_at(j, i, k);
                for l in 0..n {
                    for m in 0..n {
                        let gm = &frame.ginv[(m, j)];
                        if gm.is_zero() {
                            continue;
                        }
                        let dk = frame.d_at(m, l, k);
                        if !dk.is_zero() {
                            t = &t - &(&(dk * gm) * &frame.gmat[(i, l)]);
                        }
                        let di = frame.d_at(m, l, i);
                        if !di.is_zero() {
                            t = &t + &(&(di * gm) * &frame.gmat[(k, l)]);
                        }
                    }
                }
                data[(j * n + i) * n + k] = t.clone();
                data[(j * n + k) * n + i] = -&t;
            }
        }
    }
    TorsionTensor { cdim: n, data }
}

/// Max-norm of the Chern torsion: zero exactly when the metric is Kähler
/// with respect to `J`.
pub fn kaehler_defect(frame: &ComplexFrame) -> f64 {
    chern_torsion(frame).max_abs()
}

/// Independent Chern-torsion route: solve for the unique type-preserving,
/// metric-compatible connection whose mixed torsion vanishes, then read the
/// torsion of holomorphic pairs off the connection. Returns the torsion and
/// the max-norm internal-consistency defect (the conjugate-direction metric
/// equations, which the solution must satisfy identically).
pub fn chern_connection_torsion(
    frame: &ComplexFrame,
    zt: ZeroTest,
) -> Result<(TorsionTensor, f64)> {
    let n = frame.cdim;
    // Vanishing mixed torsion plus type preservation force
    // `∇_{ē_k} e_i = −Σ_m conj(D^i_{mk}) e_m`; metric compatibility in the
    // holomorphic directions then determines `∇_{e_k} e_i = Σ_t b^t_{ki} e_t`
    // through `Σ_t b^t_{ki} g_{tj̄} = Σ_m D^j_{mk} g_{im̄}` for every `j`.
    let gt = frame.gmat.transpose();
    let mut b = vec![ComplexScalar::zero(); n * n * n]; // b[t][k][i]
    for k in 0..n {
        for i in 0..n {
            let rhs: Vec<ComplexScalar> = (0..n)
                .map(|j| {
                    let mut acc = ComplexScalar::zero();
                    for m in 0..n {
                        let d = frame.d_at(j, m, k);
                        if !d.is_zero() {
                            acc = &acc + &(d * &frame.gmat[(i, m)]);
                        }
                    }
                    acc
                })
                .collect();
            let sol = gt
                .solve(&rhs, zt)
                .ok_or_else(|| Error::InvalidInput("frame metric is singular".into()))?;
            for t in 0..n {
                b[(t * n + k) * n + i] = sol[t].clone();
            }
        }
    }
    // Internal consistency: metric compatibility in the conjugate
    // directions must hold for the same coefficients.
    let mut consistency: f64 = 0.0;
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = ComplexScalar::zero();
                for k in 0..n {
                    let d = frame.d_at(i, k, m).conj();
                    if !d.is_zero() {
                        acc = &acc - &(&d * &frame.gmat[(k, j)]);
                    }
                    let bt = b[(k * n + m) * n + j].conj();
                    if !bt.is_zero() {
                        acc = &acc + &(&bt * &frame.gmat[(i, k)]);
                    }
                }
                consistency = consistency.max(acc.abs_f64());
            }
        }
    }
    // T(e_i, e_k) = ∇_{e_i} e_k − ∇_{e_k} e_i − [e_i, e_k].
    let mut data = vec![ComplexScalar::zero(); n * n * n];
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                let t = &(&b[(j * n + i) * n + k] - &b[(j * n + k) * n + i])
                    - frame.c_at(j, i, k);
                data[(j * n + i) * n + k] = t;
            }
        }
    }
    Ok((TorsionTensor { cdim: n, data }, consistency))
}

/// Compare the torsion tensors of two frames over the same structure by
/// transporting the first frame's tensor into the second frame's
/// coordinates. Zero means the two computations describe the same tensor.
pub fn torsion_crosscheck(
    f1: &ComplexFrame,
    f2: &ComplexFrame,
    zt: ZeroTest,
) -> Result<f64> {
    let n = f1.cdim;
    if f2.cdim != n {
        return Err(Error::DimensionMismatch("frame dimensions differ".into()));
    }
    let t1 = chern_torsion(f1);
    let t2 = chern_torsion(f2);
    // P[a][i]: f2 frame vector i expressed in f1 coordinates.
    let mut p = CMat::zeros(n, n);
    let mut mixing: f64 = 0.0;
    for i in 0..n {
        let (pe, pbar) = f1.coefficients(&f2.evecs[i])?;
        for x in &pbar {
            mixing = mixing.max(x.abs_f64());
        }
        for a in 0..n {
            p[(a, i)] = pe[a].clone();
        }
    }
    let pinv = p.inverse(zt).ok_or(Error::DependentFrame)?;
    let mut worst = mixing;
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                // sum_{a,b,c} P_ai P_bk T1^c_{ab} Pinv_jc
                let mut acc = ComplexScalar::zero();
                for a in 0..n {
                    if p[(a, i)].is_zero() {
                        continue;
                    }
                    for bb in 0..n {
                        if p[(bb, k)].is_zero() {
                            continue;
                        }
                        for c in 0..n {
                            let t = t1.at(c, a, bb);
                            if t.is_zero() {
                                continue;
                            }
                            acc = &acc
                                + &(&(&p[(a, i)] * &p[(bb, k)]) * &(t * &pinv[(j, c)]));
                        }
                    }
                }
                worst = worst.max((&acc - t2.at(j, i, k)).abs_f64());
            }
        }
    }
    Ok(worst)
}

/// Contraction `Σ_{i,k} X_i Z_k conj(Y_j) C^j_{ik}` of a structure tensor
/// against frame-coefficient vectors.
fn contract(
    tensor_at: &dyn Fn(usize, usize, usize) -> ComplexScalar,
    n: usize,
    y: &[ComplexScalar],
    x: &[ComplexScalar],
    z: &[ComplexScalar],
) -> ComplexScalar {
    let mut acc = ComplexScalar::zero();
    for j in 0..n {
        let yc = y[j].conj();
        if yc.is_zero() {
            continue;
        }
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for k in 0..n {
                if z[k].is_zero() {
                    continue;
                }
                let t = tensor_at(j, i, k);
                if !t.is_zero() {
                    acc = &acc + &(&(&x[i] * &z[k]) * &(&yc * &t));
                }
            }
        }
    }
    acc
}

fn unit_coeff(n: usize, idx: usize) -> Vec<ComplexScalar> {
    let mut v = vec![ComplexScalar::zero(); n];
    v[idx] = ComplexScalar::one();
    v
}

/// Middle-block combination `v_α = Σ_β g^{ᾱβ} e_β` as a frame-coefficient
/// vector.
fn v_alpha_coeff(frame: &ComplexFrame, layout: &FrameLayout, alpha: usize) -> Vec<ComplexScalar> {
    let mut v = vec![ComplexScalar::zero(); layout.n];
    for beta in layout.middle() {
        v[beta] = frame.ginv[(alpha, beta)].clone();
    }
    v
}

/// Max-norm defect of the structure-constant constraints that hold for any
/// admissible frame of a 2-step solvable Hermitian Lie algebra:
/// with `i, j` in the core range, `α, β` middle, `a` in the `W` range and
/// `*` arbitrary:
/// `C^*_{ij} = C^α_{**} = C^a_{**} = D^*_{a*} = D^i_{*j} = D^α_{*j} = D^i_{αβ} = 0`,
/// `C^j_{iα} = −conj(D^i_{jα})`,
/// `C^*_{αβ} = conj(D^β_{*α}) − conj(D^α_{*β})`,
/// `conj(D^x_{αy}) = −D^y_{αx}` for all `x, y`.
pub fn two_step_constraint_defect(frame: &ComplexFrame, layout: &FrameLayout) -> f64 {
    let n = layout.n;
    let mut worst: f64 = 0.0;
    let mut push = |x: f64| {
        if x > worst {
            worst = x;
        }
    };
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                let c = frame.c_at(j, i, k);
                let d = frame.d_at(j, i, k);
                let core = |t: usize| t < layout.r;
                let mid = |t: usize| t >= layout.r && t < layout.s;
                let wb = |t: usize| t >= layout.s;
                // C^*_{ij} = 0 (both lower in core)
                if core(i) && core(k) {
                    push(c.abs_f64());
                }
                // C^alpha_{**} = C^a_{**} = 0
                if mid(j) || wb(j) {
                    push(c.abs_f64());
                }
                // D^*_{a*} = 0
                if wb(i) {
                    push(d.abs_f64());
                }
                // D^i_{*j} = 0 and D^alpha_{*j} = 0 (second lower in core)
                if core(k) && (core(j) || mid(j)) {
                    push(d.abs_f64());
                }
                // D^i_{alpha beta} = 0
                if core(j) && mid(i) && mid(k) {
                    push(d.abs_f64());
                }
            }
        }
    }
    // C^j_{i alpha} = -conj(D^i_{j alpha})
    for j in layout.core() {
        for i in layout.core() {
            for alpha in layout.middle() {
                let lhs = frame.c_at(j, i, alpha);
                let rhs = -&frame.d_at(i, j, alpha).conj();
                push((lhs - &rhs).abs_f64());
            }
        }
    }
    // C^*_{alpha beta} = conj(D^beta_{* alpha}) - conj(D^alpha_{* beta})
    for t in 0..n {
        for alpha in layout.middle() {
            for beta in layout.middle() {
                let lhs = frame.c_at(t, alpha, beta);
                let rhs = &frame.d_at(beta, t, alpha).conj()
                    - &frame.d_at(alpha, t, beta).conj();
                push((lhs - &rhs).abs_f64());
            }
        }
    }
    // conj(D^x_{alpha y}) = -D^y_{alpha x}
    for alpha in layout.middle() {
        for x in 0..n {
            for y in 0..n {
                let lhs = frame.d_at(x, alpha, y).conj();
                let rhs = -frame.d_at(y, alpha, x);
                push((&lhs - &rhs).abs_f64());
            }
        }
    }
    worst
}

/// Constraint check with preconditions: the algebra must be 2-step solvable
/// (abelian passes vacuously). Builds an admissible frame internally.
pub fn two_step_constraint_check(
    alg: &LieAlgebra,
    g: &MetricTensor,
    j: &AlmostComplexStructure,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
) -> Result<f64> {
    if !alg.is_two_step_solvable(zt) {
        return Err(Error::NotTwoStepSolvable);
    }
    let (frame, layout) = admissible_frame(alg, g, j, policy, zt)?;
    Ok(two_step_constraint_defect(&frame, &layout))
}

/// One evaluated identity of the flatness-implies-Kähler argument.
#[derive(Clone, Debug)]
pub struct ProofRow {
    pub name: &'static str,
    pub defect: f64,
    /// True when every index range the identity quantifies over is empty,
    /// so the zero defect carries no information.
    pub vacuous: bool,
}

/// Rows evaluated purely from a frame's structure tensors. Exposed
/// individually so each evaluator can be exercised on synthetic tensors.
pub mod rows {
    use super::*;

    /// `C^*_{ab} = D^a_{*b} = D^α_{*a} = 0`: the `W` directions neither
    /// appear in holomorphic brackets nor act through `D`.
    pub fn core_abelian_w(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let mut worst: f64 = 0.0;
        for t in 0..l.n {
            for a in l.wblock() {
                for b in l.wblock() {
                    worst = worst.max(frame.c_at(t, a, b).abs_f64());
                    worst = worst.max(frame.d_at(a, t, b).abs_f64());
                }
                for alpha in l.middle() {
                    worst = worst.max(frame.d_at(alpha, t, a).abs_f64());
                }
            }
        }
        worst
    }

    /// The middle-direction abelian relations, contracted through
    /// `v_α = Σ g^{ᾱβ} e_β`: `C^*_{v_α a} = −conj(D^a_{* v_α})` and
    /// `C^*_{v_α v_β} = conj(D^{v_α}_{* v_β}) − conj(D^{v_β}_{* v_α})`.
    pub fn core_abelian_v(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let n = l.n;
        let c_at = |j: usize, i: usize, k: usize| frame.c_at(j, i, k).clone();
        let d_at = |j: usize, i: usize, k: usize| frame.d_at(j, i, k).clone();
        let mut worst: f64 = 0.0;
        for alpha in l.middle() {
            let va = v_alpha_coeff(frame, l, alpha);
            for t in 0..n {
                let et = unit_coeff(n, t);
                for a in l.wblock() {
                    let ea = unit_coeff(n, a);
                    let lhs = contract(&c_at, n, &et, &va, &ea);
                    let rhs = -&contract(&d_at, n, &ea, &et, &va).conj();
                    worst = worst.max((&lhs - &rhs).abs_f64());
                }
                for beta in l.middle() {
                    let vb = v_alpha_coeff(frame, l, beta);
                    let lhs = contract(&c_at, n, &et, &va, &vb);
                    let rhs = &contract(&d_at, n, &va, &et, &vb).conj()
                        - &contract(&d_at, n, &vb, &et, &va).conj();
                    worst = worst.max((&lhs - &rhs).abs_f64());
                }
            }
        }
        worst
    }

    /// `Σ_t (D^a_{tx} g_{yt̄} + D^a_{ty} g_{xt̄}) = 0` and
    /// `Σ_t (C^t_{xa} g_{tȳ} + D^y_{ta} g_{xt̄}) = 0`: the `W` directions
    /// act skew-symmetrically.
    pub fn w_skew_metric(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let n = l.n;
        let mut worst: f64 = 0.0;
        for a in l.wblock() {
            for x in 0..n {
                for y in 0..n {
                    let mut s1 = ComplexScalar::zero();
                    let mut s2 = ComplexScalar::zero();
                    for t in 0..n {
                        s1 = &s1
                            + &(&(frame.d_at(a, t, x) * &frame.gmat[(y, t)])
                                + &(frame.d_at(a, t, y) * &frame.gmat[(x, t)]));
                        s2 = &s2
                            + &(&(frame.c_at(t, x, a) * &frame.gmat[(t, y)])
                                + &(frame.d_at(y, t, a) * &frame.gmat[(x, t)]));
                    }
                    worst = worst.max(s1.abs_f64()).max(s2.abs_f64());
                }
            }
        }
        worst
    }

    /// `Σ_t (D^α_{tx} g_{yt̄} + D^α_{ty} g_{xt̄}) = 0`.
    pub fn v_skew_metric(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let n = l.n;
        let mut worst: f64 = 0.0;
        for alpha in l.middle() {
            for x in 0..n {
                for y in 0..n {
                    let mut s = ComplexScalar::zero();
                    for t in 0..n {
                        s = &s
                            + &(&(frame.d_at(alpha, t, x) * &frame.gmat[(y, t)])
                                + &(frame.d_at(alpha, t, y) * &frame.gmat[(x, t)]));
                    }
                    worst = worst.max(s.abs_f64());
                }
            }
        }
        worst
    }

    /// `Σ_t {(C^t_{αx} + conj(D^x_{tα})) g_{tȳ} − (conj(C^t_{αy}) + D^y_{tα}) g_{xt̄}} = 0`.
    pub fn v_skew_conjugate(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let n = l.n;
        let mut worst: f64 = 0.0;
        for alpha in l.middle() {
            for x in 0..n {
                for y in 0..n {
                    let mut s = ComplexScalar::zero();
                    for t in 0..n {
                        let left = &(frame.c_at(t, alpha, x) + &frame.d_at(x, t, alpha).conj())
                            * &frame.gmat[(t, y)];
                        let right = &(&frame.c_at(t, alpha, y).conj()
                            + frame.d_at(y, t, alpha))
                            * &frame.gmat[(x, t)];
                        s = &s + &(&left - &right);
                    }
                    worst = worst.max(s.abs_f64());
                }
            }
        }
        worst
    }

    /// `D^a_{ij} + D^a_{ji} = 0` and `D^a_{iα} + Σ_β D^a_{βi} g_{αβ̄} = 0`.
    pub fn w_core_pairs(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let mut worst: f64 = 0.0;
        for a in l.wblock() {
            for i in l.core() {
                for j in l.core() {
                    worst = worst
                        .max((frame.d_at(a, i, j) + frame.d_at(a, j, i)).abs_f64());
                }
                for alpha in l.middle() {
                    let mut s = frame.d_at(a, i, alpha).clone();
                    for beta in l.middle() {
                        s = &s + &(frame.d_at(a, beta, i) * &frame.gmat[(alpha, beta)]);
                    }
                    worst = worst.max(s.abs_f64());
                }
            }
        }
        worst
    }

    /// `D^a_{**} = 0` for `a` in the `W` range.
    pub fn w_vanishing(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let mut worst: f64 = 0.0;
        for a in l.wblock() {
            for x in 0..l.n {
                for y in 0..l.n {
                    worst = worst.max(frame.d_at(a, x, y).abs_f64());
                }
            }
        }
        worst
    }

    /// `D^α_{**} = 0` for `α` in the middle range.
    pub fn v_vanishing(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let mut worst: f64 = 0.0;
        for alpha in l.middle() {
            for x in 0..l.n {
                for y in 0..l.n {
                    worst = worst.max(frame.d_at(alpha, x, y).abs_f64());
                }
            }
        }
        worst
    }

    /// `D^γ_{αβ} = D^β_{αγ} = −conj(D^γ_{αβ})` on the middle block.
    pub fn middle_symmetry(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let mut worst: f64 = 0.0;
        for gamma in l.middle() {
            for alpha in l.middle() {
                for beta in l.middle() {
                    let d1 = frame.d_at(gamma, alpha, beta);
                    let d2 = frame.d_at(beta, alpha, gamma);
                    worst = worst.max((d1 - d2).abs_f64());
                    worst = worst.max((d1 + &d1.conj()).abs_f64());
                }
            }
        }
        worst
    }

    /// `G A_γ + (G A_γ)ᵀ = 0` with `A_γ(α,β) = i·D^β_{αγ}` and `G` the
    /// middle metric block.
    pub fn middle_metric_skew(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let m = l.s - l.r;
        if m == 0 {
            return 0.0;
        }
        let ii = ComplexScalar::i();
        let mut worst: f64 = 0.0;
        for gamma in l.middle() {
            let a_g = CMat::from_fn(m, m, |al, be| {
                &ii * frame.d_at(l.r + be, l.r + al, gamma)
            });
            let gm = CMat::from_fn(m, m, |x, y| frame.gmat[(l.r + x, l.r + y)].clone());
            let ga = gm.matmul(&a_g);
            let sum = ga.add_mat(&ga.transpose());
            worst = worst.max(sum.max_abs());
        }
        worst
    }

    /// `[B_α, B_β] = 0` with `B_α(γ,β) = i·D^γ_{αβ}`.
    pub fn middle_commutation(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let m = l.s - l.r;
        if m == 0 {
            return 0.0;
        }
        let ii = ComplexScalar::i();
        let bs: Vec<CMat> = l
            .middle()
            .map(|alpha| {
                CMat::from_fn(m, m, |ga, be| {
                    &ii * frame.d_at(l.r + ga, alpha, l.r + be)
                })
            })
            .collect();
        let mut worst: f64 = 0.0;
        for x in 0..m {
            for y in (x + 1)..m {
                let comm = bs[x].matmul(&bs[y]).sub_mat(&bs[y].matmul(&bs[x]));
                worst = worst.max(comm.max_abs());
            }
        }
        worst
    }

    /// `C^j_{ia} = −D^j_{ia}` for core `i, j` and `a` in the `W` range.
    pub fn w_conjugate_relation(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let mut worst: f64 = 0.0;
        for j in l.core() {
            for i in l.core() {
                for a in l.wblock() {
                    worst = worst
                        .max((frame.c_at(j, i, a) + frame.d_at(j, i, a)).abs_f64());
                }
            }
        }
        worst
    }

    /// `C^j_{iα} = −D^j_{iα}` for core `i, j` and middle `α`.
    pub fn v_conjugate_relation(frame: &ComplexFrame, l: &FrameLayout) -> f64 {
        let mut worst: f64 = 0.0;
        for j in l.core() {
            for i in l.core() {
                for alpha in l.middle() {
                    worst = worst
                        .max((frame.c_at(j, i, alpha) + frame.d_at(j, i, alpha)).abs_f64());
                }
            }
        }
        worst
    }
}

/// Evaluate the full identity chain of the flatness-implies-Kähler
/// argument on a flat Hermitian structure. Fails with `NotFlat` when the
/// metric has curvature, since every row's vanishing is only asserted under
/// flatness. The first row checks the real structural input (the
/// complement acts skew-symmetrically); the remaining rows evaluate the
/// admissible frame's structure tensors.
pub fn proof_suite(
    alg: &LieAlgebra,
    g: &MetricTensor,
    j: &AlmostComplexStructure,
    policy: ArithmeticPolicy,
    zt: ZeroTest,
) -> Result<Vec<ProofRow>> {
    let defect = crate::riemannian::flatness_defect(alg, g);
    let flat = match zt {
        ZeroTest::Exact => defect == 0.0,
        ZeroTest::Tol(t) => defect < t,
    };
    if !flat {
        return Err(Error::NotFlat { defect });
    }
    if !alg.is_two_step_solvable(zt) {
        return Err(Error::NotTwoStepSolvable);
    }
    let (frame, layout) = admissible_frame(alg, g, j, policy, zt)?;

    // Row 1: skew action of the complement of 𝔷 ⊕ 𝔤′, in the real basis.
    let derived = alg.derived_algebra(zt);
    let center = alg.center(zt);
    let zspace = center.intersect(&derived.complement_wrt(g.mat(), zt), zt);
    let hspace = zspace.sum(&derived, zt).complement_wrt(g.mat(), zt);
    let mut skew: f64 = 0.0;
    let mut acting: Vec<Vec<Scalar>> = hspace.basis().to_vec();
    acting.extend(zspace.basis().to_vec());
    for z in &acting {
        for x in 0..alg.dim {
            let zx = alg.bracket(z, &crate::lie::basis_vector(alg.dim, x));
            let gzx = g.mat().mul_vec(&zx);
            for y in 0..alg.dim {
                let zy = alg.bracket(z, &crate::lie::basis_vector(alg.dim, y));
                let s = &gzx[y] + &dot_g(&zy, &crate::lie::basis_vector(alg.dim, x), g.mat());
                skew = skew.max(s.to_f64().abs());
            }
        }
    }

    let l = &layout;
    let has_core = l.r > 0;
    let has_mid = l.s > l.r;
    let has_w = l.n > l.s;
    let rows = vec![
        ProofRow {
            name: "skew_adjoint_action",
            defect: skew,
            vacuous: acting.is_empty(),
        },
        ProofRow {
            name: "core_abelian_w",
            defect: rows::core_abelian_w(&frame, l),
            vacuous: !has_w,
        },
        ProofRow {
            name: "core_abelian_v",
            defect: rows::core_abelian_v(&frame, l),
            vacuous: !has_mid,
        },
        ProofRow {
            name: "w_skew_metric",
            defect: rows::w_skew_metric(&frame, l),
            vacuous: !has_w,
        },
        ProofRow {
            name: "v_skew_metric",
            defect: rows::v_skew_metric(&frame, l),
            vacuous: !has_mid,
        },
        ProofRow {
            name: "v_skew_conjugate",
            defect: rows::v_skew_conjugate(&frame, l),
            vacuous: !has_mid,
        },
        ProofRow {
            name: "w_core_pairs",
            defect: rows::w_core_pairs(&frame, l),
            vacuous: !(has_w && has_core),
        },
        ProofRow {
            name: "w_vanishing",
            defect: rows::w_vanishing(&frame, l),
            vacuous: !has_w,
        },
        ProofRow {
            name: "v_vanishing",
            defect: rows::v_vanishing(&frame, l),
            vacuous: !has_mid,
        },
        ProofRow {
            name: "middle_symmetry",
            defect: rows::middle_symmetry(&frame, l),
            vacuous: !has_mid,
        },
        ProofRow {
            name: "middle_metric_skew",
            defect: rows::middle_metric_skew(&frame, l),
            vacuous: !has_mid,
        },
        ProofRow {
            name: "middle_commutation",
            defect: rows::middle_commutation(&frame, l),
            vacuous: !has_mid,
        },
        ProofRow {
            name: "w_conjugate_relation",
            defect: rows::w_conjugate_relation(&frame, l),
            vacuous: !(has_w && has_core),
        },
        ProofRow {
            name: "v_conjugate_relation",
            defect: rows::v_conjugate_relation(&frame, l),
            vacuous: !(has_mid && has_core),
        },
    ];
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::RMat;

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

    /// Central extension [x0, x1] = x2 with x3 extra, J: x0->x1, x2->x3.
    fn heis4() -> (LieAlgebra, MetricTensor, AlmostComplexStructure) {
        let alg = LieAlgebra::from_entries(4, &[(0, 1, 2, Scalar::one())]).unwrap();
        let g = MetricTensor::identity(4);
        (alg, g, AlmostComplexStructure::standard(4))
    }

    #[test]
    fn rotation_algebra_is_kaehler_with_invariant_derived_part() {
        let (alg, g, j) = e2r();
        let dec = decompose(&alg, &g, &j, ZeroTest::Exact).unwrap();
        assert_eq!((dec.r, dec.s, dec.n), (1, 1, 2));
        assert_eq!(dec.v.dim(), 0);
        assert_eq!(dec.w.dim(), 2);
        assert_eq!(dec.pure_types(), (false, true, false));
        let (frame, layout) = admissible_frame(
            &alg,
            &g,
            &j,
            ArithmeticPolicy::RequireExact,
            ZeroTest::Exact,
        )
        .unwrap();
        assert!(frame.is_exact());
        let t = chern_torsion(&frame);
        assert!(t.is_zero(), "rotation algebra metric must be Kähler");
        assert_eq!(two_step_constraint_defect(&frame, &layout), 0.0);
    }

    #[test]
    fn central_extension_torsion_has_frozen_value() {
        let (alg, g, j) = heis4();
        let dec = decompose(&alg, &g, &j, ZeroTest::Exact).unwrap();
        assert_eq!((dec.r, dec.s, dec.n), (0, 1, 2));
        assert_eq!(dec.v.dim(), 1);
        assert_eq!(dec.v_prime.dim(), 1);
        assert_eq!(dec.pure_types(), (true, false, false));
        let (frame, layout) = admissible_frame(
            &alg,
            &g,
            &j,
            ArithmeticPolicy::RequireExact,
            ZeroTest::Exact,
        )
        .unwrap();
        // D^2_{12} = -i/sqrt2 (0-based: d(1,0,1)), everything else zero.
        let want_d = ComplexScalar::new(Scalar::zero(), -&Scalar::inv_sqrt2());
        assert_eq!(*frame.d_at(1, 0, 1), want_d);
        let t = chern_torsion(&frame);
        let want_t = ComplexScalar::new(Scalar::zero(), Scalar::inv_sqrt2());
        assert_eq!(*t.at(1, 0, 1), want_t);
        assert!((kaehler_defect(&frame) - 0.5f64.sqrt()).abs() < 1e-15);
        // The 2-step constraints hold although the metric is not Kähler.
        assert_eq!(two_step_constraint_defect(&frame, &layout), 0.0);
    }

    #[test]
    fn connection_solver_torsion_matches_closed_formula_exactly() {
        for (alg, g, j) in [e2r(), heis4()] {
            let (frame, _) = admissible_frame(
                &alg,
                &g,
                &j,
                ArithmeticPolicy::RequireExact,
                ZeroTest::Exact,
            )
            .unwrap();
            let t_formula = chern_torsion(&frame);
            let (t_solver, consistency) =
                chern_connection_torsion(&frame, ZeroTest::Exact).unwrap();
            assert_eq!(consistency, 0.0);
            assert_eq!(t_formula.max_diff(&t_solver), 0.0);
        }
    }

    #[test]
    fn torsion_transforms_as_a_tensor_between_frames() {
        let (alg, g, j) = heis4();
        let (f1, _) = admissible_frame(
            &alg,
            &g,
            &j,
            ArithmeticPolicy::RequireExact,
            ZeroTest::Exact,
        )
        .unwrap();
        let f2 = ComplexFrame::complexify(&alg, &g, &j, ZeroTest::Exact).unwrap();
        assert_eq!(torsion_crosscheck(&f1, &f2, ZeroTest::Exact).unwrap(), 0.0);
        // A non-unitary frame: scale one frame vector.
        let mut scaled = f2.evecs.clone();
        for x in scaled[0].iter_mut() {
            *x = x.scale(&Scalar::int(2));
        }
        let f3 = ComplexFrame::from_onezero_vectors(&alg, &g, scaled, ZeroTest::Exact).unwrap();
        assert_eq!(torsion_crosscheck(&f1, &f3, ZeroTest::Exact).unwrap(), 0.0);
    }

    #[test]
    fn proof_suite_is_zero_on_flat_hermitian_input() {
        let (alg, g, j) = e2r();
        let rows = proof_suite(&alg, &g, &j, ArithmeticPolicy::Auto, ZeroTest::Exact).unwrap();
        assert_eq!(rows.len(), 14);
        for row in &rows {
            assert_eq!(row.defect, 0.0, "row {} must vanish", row.name);
        }
        // Middle rows are vacuous here (the derived part is J-invariant).
        let by_name: std::collections::HashMap<_, _> =
            rows.iter().map(|r| (r.name, r.vacuous)).collect();
        assert!(by_name["v_vanishing"]);
        assert!(!by_name["w_vanishing"]);
        assert!(!by_name["skew_adjoint_action"]);
    }

    #[test]
    fn proof_suite_rejects_curved_input() {
        let (alg, g, j) = heis4();
        match proof_suite(&alg, &g, &j, ArithmeticPolicy::Auto, ZeroTest::Exact) {
            Err(Error::NotFlat { defect }) => assert!(defect > 0.5),
            other => panic!("expected NotFlat, got {:?}", other),
        }
    }

    #[test]
    fn non_two_step_solvable_input_is_rejected() {
        // Cross-product algebra plus an abelian factor, dimension 6.
        let one = Scalar::one;
        let alg = LieAlgebra::from_entries(
            6,
            &[(0, 1, 2, one()), (1, 2, 0, one()), (0, 2, 1, -one())],
        )
        .unwrap();
        let g = MetricTensor::identity(6);
        let j = AlmostComplexStructure::standard(6);
        match two_step_constraint_check(&alg, &g, &j, ArithmeticPolicy::Auto, ZeroTest::Exact)
        {
            Err(Error::NotTwoStepSolvable) => {}
            other => panic!("expected NotTwoStepSolvable, got {:?}", other),
        }
    }

    fn synthetic_frame(d: Vec<ComplexScalar>) -> (ComplexFrame, FrameLayout) {
        let n = 2;
        let c = vec![ComplexScalar::zero(); n * n * n];
        let frame = ComplexFrame::from_tensors(n, c, d, CMat::identity(n), ZeroTest::Exact)
            .unwrap();
        (frame, FrameLayout { r: 0, s: 2, n: 2 })
    }

    fn d_tensor(entries: &[(usize, usize, usize, ComplexScalar)]) -> Vec<ComplexScalar> {
        let n = 2;
        let mut d = vec![ComplexScalar::zero(); n * n * n];
        for &(j, i, k, ref v) in entries {
            d[(j * n + i) * n + k] = v.clone();
        }
        d
    }

    fn im(x: i64) -> ComplexScalar {
        ComplexScalar::new(Scalar::zero(), Scalar::int(x))
    }

    #[test]
    fn middle_symmetry_evaluator_detects_asymmetry() {
        // Symmetric pure-imaginary tensor: D^g_{ab} = i for all entries.
        let all_i: Vec<_> = (0..2)
            .flat_map(|j| (0..2).flat_map(move |i| (0..2).map(move |k| (j, i, k, im(1)))))
            .collect();
        let (frame, l) = synthetic_frame(d_tensor(&all_i));
        assert_eq!(rows::middle_symmetry(&frame, &l), 0.0);
        // Breaking the upper/second-lower symmetry is detected.
        let (bad, l2) = synthetic_frame(d_tensor(&[(0, 0, 1, im(1))]));
        assert!(rows::middle_symmetry(&bad, &l2) > 0.9);
        // A real entry breaks pure-imaginarity.
        let (bad2, l3) =
            synthetic_frame(d_tensor(&[(0, 0, 0, ComplexScalar::from_real(Scalar::one()))]));
        assert!(rows::middle_symmetry(&bad2, &l3) > 0.9);
    }

    #[test]
    fn middle_metric_skew_evaluator_detects_symmetric_action() {
        // A_0 = [[0,1],[-1,0]] (skew): D^1_{00} = -i, D^0_{10} = i.
        let (good, l) = synthetic_frame(d_tensor(&[(1, 0, 0, im(-1)), (0, 1, 0, im(1))]));
        assert_eq!(rows::middle_metric_skew(&good, &l), 0.0);
        // A_0 symmetric instead: D^1_{00} = -i, D^0_{10} = -i.
        let (bad, l2) = synthetic_frame(d_tensor(&[(1, 0, 0, im(-1)), (0, 1, 0, im(-1))]));
        assert!(rows::middle_metric_skew(&bad, &l2) > 0.9);
    }

    #[test]
    fn middle_commutation_evaluator_detects_noncommuting_action() {
        // B_0 = diag(1,2), B_1 = diag(3,4): commuting.
        let (good, l) = synthetic_frame(d_tensor(&[
            (0, 0, 0, im(-1)),
            (1, 0, 1, im(-2)),
            (0, 1, 0, im(-3)),
            (1, 1, 1, im(-4)),
        ]));
        assert_eq!(rows::middle_commutation(&good, &l), 0.0);
        // B_0 = diag(1,2), B_1 = [[0,1],[1,0]]: do not commute.
        let (bad, l2) = synthetic_frame(d_tensor(&[
            (0, 0, 0, im(-1)),
            (1, 0, 1, im(-2)),
            (0, 1, 1, im(-1)),
            (1, 1, 0, im(-1)),
        ]));
        assert!(rows::middle_commutation(&bad, &l2) > 0.9);
    }

    #[test]
    fn constraint_defect_detects_corrupted_tensor() {
        let (alg, g, j) = heis4();
        let (frame, layout) = admissible_frame(
            &alg,
            &g,
            &j,
            ArithmeticPolicy::RequireExact,
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
        assert!(two_step_constraint_defect(&bad, &layout) > 1e-3);
    }
}
