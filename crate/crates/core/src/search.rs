//! Randomized search for integrable compatible complex structures on a
//! metric Lie algebra.
//!
//! The metric is first gauged away: structure constants are rewritten in a
//! g-orthonormal basis, so the compatible candidates form the manifold of
//! skew-symmetric orthogonal matrices (`J^T J = I`, `J^T = -J`, hence
//! `J² = -I`). Each sample draws a random point on that manifold and runs
//! projected gradient descent on the squared Nijenhuis norm, with an
//! analytic Euclidean gradient, projection onto the tangent space
//! `{A skew : AJ + JA = 0}`, and retraction through the orthogonal polar
//! factor (which preserves skewness). Converged candidates are pulled back
//! to the original basis and their Chern torsion is measured through a
//! unitary frame, classifying each find as Kähler or non-Kähler.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmat::{self, FMat};
use crate::hermitian::{kaehler_defect, unitary_frame};
use crate::lie::{AlmostComplexStructure, LieAlgebra, MetricTensor};
use crate::mat::{RMat, ZeroTest};
use crate::scalar::{ArithmeticPolicy, Scalar};

/// Tolerance on the manifold invariants (`J^T J - I`, `J + J^T`) that every
/// produced candidate must satisfy; violating it is an internal error.
pub const MANIFOLD_TOLERANCE: f64 = 1e-12;

/// Residual Nijenhuis defect the descent keeps polishing toward even after
/// crossing the classification threshold; convergence is still judged
/// against [`SearchConfig::integrability_threshold`] afterwards.
const DESCENT_FLOOR: f64 = 1e-13;

/// Parameters for [`search_integrable`].
#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Number of independent descent runs.
    pub samples: usize,
    /// Iteration cap per run.
    pub max_iters: usize,
    /// Initial (and maximal growth base) line-search step.
    pub step: f64,
    /// Max-norm Nijenhuis defect below which a run counts as integrable.
    pub integrability_threshold: f64,
    /// Chern-torsion max-norm above which an integrable find is non-Kähler.
    pub torsion_threshold: f64,
    /// Base seed; each sample derives its own generator from it.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            samples: 100,
            max_iters: 2000,
            step: 0.1,
            integrability_threshold: 1e-10,
            torsion_threshold: 1e-8,
            seed: 0,
        }
    }
}

/// Result of one descent run.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    /// Index of the run (stable across thread schedules).
    pub index: usize,
    /// Whether the final defect fell below the integrability threshold.
    pub converged: bool,
    /// Final max-norm Nijenhuis defect, measured in the orthonormal gauge.
    pub defect: f64,
    /// Outer iterations executed.
    pub iterations: usize,
    /// Chern torsion max-norm of the converged candidate (None when the run
    /// did not converge).
    pub torsion: Option<f64>,
    /// The converged candidate in the orthonormal gauge basis.
    pub j_gauge: Option<FMat>,
}

/// Aggregate of a full search run.
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub dim: usize,
    pub outcomes: Vec<SampleOutcome>,
    /// Runs whose defect fell below the integrability threshold.
    pub integrable: usize,
    /// Integrable runs whose torsion exceeds the torsion threshold.
    pub non_kahler_integrable: usize,
}

/// Structure constants in a g-orthonormal basis together with the change of
/// basis back to the original coordinates.
struct Gauge {
    n: usize,
    /// `c[m][i][j]` flattened as `m*n*n + i*n + j`.
    c: Vec<f64>,
    /// Columns are the orthonormal basis vectors in original coordinates.
    basis: FMat,
    basis_inv: FMat,
}

impl Gauge {
    #[inline]
    fn c_at(&self, m: usize, i: usize, j: usize) -> f64 {
        self.c[(m * self.n + i) * self.n + j]
    }
}

fn gauge(alg: &LieAlgebra, g: &MetricTensor) -> Result<Gauge> {
    let n = alg.dim;
    let mut gf = FMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gf.set(i, j, g.entry(i, j).to_f64());
        }
    }
    let l = fmat::cholesky(&gf).ok_or_else(|| {
        Error::InvalidInput("metric is not positive definite at float precision".into())
    })?;
    // basis = L^{-T}: then basis^T g basis = I, and basis_inv = L^T.
    let linv = l
        .inverse(1e-300)
        .ok_or_else(|| Error::InvalidInput("metric factor is numerically singular".into()))?;
    let basis = linv.transpose();
    let basis_inv = l.transpose();

    let mut raw = vec![0.0f64; n * n * n];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                raw[(m * n + i) * n + j] = alg.c(m, i, j).to_f64();
            }
        }
    }
    // c'[m][i][j] = sum_k basis_inv[m][k] * sum_{a,b} raw[k][a][b] B[a][i] B[b][j]
    let mut half = vec![0.0f64; n * n * n]; // [k][i][j] after contracting both lower slots
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                let v = raw[(k * n + a) * n + b];
                if v == 0.0 {
                    continue;
                }
                for i in 0..n {
                    let ba = basis.at(a, i);
                    if ba == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        half[(k * n + i) * n + j] += v * ba * basis.at(b, j);
                    }
                }
            }
        }
    }
    let mut c = vec![0.0f64; n * n * n];
    for m in 0..n {
        for k in 0..n {
            let w = basis_inv.at(m, k);
            if w == 0.0 {
                continue;
            }
            for ij in 0..n * n {
                c[m * n * n + ij] += w * half[k * n * n + ij];
            }
        }
    }
    Ok(Gauge {
        n,
        c,
        basis,
        basis_inv,
    })
}

/// The Nijenhuis tensor of a candidate in the gauge basis, plus the
/// contractions reused by the gradient.
struct NijenhuisData {
    /// `N^m_{ij}` flattened like the structure constants.
    nt: Vec<f64>,
    /// `R[m][p][q] = sum_l c^m_{pl} J_{lq}` (second bracket slot contracted).
    r: Vec<f64>,
    /// `L[m][p][q] = sum_k c^m_{kp} J_{kq}` (first bracket slot contracted).
    l: Vec<f64>,
    /// `T[m][a][b] = sum_t J_{mt} c^t_{ab}` (output slot contracted).
    t: Vec<f64>,
    /// Max-norm of `N` over basis pairs.
    defect: f64,
    /// Sum of squares of `N^m_{ij}` over `i < j`.
    objective: f64,
}

fn nijenhuis_data(gauge: &Gauge, j: &FMat) -> NijenhuisData {
    let n = gauge.n;
    let idx = |m: usize, a: usize, b: usize| (m * n + a) * n + b;
    let mut r = vec![0.0f64; n * n * n];
    let mut l = vec![0.0f64; n * n * n];
    let mut t = vec![0.0f64; n * n * n];
    for m in 0..n {
        for a in 0..n {
            for b in 0..n {
                let v = gauge.c_at(m, a, b);
                if v == 0.0 {
                    continue;
                }
                for q in 0..n {
                    // c^m_{a b} contributes to R[m][a][q] via J_{b q} ...
                    r[idx(m, a, q)] += v * j.at(b, q);
                    // ... to L[m][b][q] via J_{a q} ...
                    l[idx(m, b, q)] += v * j.at(a, q);
                    // ... and to T[q][a][b] via J_{q m}.
                    t[idx(q, a, b)] += j.at(q, m) * v;
                }
            }
        }
    }
    // N^m_{ij} = c^m_{ij} - sum_k J_{ki} R[m][k][j]
    //          + sum_k J_{ki} T[m][k][j] + sum_l J_{lj} T[m][i][l]
    let mut nt = vec![0.0f64; n * n * n];
    let mut defect: f64 = 0.0;
    let mut objective = 0.0;
    for m in 0..n {
        for i in 0..n {
            for jj in (i + 1)..n {
                let mut v = gauge.c_at(m, i, jj);
                for k in 0..n {
                    let jk = j.at(k, i);
                    if jk != 0.0 {
                        v += jk * (t[idx(m, k, jj)] - r[idx(m, k, jj)]);
                    }
                    let jl = j.at(k, jj);
                    if jl != 0.0 {
                        v += jl * t[idx(m, i, k)];
                    }
                }
                nt[idx(m, i, jj)] = v;
                nt[idx(m, jj, i)] = -v;
                defect = defect.max(v.abs());
                objective += v * v;
            }
        }
    }
    NijenhuisData {
        nt,
        r,
        l,
        t,
        defect,
        objective,
    }
}

/// Euclidean gradient of the squared Nijenhuis norm with respect to the
/// entries of `J`, from
/// `dN^m_{ij}/dJ_{pq} = δ_{qi}(T[m][p][j] - R[m][p][j])
///                    + δ_{qj}(T[m][i][p] - L[m][p][i])
///                    + δ_{mp}(L[q][j][i] + R[q][i][j])`.
fn euclidean_gradient(gauge: &Gauge, nd: &NijenhuisData) -> FMat {
    let n = gauge.n;
    let idx = |m: usize, a: usize, b: usize| (m * n + a) * n + b;
    let mut grad = FMat::zeros(n, n);
    for m in 0..n {
        for i in 0..n {
            for jj in (i + 1)..n {
                let nv = nd.nt[idx(m, i, jj)];
                if nv == 0.0 {
                    continue;
                }
                let w = 2.0 * nv;
                for p in 0..n {
                    grad.data[p * n + i] += w * (nd.t[idx(m, p, jj)] - nd.r[idx(m, p, jj)]);
                    grad.data[p * n + jj] += w * (nd.t[idx(m, i, p)] - nd.l[idx(m, p, i)]);
                    grad.data[m * n + p] += w * (nd.l[idx(p, jj, i)] + nd.r[idx(p, i, jj)]);
                }
            }
        }
    }
    grad
}

/// Orthogonal projection of an ambient matrix onto the tangent space of the
/// skew-orthogonal manifold at `j`: the skew-symmetric part of the
/// `J`-anticommuting part.
fn tangent_project(j: &FMat, a: &FMat) -> FMat {
    let jaj = j.matmul(a).matmul(j);
    let anti = a.add(&jaj).scale(0.5);
    anti.sub(&anti.transpose()).scale(0.5)
}

/// Retraction onto the manifold: skew-symmetrize, then take the orthogonal
/// polar factor (skewness is preserved by the polar iteration).
fn retract(m: &FMat) -> Option<FMat> {
    let skew = m.sub(&m.transpose()).scale(0.5);
    fmat::polar_orthogonal(&skew)
}

/// Max-norm violation of the manifold constraints `J^T J = I` and
/// `J^T = -J`.
pub fn manifold_defect(j: &FMat) -> f64 {
    let ortho = fmat::orthogonality_defect(j);
    let skew = j.add(&j.transpose()).max_abs();
    ortho.max(skew)
}

/// A uniform-ish random point on the skew-orthogonal manifold: the polar
/// factor of a random skew-symmetric matrix. Requires even dimension (odd
/// skew matrices are singular).
pub fn random_compatible_j<R: Rng>(rng: &mut R, n: usize) -> FMat {
    assert!(n % 2 == 0, "skew-orthogonal matrices need even dimension");
    loop {
        let mut skew = FMat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(-1.0..1.0);
                skew.set(i, j, v);
                skew.set(j, i, -v);
            }
        }
        if let Some(q) = fmat::polar_orthogonal(&skew) {
            if manifold_defect(&q) < MANIFOLD_TOLERANCE {
                return q;
            }
        }
    }
}

/// SplitMix64-style hash mixing the base seed with the sample index, so
/// samples are independent and the whole run is reproducible regardless of
/// thread scheduling.
fn sample_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn descend(gauge: &Gauge, seed: u64, config: &SearchConfig) -> (SampleOutcome, FMat) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = random_compatible_j(&mut rng, gauge.n);
    let mut nd = nijenhuis_data(gauge, &j);
    let mut step = config.step;
    let mut iterations = 0;
    // Keep descending well past the classification threshold: defects that
    // merely graze it leave downstream quantities (torsion, identity rows)
    // an order of magnitude noisier than necessary, since those scale
    // linearly with the residual defect near a solution.
    let floor = config.integrability_threshold.min(DESCENT_FLOOR);
    for _ in 0..config.max_iters {
        if nd.defect < floor {
            break;
        }
        iterations += 1;
        let grad = euclidean_gradient(gauge, &nd);
        let dir = tangent_project(&j, &grad).scale(-1.0);
        let dir_norm2: f64 = dir.data.iter().map(|x| x * x).sum();
        if dir_norm2 < 1e-30 {
            break;
        }
        let mut accepted = false;
        let mut first_try = true;
        for _ in 0..60 {
            if let Some(cand) = retract(&j.add(&dir.scale(step))) {
                let cd = nijenhuis_data(gauge, &cand);
                if cd.objective <= nd.objective - 1e-4 * step * dir_norm2 {
                    j = cand;
                    nd = cd;
                    accepted = true;
                    if first_try {
                        step = (step * 1.5).min(config.step * 8.0);
                    }
                    break;
                }
            }
            first_try = false;
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    let md = manifold_defect(&j);
    assert!(
        md < MANIFOLD_TOLERANCE,
        "descent left the skew-orthogonal manifold (defect {md:.3e})"
    );
    let converged = nd.defect < config.integrability_threshold;
    (
        SampleOutcome {
            index: 0,
            converged,
            defect: nd.defect,
            iterations,
            torsion: None,
            j_gauge: if converged { Some(j.clone()) } else { None },
        },
        j,
    )
}

fn acs_from_fmat(m: &FMat) -> AlmostComplexStructure {
    let rows: Vec<Vec<Scalar>> = (0..m.rows)
        .map(|i| (0..m.cols).map(|j| Scalar::Float(m.at(i, j))).collect())
        .collect();
    AlmostComplexStructure::new(RMat::from_rows(rows))
}

/// Run the full randomized search. Every converged candidate is pulled back
/// to the original basis, validated against the metric, and classified by
/// its Chern torsion.
pub fn search_integrable(
    alg: &LieAlgebra,
    g: &MetricTensor,
    config: &SearchConfig,
) -> Result<SearchReport> {
    if alg.dim != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "algebra has dimension {} but metric is {0}x{1}",
            alg.dim,
            g.dim()
        )));
    }
    if alg.dim % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "complex structures need even dimension, got {}",
            alg.dim
        )));
    }
    let gauge = gauge(alg, g)?;
    let alg_f = alg.to_float();
    let g_f = g.to_float();
    let outcomes: Result<Vec<SampleOutcome>> = (0..config.samples)
        .into_par_iter()
        .map(|index| {
            let seed = sample_seed(config.seed, index as u64);
            let (mut outcome, j_gauge) = descend(&gauge, seed, config);
            outcome.index = index;
            if outcome.converged {
                let j_orig = gauge.basis.matmul(&j_gauge).matmul(&gauge.basis_inv);
                let acs = acs_from_fmat(&j_orig);
                let frame = unitary_frame(
                    &alg_f,
                    &g_f,
                    &acs,
                    ArithmeticPolicy::Auto,
                    ZeroTest::Tol(1e-6),
                )?;
                outcome.torsion = Some(kaehler_defect(&frame));
            }
            Ok(outcome)
        })
        .collect();
    let outcomes = outcomes?;
    let integrable = outcomes.iter().filter(|o| o.converged).count();
    let non_kahler_integrable = outcomes
        .iter()
        .filter(|o| o.converged && o.torsion.map_or(false, |t| t > config.torsion_threshold))
        .count();
    Ok(SearchReport {
        dim: alg.dim,
        outcomes,
        integrable,
        non_kahler_integrable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    fn test_config(samples: usize, seed: u64) -> SearchConfig {
        SearchConfig {
            samples,
            seed,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let (alg, g, _) = samples::heis4();
        let gauge = gauge(&alg, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let j = random_compatible_j(&mut rng, 4);
        let nd = nijenhuis_data(&gauge, &j);
        let grad = euclidean_gradient(&gauge, &nd);
        let h = 1e-6;
        for p in 0..4 {
            for q in 0..4 {
                let mut plus = j.clone();
                plus.set(p, q, plus.at(p, q) + h);
                let mut minus = j.clone();
                minus.set(p, q, minus.at(p, q) - h);
                let fp = nijenhuis_data(&gauge, &plus).objective;
                let fm = nijenhuis_data(&gauge, &minus).objective;
                let fd = (fp - fm) / (2.0 * h);
                let an = grad.at(p, q);
                let scale = 1.0f64.max(an.abs());
                assert!(
                    (fd - an).abs() / scale < 1e-5,
                    "gradient mismatch at ({p},{q}): analytic {an:.8e} vs fd {fd:.8e}"
                );
            }
        }
    }

    #[test]
    fn gradient_check_on_a_gauged_metric() {
        // Non-identity metric: the finite-difference check must still pass on
        // the gauged structure constants.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (alg0, _, _) = samples::heis4();
        let p = samples::random_unipotent(&mut rng, 4);
        let (alg, g, _) =
            samples::conjugate(&alg0, &MetricTensor::identity(4), None, &p).unwrap();
        let gauge = gauge(&alg, &g).unwrap();
        let j = random_compatible_j(&mut rng, 4);
        let nd = nijenhuis_data(&gauge, &j);
        let grad = euclidean_gradient(&gauge, &nd);
        let h = 1e-6;
        for p in 0..4 {
            for q in 0..4 {
                let mut plus = j.clone();
                plus.set(p, q, plus.at(p, q) + h);
                let mut minus = j.clone();
                minus.set(p, q, minus.at(p, q) - h);
                let fd = (nijenhuis_data(&gauge, &plus).objective
                    - nijenhuis_data(&gauge, &minus).objective)
                    / (2.0 * h);
                let an = grad.at(p, q);
                assert!(
                    (fd - an).abs() / 1.0f64.max(an.abs()) < 1e-5,
                    "gauged gradient mismatch at ({p},{q})"
                );
            }
        }
    }

    #[test]
    fn projection_lands_in_the_tangent_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let j = random_compatible_j(&mut rng, 6);
        let mut a = FMat::zeros(6, 6);
        for v in a.data.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let p = tangent_project(&j, &a);
        // Tangent vectors are skew and anticommute with J.
        assert!(p.add(&p.transpose()).max_abs() < 1e-13);
        let comm = p.matmul(&j).add(&j.matmul(&p));
        assert!(comm.max_abs() < 1e-12);
        // Idempotence.
        let pp = tangent_project(&j, &p);
        assert!(pp.sub(&p).max_abs() < 1e-12);
    }

    #[test]
    fn retraction_lands_on_the_manifold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = random_compatible_j(&mut rng, 6);
        assert!(manifold_defect(&j) < MANIFOLD_TOLERANCE);
        // Perturb the point and retract back.
        let mut a = j.clone();
        for v in a.data.iter_mut() {
            *v += rng.gen_range(-0.2..0.2);
        }
        let r = retract(&a).unwrap();
        assert!(manifold_defect(&r) < MANIFOLD_TOLERANCE);
        let sq = r.matmul(&r).add(&FMat::identity(6));
        assert!(sq.max_abs() < 1e-12);
    }

    #[test]
    fn search_on_the_rotation_algebra_finds_kaehler_structures() {
        let (alg, g, _) = samples::e2r();
        let report = search_integrable(&alg, &g, &test_config(8, 1)).unwrap();
        assert!(report.integrable > 0, "no descent converged on a flat algebra");
        assert_eq!(
            report.non_kahler_integrable, 0,
            "flat metric produced a non-Kähler integrable structure"
        );
        for o in &report.outcomes {
            if o.converged {
                assert!(o.defect < 1e-10);
                assert!(o.torsion.unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn search_on_the_central_extension_always_finds_torsion() {
        // This algebra is nilpotent and non-abelian, so no compatible complex
        // structure can be Kähler; every converged run must carry torsion.
        let (alg, g, _) = samples::heis4();
        let report = search_integrable(&alg, &g, &test_config(8, 2)).unwrap();
        assert!(report.integrable > 0, "no descent converged");
        assert_eq!(
            report.non_kahler_integrable, report.integrable,
            "a converged run on a non-Kähler algebra reported vanishing torsion"
        );
        for o in &report.outcomes {
            if let Some(t) = o.torsion {
                assert!(t > 1e-4, "torsion suspiciously small: {t:.3e}");
            }
        }
    }

    #[test]
    fn search_handles_a_non_identity_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (alg0, g0, _) = samples::e2r();
        let p = samples::random_unipotent(&mut rng, 4);
        let (alg, g, _) = samples::conjugate(&alg0, &g0, None, &p).unwrap();
        let report = search_integrable(&alg, &g, &test_config(6, 3)).unwrap();
        assert!(report.integrable > 0);
        assert_eq!(report.non_kahler_integrable, 0);
    }

    #[test]
    fn abelian_input_converges_immediately_with_zero_torsion() {
        let (alg, g) = samples::abelian(6);
        let report = search_integrable(&alg, &g, &test_config(4, 4)).unwrap();
        assert_eq!(report.integrable, 4);
        assert_eq!(report.non_kahler_integrable, 0);
        for o in &report.outcomes {
            assert_eq!(o.iterations, 0);
            assert!(o.torsion.unwrap() < 1e-12);
        }
    }

    #[test]
    fn identical_configs_reproduce_identical_reports() {
        let (alg, g, _) = samples::heis4();
        let a = search_integrable(&alg, &g, &test_config(6, 42)).unwrap();
        let b = search_integrable(&alg, &g, &test_config(6, 42)).unwrap();
        assert_eq!(a.integrable, b.integrable);
        assert_eq!(a.non_kahler_integrable, b.non_kahler_integrable);
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.index, y.index);
            assert_eq!(x.converged, y.converged);
            assert_eq!(x.defect.to_bits(), y.defect.to_bits());
            assert_eq!(x.iterations, y.iterations);
            assert_eq!(x.torsion.map(f64::to_bits), y.torsion.map(f64::to_bits));
        }
    }

    #[test]
    fn odd_dimension_is_rejected() {
        let (alg, g) = samples::abelian(3);
        match search_integrable(&alg, &g, &test_config(1, 0)) {
            Err(Error::InvalidInput(_)) => {}
            other => panic!("expected InvalidInput, got {other:?}"),
        }
    }
}
