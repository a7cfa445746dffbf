//! Condition numbers, spectra and eigenvalue clusters of slab matrices.

use faer::linalg::solvers::Solve;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Largest dimension handled by dense eigen- and singular value solvers.
pub const DENSE_CAP: usize = 5000;

/// Relative asymmetry accepted as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMethod {
    Dense,
    Lanczos,
}

impl ConditionMethod {
    pub fn name(self) -> &'static str {
        match self {
            ConditionMethod::Dense => "dense",
            ConditionMethod::Lanczos => "lanczos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub method: ConditionMethod,
    /// Lanczos steps (both ends together); 0 on the dense path.
    pub iterations: usize,
}

fn check_symmetric(k: &SparseOperator) -> Result<()> {
    if !k.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", k.nrows(), k.ncols())));
    }
    let scale = k.max_abs();
    let asym = k.asymmetry();
    if scale > 0.0 && asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotSymmetric(asym / scale));
    }
    Ok(())
}

fn check_dense_size(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::SizeCap { size: n, cap: DENSE_CAP });
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn full_spectrum(k: &SparseOperator) -> Result<Vec<f64>> {
    check_symmetric(k)?;
    check_dense_size(k.nrows())?;
    let mut eigs = k
        .to_dense()
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// κ₂ = λ_max/λ_min of a symmetric positive definite matrix.
pub fn condition_number_spd(k: &SparseOperator, method: ConditionMethod) -> Result<ConditionEstimate> {
    check_symmetric(k)?;
    match method {
        ConditionMethod::Dense => {
            let eigs = full_spectrum(k)?;
            let (lo, hi) = (eigs[0], *eigs.last().unwrap());
            if !(lo > 0.0) {
                return Err(Error::NotPositiveDefinite(lo));
            }
            Ok(ConditionEstimate {
                kappa: hi / lo,
                lambda_min: lo,
                lambda_max: hi,
                method,
                iterations: 0,
            })
        }
        ConditionMethod::Lanczos => {
            let opts = LanczosOptions::default();
            let top = lanczos_extreme(|x, y| k.matvec(x, y), k.nrows(), &opts)?;
            // Smallest eigenvalue of K = 1 / largest eigenvalue of K⁻¹.
            let llt = sparse_cholesky(k)?;
            let bottom = lanczos_extreme(
                |x, y| {
                    y.copy_from_slice(x);
                    llt.solve_in_place(faer::MatMut::from_column_major_slice_mut(y, x.len(), 1));
                },
                k.nrows(),
                &opts,
            )?;
            if !(bottom.value > 0.0) {
                return Err(Error::NotPositiveDefinite(bottom.value));
            }
            let lo = 1.0 / bottom.value;
            Ok(ConditionEstimate {
                kappa: top.value / lo,
                lambda_min: lo,
                lambda_max: top.value,
                method,
                iterations: top.steps + bottom.steps,
            })
        }
    }
}

/// Sparse LLᵀ of a symmetric positive definite matrix (lower triangle).
fn sparse_cholesky(k: &SparseOperator) -> Result<faer::sparse::linalg::solvers::Llt<usize, f64>> {
    let triplets: Vec<faer::sparse::Triplet<usize, usize, f64>> = k
        .iter()
        .filter(|&(i, j, _)| i >= j)
        .map(|(i, j, v)| faer::sparse::Triplet::new(i, j, v))
        .collect();
    let lower = faer::sparse::SparseColMat::<usize, f64>::try_new_from_triplets(k.nrows(), k.ncols(), &triplets)
        .map_err(|e| Error::Eigen(format!("sparse matrix construction: {e:?}")))?;
    lower
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| Error::Eigen(format!("Cholesky factorization failed: {e}")))
}

/// σ_max/σ_min for a general square matrix.
pub fn condition_number_general(l: &SparseOperator) -> Result<f64> {
    if !l.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", l.nrows(), l.ncols())));
    }
    check_dense_size(l.nrows())?;
    let sv = l
        .to_dense()
        .singular_values()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lo > 1e-14 * hi) {
        return Err(Error::Singular);
    }
    Ok(hi / lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub tolerance: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_steps: 1000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosResult {
    pub value: f64,
    pub steps: usize,
    pub residual: f64,
}

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization. Stops when the Ritz residual r = |β_k s_k|, which
/// bounds |θ − λ|, falls below `tolerance · |θ|` or the Krylov space is
/// exhausted. The Ritz problem is solved every step for the first 20 steps
/// and every 10th step after that.
pub fn lanczos_extreme(mut apply: impl FnMut(&[f64], &mut [f64]), n: usize, opts: &LanczosOptions) -> Result<LanczosResult> {
    if n == 0 {
        return Err(Error::Dimension("empty operator".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nrm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.iter_mut().for_each(|v| *v /= nrm);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let max_steps = opts.max_steps.min(n);
    let mut last = LanczosResult { value: 0.0, steps: 0, residual: f64::INFINITY };
    for k in 0..max_steps {
        apply(&basis[k], &mut w);
        let a: f64 = w.iter().zip(&basis[k]).map(|(x, y)| x * y).sum();
        alphas.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c: f64 = w.iter().zip(v).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let breakdown = b <= 1e-14 * alphas.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1e-300);
        if breakdown || k < 20 || (k + 1) % 10 == 0 || k + 1 == max_steps {
            let m = alphas.len();
            let t = faer::Mat::from_fn(m, m, |i, j| {
                if i == j {
                    alphas[i]
                } else if i + 1 == j {
                    betas[i]
                } else if j + 1 == i {
                    betas[j]
                } else {
                    0.0
                }
            });
            let eig = t
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| Error::Eigen(format!("Ritz problem: {e:?}")))?;
            // ascending order: the largest Ritz pair is the last column
            let theta = eig.S()[m - 1];
            let residual = (b * eig.U()[(m - 1, m - 1)]).abs();
            last = LanczosResult { value: theta, steps: k + 1, residual };
            if residual <= opts.tolerance * theta.abs() || breakdown {
                return Ok(last);
            }
        }
        betas.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
    }
    if last.steps == n {
        return Ok(last);
    }
    Err(Error::NoConvergence {
        method: "lanczos",
        iterations: last.steps,
        residual: last.residual / last.value.abs(),
    })
}

/// Min–max map onto [0, 1]. The flag is set when all values coincide, in
/// which case every entry maps to 0.
pub fn normalize_spectrum(eigenvalues: &[f64]) -> (Vec<f64>, bool) {
    let lo = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if eigenvalues.is_empty() || !(hi > lo) {
        return (vec![0.0; eigenvalues.len()], true);
    }
    let span = hi - lo;
    (eigenvalues.iter().map(|&l| (l - lo) / span).collect(), false)
}

/// Splits a sorted list wherever consecutive values differ by more than
/// `gap`; each cluster is reported as (first, last).
pub fn detect_clusters(normalized: &[f64], gap: f64) -> Vec<(f64, f64)> {
    let mut clusters = Vec::new();
    let Some(&first) = normalized.first() else {
        return clusters;
    };
    let (mut lo, mut hi) = (first, first);
    for &x in &normalized[1..] {
        if x - hi > gap {
            clusters.push((lo, hi));
            lo = x;
        }
        hi = x;
    }
    clusters.push((lo, hi));
    clusters
}

/// Σ (hi − lo) over the clusters.
pub fn cluster_compactness(clusters: &[(f64, f64)]) -> f64 {
    clusters.iter().map(|(lo, hi)| hi - lo).sum()
}

/// Index of the cluster containing each normalized eigenvalue.
pub fn cluster_ids(normalized: &[f64], clusters: &[(f64, f64)]) -> Vec<usize> {
    let mut id = 0;
    normalized
        .iter()
        .map(|&x| {
            while x > clusters[id].1 {
                id += 1;
            }
            id
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub label: String,
    pub tau: f64,
    pub gamma0: Option<f64>,
    pub consistency: Option<i32>,
    pub degree: usize,
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub normalized: Vec<f64>,
    pub clusters: Vec<(f64, f64)>,
    pub condition_number: f64,
}

impl SpectrumReport {
    pub fn compactness(&self) -> f64 {
        cluster_compactness(&self.clusters)
    }

    pub fn cluster_ids(&self) -> Vec<usize> {
        cluster_ids(&self.normalized, &self.clusters)
    }
}

/// Dense spectrum, normalization and clusters of a symmetric matrix.
pub fn analyze_spectrum(k: &SparseOperator, gap: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<(f64, f64)>, f64)> {
    let eigs = full_spectrum(k)?;
    let (normalized, _) = normalize_spectrum(&eigs);
    let clusters = detect_clusters(&normalized, gap);
    let kappa = eigs.last().unwrap() / eigs[0];
    Ok((eigs, normalized, clusters, kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(d: &[f64]) -> SparseOperator {
        SparseOperator::from_diagonal(d)
    }

    #[test]
    fn spd_condition_examples() {
        let e = condition_number_spd(&SparseOperator::identity(4), ConditionMethod::Dense).unwrap();
        assert!((e.kappa - 1.0).abs() < 1e-14);
        let e = condition_number_spd(&diag(&[1.0, 10.0, 100.0]), ConditionMethod::Dense).unwrap();
        assert!((e.kappa - 100.0).abs() < 1e-10);
        let e = condition_number_spd(&diag(&[1.0, 10.0, 100.0]), ConditionMethod::Lanczos).unwrap();
        assert!((e.kappa - 100.0).abs() < 1e-8);
        assert!(matches!(
            condition_number_spd(&diag(&[-1.0, 2.0]), ConditionMethod::Dense),
            Err(Error::NotPositiveDefinite(_))
        ));
        let nonsym = SparseOperator::from_dense(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(condition_number_spd(&nonsym, ConditionMethod::Dense), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn general_condition_examples() {
        let perm = SparseOperator::from_dense(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert!((condition_number_general(&perm).unwrap() - 1.0).abs() < 1e-12);
        assert!((condition_number_general(&diag(&[2.0, 1.0])).unwrap() - 2.0).abs() < 1e-12);
        let l = SparseOperator::from_dense(2, 2, &[-0.5, 1.0, 1.0, 0.5]);
        assert!((condition_number_general(&l).unwrap() - 1.0).abs() < 1e-12);
        let singular = SparseOperator::from_dense(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(condition_number_general(&singular), Err(Error::Singular)));
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(full_spectrum(&diag(&[3.0, 1.0, 2.0])).unwrap(), vec![1.0, 2.0, 3.0]);
        let s = full_spectrum(&SparseOperator::from_dense(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
        assert!(matches!(
            full_spectrum(&SparseOperator::identity(DENSE_CAP + 1)),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_spectrum(&[2.0, 4.0, 6.0]), (vec![0.0, 0.5, 1.0], false));
        assert_eq!(normalize_spectrum(&[1.0, 3.0]), (vec![0.0, 1.0], false));
        assert_eq!(normalize_spectrum(&[5.0, 5.0]), (vec![0.0, 0.0], true));
    }

    #[test]
    fn cluster_examples() {
        let c = detect_clusters(&[0.0, 0.001, 0.5, 0.51, 1.0], 0.1);
        assert_eq!(c, vec![(0.0, 0.001), (0.5, 0.51), (1.0, 1.0)]);
        assert_eq!(detect_clusters(&[0.5], 0.3), vec![(0.5, 0.5)]);
        assert_eq!(cluster_compactness(&[(0.0, 1.0)]), 1.0);
        assert!((cluster_compactness(&[(0.0, 0.001), (0.999, 1.0)]) - 0.002).abs() < 1e-15);
        assert_eq!(cluster_ids(&[0.0, 0.001, 0.5, 0.51, 1.0], &c), vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn lanczos_matches_dense_on_laplacian() {
        let n = 200;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 2.0 + 0.01 * i as f64;
            if i > 0 {
                d[i * n + i - 1] = -1.0;
                d[(i - 1) * n + i] = -1.0;
            }
        }
        let k = SparseOperator::from_dense(n, n, &d);
        let dense = condition_number_spd(&k, ConditionMethod::Dense).unwrap();
        let lanczos = condition_number_spd(&k, ConditionMethod::Lanczos).unwrap();
        assert!((dense.kappa - lanczos.kappa).abs() < 1e-6 * dense.kappa);
    }

    #[test]
    fn lanczos_rejects_indefinite_matrices() {
        let k = SparseOperator::from_diagonal(&[-1.0, 2.0, 3.0]);
        assert!(condition_number_spd(&k, ConditionMethod::Lanczos).is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_affine_invariant(
            mut v in proptest::collection::vec(-100.0f64..100.0, 2..30),
            a in 0.1f64..10.0,
            b in -50.0f64..50.0,
        ) {
            v.sort_by(f64::total_cmp);
            prop_assume!(v.last().unwrap() - v[0] > 1e-3);
            let (n1, _) = normalize_spectrum(&v);
            let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let (n2, _) = normalize_spectrum(&w);
            for (x, y) in n1.iter().zip(&n2) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn clusters_cover_every_value(
            mut v in proptest::collection::vec(0.0f64..1.0, 1..50),
            gap in 0.001f64..0.5,
        ) {
            v.sort_by(f64::total_cmp);
            let c = detect_clusters(&v, gap);
            for w in c.windows(2) {
                prop_assert!(w[0].1 < w[1].0);
                prop_assert!(w[1].0 - w[0].1 > gap);
            }
            let ids = cluster_ids(&v, &c);
            for (x, id) in v.iter().zip(ids) {
                prop_assert!(c[id].0 <= *x && *x <= c[id].1);
            }
        }
    }
}
