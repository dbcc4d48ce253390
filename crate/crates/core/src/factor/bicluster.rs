use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FactorError;

#[derive(Debug, Clone, PartialEq)]
pub struct BiclusterConfig {
    pub k: usize,
    /// L1 penalty on both loading vectors.
    pub sparsity: f64,
    pub max_iter: usize,
    /// Stop once the objective changes by less than this fraction.
    pub tol: f64,
    pub seed: u64,
}

impl Default for BiclusterConfig {
    fn default() -> Self {
        BiclusterConfig {
            k: 5,
            sparsity: 0.01,
            max_iter: 500,
            tol: 1e-6,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiclusterFactor {
    pub row_loadings: Vec<f64>,
    pub col_loadings: Vec<f64>,
    /// Share of the matrix's squared norm explained by this factor alone.
    pub cohesiveness: f64,
    pub top_rows: Vec<usize>,
    pub top_cols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiclusterResult {
    /// Sorted by cohesiveness, descending.
    pub factors: Vec<BiclusterFactor>,
    /// Objective after initialization and after each sweep.
    pub objective: Vec<f64>,
}

/// TF-IDF weighting (smoothed idf) followed by L2 normalization of each row.
pub fn tfidf_row_normalize(counts: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = counts.shape();
    let idf: Vec<f64> = (0..n)
        .map(|j| {
            let df = counts.column(j).iter().filter(|&&x| x > 0.0).count();
            ((1.0 + m as f64) / (1.0 + df as f64)).ln() + 1.0
        })
        .collect();
    let mut out = DMatrix::from_fn(m, n, |i, j| counts[(i, j)] * idf[j]);
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// `½‖X − Σ λ_k z_kᵀ‖² + s Σ (‖λ_k‖₁ + ‖z_k‖₁)`.
pub fn bicluster_objective(
    x: &DMatrix<f64>,
    rows: &[DVector<f64>],
    cols: &[DVector<f64>],
    sparsity: f64,
) -> f64 {
    let mut r = x.clone();
    for (l, z) in rows.iter().zip(cols) {
        r -= l * z.transpose();
    }
    let l1: f64 = rows.iter().chain(cols).map(|v| v.lp_norm(1)).sum();
    0.5 * r.norm_squared() + sparsity * l1
}

fn top_indices(v: &[f64]) -> Vec<usize> {
    let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let n = abs.len() as f64;
    let mean = abs.iter().sum::<f64>() / n;
    let sd = (abs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    abs.iter()
        .enumerate()
        .filter(|(_, a)| **a > mean + sd)
        .map(|(i, _)| i)
        .collect()
}

/// Rank-`k` sparse factorization `X ≈ Σ λ_k z_kᵀ`.
///
/// Starts from the truncated SVD (factors with a vanishing singular value
/// start from small seeded random vectors) and applies exact block updates
/// `λ_k = S(R_k z_k, s) / ‖z_k‖²`, `z_k = S(R_kᵀ λ_k, s) / ‖λ_k‖²`, where `R_k`
/// is the residual without factor `k` and `S` is soft thresholding. Each
/// update minimizes the objective in its block, so the objective never
/// increases.
pub fn bicluster(x: &DMatrix<f64>, config: &BiclusterConfig) -> Result<BiclusterResult, FactorError> {
    let (m, n) = x.shape();
    if config.k == 0 {
        return Err(FactorError::ZeroRank);
    }
    if config.k > m.min(n) {
        return Err(FactorError::RankTooLarge {
            rank: config.k,
            dim: m.min(n),
        });
    }
    for i in 0..m {
        for j in 0..n {
            let v = x[(i, j)];
            if !v.is_finite() {
                return Err(FactorError::NonFinite);
            }
            if v < 0.0 {
                return Err(FactorError::Negative(i, j));
            }
        }
    }

    let svd = x.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("U"), svd.v_t.expect("V^T"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let scale = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(config.k);
    let mut cols = Vec::with_capacity(config.k);
    for &idx in order.iter().take(config.k) {
        let s = svd.singular_values[idx];
        if s > 1e-12 * scale.max(1.0) {
            let mut l = u.column(idx) * s.sqrt();
            let mut z = vt.row(idx).transpose() * s.sqrt();
            if z.sum() < 0.0 {
                l = -l;
                z = -z;
            }
            rows.push(l);
            cols.push(z);
        } else {
            rows.push(DVector::from_fn(m, |_, _| rng.random_range(0.0..1e-3)));
            cols.push(DVector::from_fn(n, |_, _| rng.random_range(0.0..1e-3)));
        }
    }

    let mut objective = vec![bicluster_objective(x, &rows, &cols, config.sparsity)];
    let mut residual = x.clone();
    for (l, z) in rows.iter().zip(&cols) {
        residual -= l * z.transpose();
    }
    for _ in 0..config.max_iter {
        for k in 0..config.k {
            // residual with factor k added back
            residual += &rows[k] * cols[k].transpose();
            let zn = cols[k].norm_squared();
            rows[k] = if zn > 0.0 {
                (&residual * &cols[k]).map(|v| soft_threshold(v, config.sparsity) / zn)
            } else {
                DVector::zeros(m)
            };
            let ln = rows[k].norm_squared();
            cols[k] = if ln > 0.0 {
                (residual.transpose() * &rows[k]).map(|v| soft_threshold(v, config.sparsity) / ln)
            } else {
                DVector::zeros(n)
            };
            residual -= &rows[k] * cols[k].transpose();
        }
        let f = bicluster_objective(x, &rows, &cols, config.sparsity);
        let prev = *objective.last().expect("initial objective");
        objective.push(f);
        if (prev - f).abs() <= config.tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let total = x.norm_squared();
    let mut factors: Vec<BiclusterFactor> = rows
        .into_iter()
        .zip(cols)
        .map(|(l, z)| {
            let cohesiveness = if total > 0.0 {
                (1.0 - (x - &l * z.transpose()).norm_squared() / total).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let row_loadings: Vec<f64> = l.iter().copied().collect();
            let col_loadings: Vec<f64> = z.iter().copied().collect();
            BiclusterFactor {
                top_rows: top_indices(&row_loadings),
                top_cols: top_indices(&col_loadings),
                row_loadings,
                col_loadings,
                cohesiveness,
            }
        })
        .collect();
    // stable: equal cohesiveness keeps SVD order
    factors.sort_by(|a, b| b.cohesiveness.total_cmp(&a.cohesiveness));
    Ok(BiclusterResult { factors, objective })
}
