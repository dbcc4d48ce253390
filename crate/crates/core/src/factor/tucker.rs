use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FactorError, Tensor3};

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerConfig {
    pub ranks: [usize; 3],
    pub max_iter: usize,
    /// Stop once the fit improves by less than this.
    pub tol: f64,
}

impl Default for TuckerConfig {
    fn default() -> Self {
        TuckerConfig {
            ranks: [3, 2, 3],
            max_iter: 200,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    pub core: Tensor3,
    /// Column-orthonormal factors for modes 0, 1, 2.
    pub factors: [DMatrix<f64>; 3],
    /// `1 - ||X - X̂||² / ||X||²`.
    pub fit: f64,
    /// Fit after initialization and after each accepted iteration.
    pub fit_history: Vec<f64>,
}

impl TuckerModel {
    pub fn reconstruct(&self) -> Tensor3 {
        self.core
            .mode_product(0, &self.factors[0])
            .mode_product(1, &self.factors[1])
            .mode_product(2, &self.factors[2])
    }
}

/// `r` leading left singular vectors of `m`, completed to `r` orthonormal
/// columns when `m` has fewer. Signs are fixed so each column's largest
/// entry is positive.
fn leading_vectors(m: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let d = m.nrows();
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let mut cols: Vec<DVector<f64>> = idx.iter().take(r).map(|&i| u.column(i).into_owned()).collect();
    let mut e = 0;
    while cols.len() < r {
        let mut v = DVector::zeros(d);
        v[e % d] = 1.0;
        e += 1;
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dot(&v);
                v -= c * proj;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v / n);
        }
    }
    for c in cols.iter_mut() {
        let (imax, _) = c.iter().enumerate().fold((0, 0.0f64), |best, (i, x)| {
            if x.abs() > best.1 {
                (i, x.abs())
            } else {
                best
            }
        });
        if c[imax] < 0.0 {
            *c *= -1.0;
        }
    }
    DMatrix::from_columns(&cols)
}

fn project_out(x: &Tensor3, factors: &[DMatrix<f64>; 3], skip: usize) -> Tensor3 {
    let mut y = x.clone();
    for (mode, f) in factors.iter().enumerate() {
        if mode != skip {
            y = y.mode_product(mode, &f.transpose());
        }
    }
    y
}

fn core_and_fit(x: &Tensor3, factors: &[DMatrix<f64>; 3], x_norm2: f64) -> (Tensor3, f64) {
    let core = project_out(x, factors, 3);
    let rec = core
        .mode_product(0, &factors[0])
        .mode_product(1, &factors[1])
        .mode_product(2, &factors[2]);
    let resid: f64 = x
        .data()
        .iter()
        .zip(rec.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let fit = if x_norm2 > 0.0 { 1.0 - resid / x_norm2 } else { 1.0 };
    (core, fit)
}

/// Tucker3 decomposition: HOSVD initialization refined by higher-order
/// orthogonal iteration.
///
/// Iteration stops after `max_iter` sweeps or once a sweep improves the fit
/// by less than `tol`; a sweep that lowers the fit (by rounding) is discarded.
pub fn tucker3(x: &Tensor3, config: &TuckerConfig) -> Result<TuckerModel, FactorError> {
    let dims = x.dims();
    for (&rank, &dim) in config.ranks.iter().zip(&dims) {
        if rank == 0 {
            return Err(FactorError::ZeroRank);
        }
        if rank > dim {
            return Err(FactorError::RankTooLarge { rank, dim });
        }
    }
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(FactorError::NonFinite);
    }
    let x_norm2 = x.norm_squared();

    let mut factors = [0, 1, 2].map(|mode| leading_vectors(&x.unfold(mode), config.ranks[mode]));
    let (mut core, mut fit) = core_and_fit(x, &factors, x_norm2);
    let mut fit_history = vec![fit];

    for _ in 0..config.max_iter {
        let mut next = factors.clone();
        for mode in 0..3 {
            let y = project_out(x, &next, mode);
            next[mode] = leading_vectors(&y.unfold(mode), config.ranks[mode]);
        }
        let (next_core, next_fit) = core_and_fit(x, &next, x_norm2);
        if next_fit < fit {
            break;
        }
        let gain = next_fit - fit;
        factors = next;
        core = next_core;
        fit = next_fit;
        fit_history.push(fit);
        if gain < config.tol {
            break;
        }
    }
    Ok(TuckerModel {
        core,
        factors,
        fit,
        fit_history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Newsmakers,
    Tags,
    Providers,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::Newsmakers => 0,
            Mode::Tags => 1,
            Mode::Providers => 2,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "newsmakers" => Ok(Mode::Newsmakers),
            "tags" => Ok(Mode::Tags),
            "providers" => Ok(Mode::Providers),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

/// Rows of the mode's factor matrix restricted to columns `(i, j)`.
pub fn project(
    model: &TuckerModel,
    mode: Mode,
    (i, j): (usize, usize),
    labels: &[String],
) -> Result<Vec<Projection>, FactorError> {
    let f = &model.factors[mode.index()];
    let rank = f.ncols();
    if i == j || i >= rank || j >= rank {
        return Err(FactorError::BadComponents { i, j, rank });
    }
    Ok((0..f.nrows())
        .map(|r| Projection {
            label: labels.get(r).cloned().unwrap_or_else(|| r.to_string()),
            x: f[(r, i)],
            y: f[(r, j)],
        })
        .collect())
}
