use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Principal axes of a point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows, largest variance first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Input rows projected onto `components`.
    pub projections: Vec<Vec<f64>>,
}

impl Pca {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }
}

/// Eigendecomposition of the mean-centred covariance of `data` (`n × h`,
/// `n > h`). All-constant input is reported as degenerate.
pub fn pca(data: &[Vec<f64>], k: usize) -> Result<Pca> {
    let n = data.len();
    let h = data.first().map_or(0, Vec::len);
    if h == 0 || n <= h {
        return Err(Error::InvalidParams(format!("pca needs more rows than columns, got {n} × {h}")));
    }
    if k == 0 || k > h {
        return Err(Error::InvalidParams(format!("k must be in 1..={h}")));
    }
    if data.iter().any(|r| r.len() != h || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidParams("ragged or non-finite pca input".into()));
    }
    let mut mean = vec![0.0; h];
    for r in data {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let centred = DMatrix::from_fn(n, h, |i, j| data[i][j] - mean[j]);
    let cov = centred.transpose() * &centred / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..h).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("zero-variance input".into()));
    }
    let mut components = Vec::with_capacity(k);
    let mut explained_variance = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let mut c: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        // fix the sign so the largest-magnitude entry is positive
        let pivot = c.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(c);
        explained_variance.push(eig.eigenvalues[i].max(0.0));
    }
    let explained_variance_ratio = explained_variance.iter().map(|v| v / total).collect();
    let mut out = Pca { mean, components, explained_variance, explained_variance_ratio, projections: Vec::new() };
    out.projections = data.iter().map(|r| out.project(r)).collect();
    Ok(out)
}
