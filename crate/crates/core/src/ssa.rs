//! Singular spectrum analysis with singleton grouping.
//!
//! The window length `L` is also the number of components. Each elementary
//! component is the diagonal average of `u uᵀ X`, where `X` is the L×(N−L+1)
//! Hankel trajectory matrix and `u` a left singular vector of `X`. The left
//! singular vectors come from the symmetric eigendecomposition of `X Xᵀ`;
//! forming `u (uᵀ X)` instead of `σ u vᵀ` avoids dividing by tiny singular
//! values, and because the `u` form an orthonormal basis the components sum
//! back to the input to rounding accuracy.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::components::{ComponentSet, Method};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsaConfig {
    /// Embedding window length, equal to the number of components.
    pub window: usize,
}

impl SsaConfig {
    pub fn new(window: usize) -> Self {
        Self { window }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Validation(format!(
                "SSA window must be at least 2, got {}",
                self.window
            )));
        }
        Ok(())
    }

    /// Shortest series this configuration can decompose.
    pub fn min_len(&self) -> usize {
        2 * self.window
    }
}

/// Hankel trajectory matrix, `rows[i][c] = values[i + c]`.
pub fn trajectory_matrix(values: &[f64], window: usize) -> Vec<Vec<f64>> {
    let cols = values.len() + 1 - window;
    (0..window).map(|i| values[i..i + cols].to_vec()).collect()
}

/// Diagonal average of the rank-1 matrix `u wᵀ` back to a series of length
/// `u.len() + w.len() - 1`.
pub fn diagonal_average_rank1(u: &[f64], w: &[f64]) -> Vec<f64> {
    let l = u.len();
    let k = w.len();
    let n = l + k - 1;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let lo = t.saturating_sub(k - 1);
        let hi = t.min(l - 1);
        let mut acc = 0.0;
        for i in lo..=hi {
            acc += u[i] * w[t - i];
        }
        out.push(acc / (hi + 1 - lo) as f64);
    }
    out
}

pub fn ssa_decompose(values: &[f64], config: &SsaConfig) -> Result<ComponentSet> {
    config.validate()?;
    let n = values.len();
    let l = config.window;
    if n < 2 * l {
        return Err(Error::Decomposition(format!(
            "SSA with window {l} needs at least {} values, got {n}",
            2 * l
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("SSA input contains non-finite values".into()));
    }
    let cols = n - l + 1;

    // Lag-covariance S = X Xᵀ.
    let mut lag_cov = DMatrix::<f64>::zeros(l, l);
    for i in 0..l {
        for j in i..l {
            let a = &values[i..i + cols];
            let b = &values[j..j + cols];
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            lag_cov[(i, j)] = dot;
            lag_cov[(j, i)] = dot;
        }
    }
    let eig = SymmetricEigen::new(lag_cov);

    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = Vec::with_capacity(l);
    let mut singular_values = Vec::with_capacity(l);
    for &idx in &order {
        let mut u: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        if u[0] < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        // w = Xᵀ u
        let w: Vec<f64> = (0..cols)
            .map(|c| u.iter().enumerate().map(|(i, ui)| ui * values[i + c]).sum())
            .collect();
        components.push(diagonal_average_rank1(&u, &w));
        singular_values.push(eig.eigenvalues[idx].max(0.0).sqrt());
    }

    let mut cs = ComponentSet::plain(components, Method::Ssa);
    cs.singular_values = Some(singular_values);
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_rank_one() {
        let cs = ssa_decompose(&[5.0; 6], &SsaConfig::new(2)).unwrap();
        assert_eq!(cs.n_components(), 2);
        for v in &cs.components[0] {
            assert!((v - 5.0).abs() < 1e-12, "{:?}", cs.components[0]);
        }
        for v in &cs.components[1] {
            assert!(v.abs() < 1e-12, "{:?}", cs.components[1]);
        }
    }

    #[test]
    fn too_short_series_is_rejected() {
        let err = ssa_decompose(&[1.0, 2.0, 3.0, 4.0, 5.0], &SsaConfig::new(3)).unwrap_err();
        assert!(matches!(err, Error::Decomposition(_)));
        assert!(ssa_decompose(&[1.0; 10], &SsaConfig::new(1)).is_err());
    }

    #[test]
    fn singular_values_descend() {
        let values: Vec<f64> = (0..80).map(|t| (t as f64 * 0.3).sin() + 0.01 * t as f64).collect();
        let cs = ssa_decompose(&values, &SsaConfig::new(7)).unwrap();
        let sv = cs.singular_values.unwrap();
        assert!(sv.windows(2).all(|w| w[0] >= w[1]), "{sv:?}");
    }

    #[test]
    fn trajectory_matrix_is_hankel() {
        let m = trajectory_matrix(&[1.0, 2.0, 3.0, 4.0, 5.0], 2);
        assert_eq!(m, vec![vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 3.0, 4.0, 5.0]]);
    }
}
