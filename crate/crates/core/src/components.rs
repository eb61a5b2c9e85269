//! The output of one decomposition call: K aligned component series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ssa,
    Vmd,
    PassThrough,
}

/// Iteration record of an iterative decomposer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// Convergence metric after each iteration.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSet {
    /// `components[k][t]`; every component has the input length.
    pub components: Vec<Vec<f64>>,
    pub method: Method,
    /// SSA only: singular values in descending order, one per component.
    pub singular_values: Option<Vec<f64>>,
    /// VMD only: center frequencies in cycles/sample, ascending.
    pub center_freqs: Option<Vec<f64>>,
    /// VMD only: second spectral moment of each mode about its center frequency.
    pub bandwidths: Option<Vec<f64>>,
    pub convergence: Option<Convergence>,
}

impl ComponentSet {
    pub(crate) fn plain(components: Vec<Vec<f64>>, method: Method) -> Self {
        Self {
            components,
            method,
            singular_values: None,
            center_freqs: None,
            bandwidths: None,
            convergence: None,
        }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Length of each component series.
    pub fn len(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Elementwise sum over components.
    pub fn reconstruct(&self) -> Result<Vec<f64>> {
        let first = self
            .components
            .first()
            .ok_or_else(|| Error::Shape("cannot reconstruct an empty component set".into()))?;
        let mut sum = vec![0.0; first.len()];
        for c in &self.components {
            if c.len() != sum.len() {
                return Err(Error::Shape("components have unequal lengths".into()));
            }
            for (s, v) in sum.iter_mut().zip(c) {
                *s += v;
            }
        }
        Ok(sum)
    }

    /// Wide CSV: `t,c1,...,cK` with 1-based `t`.
    pub fn to_wide_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.n_components() {
            out.push_str(&format!(",c{k}"));
        }
        out.push('\n');
        for t in 0..self.len() {
            out.push_str(&(t + 1).to_string());
            for c in &self.components {
                out.push(',');
                out.push_str(&c[t].to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// RMSE between `series` and the sum of the components.
pub fn reconstruction_error(series: &[f64], cs: &ComponentSet) -> Result<f64> {
    let recon = cs.reconstruct()?;
    if recon.len() != series.len() {
        return Err(Error::Shape(format!(
            "series has length {} but components have length {}",
            series.len(),
            recon.len()
        )));
    }
    let sse: f64 = series.iter().zip(&recon).map(|(s, r)| (s - r).powi(2)).sum();
    Ok((sse / series.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_reconstructs_to_itself() {
        let cs = ComponentSet::plain(vec![vec![1.0, -2.0, 3.5]], Method::PassThrough);
        assert_eq!(cs.reconstruct().unwrap(), vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn exact_sum_has_zero_error() {
        let cs = ComponentSet::plain(vec![vec![1.0, 2.0], vec![0.5, 0.25]], Method::Ssa);
        assert_eq!(reconstruction_error(&[1.5, 2.25], &cs).unwrap(), 0.0);
        let e = reconstruction_error(&[2.5, 2.25], &cs).unwrap();
        assert!((e - (0.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        let cs = ComponentSet::plain(vec![vec![1.0, 2.0]], Method::Ssa);
        assert!(matches!(reconstruction_error(&[1.0], &cs), Err(Error::Shape(_))));
        let empty = ComponentSet::plain(vec![], Method::Ssa);
        assert!(empty.reconstruct().is_err());
    }

    #[test]
    fn wide_csv_layout() {
        let cs = ComponentSet::plain(vec![vec![1.0, 2.0], vec![0.5, 0.25]], Method::Ssa);
        assert_eq!(cs.to_wide_csv(), "t,c1,c2\n1,1,0.5\n2,2,0.25\n");
    }
}
