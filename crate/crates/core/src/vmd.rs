//! Variational mode decomposition.
//!
//! The series is mirror-extended to twice its length, transformed, and the
//! modes are updated on the non-negative half of the spectrum:
//!
//! ```text
//! û_k(ω) ← (f̂(ω) − Σ_{i≠k} û_i(ω) + λ̂(ω)/2) / (1 + 2α(ω − ω_k)²)
//! ω_k    ← Σ ω |û_k(ω)|² / Σ |û_k(ω)|²
//! λ̂      ← λ̂ + τ (f̂ − Σ_k û_k)
//! ```
//!
//! Iteration stops when `Σ_k ‖û_k⁺ − û_k‖² / ‖û_k‖²` drops below `tol` or
//! after `max_iter` sweeps. Frequencies are in cycles per sample.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::components::{ComponentSet, Convergence, Method};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitFreqs {
    /// `ω_k = 0.5·k/K`, spread over [0, 0.5).
    Uniform,
    Zeros,
    /// Log-uniform random draws between 1/N and 0.5, sorted.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VmdConfig {
    pub modes: usize,
    pub alpha: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_init")]
    pub init: InitFreqs,
    #[serde(default)]
    pub dc_mode: bool,
}

fn default_tol() -> f64 {
    1e-7
}

fn default_max_iter() -> usize {
    500
}

fn default_init() -> InitFreqs {
    InitFreqs::Uniform
}

impl VmdConfig {
    pub fn new(modes: usize, alpha: f64) -> Self {
        Self {
            modes,
            alpha,
            tau: 0.0,
            tol: default_tol(),
            max_iter: default_max_iter(),
            init: default_init(),
            dc_mode: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 1 {
            return Err(Error::Validation("VMD needs at least one mode".into()));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Validation(format!("VMD alpha must be positive, got {}", self.alpha)));
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::Validation(format!("VMD tau must be non-negative, got {}", self.tau)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Validation(format!("VMD tol must be positive, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::Validation("VMD max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn min_len(&self) -> usize {
        4
    }
}

fn initial_freqs(config: &VmdConfig, n: usize) -> Vec<f64> {
    let k = config.modes;
    let mut omega = match config.init {
        InitFreqs::Uniform => (0..k).map(|i| 0.5 * i as f64 / k as f64).collect(),
        InitFreqs::Zeros => vec![0.0; k],
        InitFreqs::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lo = (1.0 / n as f64).ln();
            let hi = 0.5f64.ln();
            let mut w: Vec<f64> = (0..k)
                .map(|_| (lo + (hi - lo) * rng.random::<f64>()).exp())
                .collect();
            w.sort_by(f64::total_cmp);
            w
        }
    };
    if config.dc_mode {
        omega[0] = 0.0;
    }
    omega
}

/// Reflects the first `ceil(N/2)` samples before and the rest after the
/// series. Returns the extended signal and the offset of the original.
pub fn mirror_extend(values: &[f64]) -> (Vec<f64>, usize) {
    let n = values.len();
    let mid = n.div_ceil(2);
    let mut out = Vec::with_capacity(2 * n);
    out.extend(values[..mid].iter().rev());
    out.extend_from_slice(values);
    out.extend(values[mid..].iter().rev());
    (out, mid)
}

pub fn vmd_decompose(values: &[f64], config: &VmdConfig) -> Result<ComponentSet> {
    config.validate()?;
    let n = values.len();
    if n < config.min_len() {
        return Err(Error::Decomposition(format!("VMD needs at least 4 values, got {n}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("VMD input contains non-finite values".into()));
    }

    let (mirrored, offset) = mirror_extend(values);
    let total = mirrored.len();
    // Bins 0..=total/2 of the forward transform.
    let half = total / 2 + 1;

    let mut spectrum: Vec<Complex64> = mirrored.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(total).process(&mut spectrum));
    let f_hat = &spectrum[..half];
    let freqs: Vec<f64> = (0..half).map(|j| j as f64 / total as f64).collect();

    let k_modes = config.modes;
    let two_alpha = 2.0 * config.alpha;
    let mut omega = initial_freqs(config, n);
    let mut u_hat = vec![vec![Complex64::new(0.0, 0.0); half]; k_modes];
    let mut lambda = vec![Complex64::new(0.0, 0.0); half];
    let mut sum_all = vec![Complex64::new(0.0, 0.0); half];
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iter {
        for (j, s) in sum_all.iter_mut().enumerate() {
            *s = u_hat.iter().map(|u| u[j]).sum();
        }

        let mut metric = 0.0;
        for k in 0..k_modes {
            let wk = omega[k];
            let mode = &mut u_hat[k];
            let (mut diff_sq, mut old_sq) = (0.0, 0.0);
            let (mut num, mut den) = (0.0, 0.0);
            for j in 0..half {
                let old = mode[j];
                let others = sum_all[j] - old;
                let d = freqs[j] - wk;
                let new = (f_hat[j] - others + lambda[j] * 0.5) / (1.0 + two_alpha * d * d);
                diff_sq += (new - old).norm_sqr();
                old_sq += old.norm_sqr();
                sum_all[j] = others + new;
                mode[j] = new;
                let p = new.norm_sqr();
                num += freqs[j] * p;
                den += p;
            }
            if !(config.dc_mode && k == 0) && den > 0.0 {
                omega[k] = num / den;
            }
            metric += if old_sq > 0.0 {
                diff_sq / old_sq
            } else if diff_sq == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }

        if config.tau > 0.0 {
            for j in 0..half {
                lambda[j] += (f_hat[j] - sum_all[j]) * config.tau;
            }
        }

        if omega.iter().any(|w| !w.is_finite()) || metric.is_nan() {
            return Err(Error::Numerical("VMD iteration produced non-finite values".into()));
        }
        history.push(metric);
        if metric < config.tol {
            converged = true;
            break;
        }
    }

    let bandwidths: Vec<f64> = u_hat
        .iter()
        .zip(&omega)
        .map(|(mode, &w)| {
            let (mut num, mut den) = (0.0, 0.0);
            for (u, f) in mode.iter().zip(&freqs) {
                let p = u.norm_sqr();
                num += (f - w).powi(2) * p;
                den += p;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect();

    let ifft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(total));
    let mut modes = Vec::with_capacity(k_modes);
    let mut full = vec![Complex64::new(0.0, 0.0); total];
    for mode in &u_hat {
        full[..half].copy_from_slice(mode);
        for j in 1..total - half + 1 {
            full[total - j] = mode[j].conj();
        }
        ifft.process(&mut full);
        let scale = 1.0 / total as f64;
        let series: Vec<f64> = full[offset..offset + n].iter().map(|c| c.re * scale).collect();
        if series.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("VMD synthesis produced non-finite values".into()));
        }
        modes.push(series);
    }

    let mut order: Vec<usize> = (0..k_modes).collect();
    order.sort_by(|&a, &b| omega[a].total_cmp(&omega[b]));

    let iterations = history.len();
    let final_residual = history.last().copied().unwrap_or(0.0);
    let mut cs = ComponentSet::plain(order.iter().map(|&i| std::mem::take(&mut modes[i])).collect(), Method::Vmd);
    cs.center_freqs = Some(order.iter().map(|&i| omega[i]).collect());
    cs.bandwidths = Some(order.iter().map(|&i| bandwidths[i]).collect());
    cs.convergence = Some(Convergence {
        iterations,
        final_residual,
        converged,
        residual_history: history,
    });
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_extension_layout() {
        let (ext, offset) = mirror_extend(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ext, vec![2.0, 1.0, 1.0, 2.0, 3.0, 4.0, 4.0, 3.0]);
        assert_eq!(offset, 2);
        let (ext, offset) = mirror_extend(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(ext.len(), 10);
        assert_eq!(&ext[offset..offset + 5], &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn zero_series_gives_zero_modes() {
        let cs = vmd_decompose(&[0.0; 64], &VmdConfig::new(3, 2000.0)).unwrap();
        assert_eq!(cs.n_components(), 3);
        for m in &cs.components {
            assert!(m.iter().all(|v| v.abs() < 1e-12));
        }
        assert!(cs.convergence.unwrap().converged);
    }

    #[test]
    fn invalid_configs_rejected() {
        let v = vec![1.0; 16];
        assert!(vmd_decompose(&v, &VmdConfig::new(0, 10.0)).is_err());
        assert!(vmd_decompose(&v, &VmdConfig::new(2, 0.0)).is_err());
        assert!(vmd_decompose(&v, &VmdConfig { tau: -1.0, ..VmdConfig::new(2, 10.0) }).is_err());
        assert!(vmd_decompose(&v, &VmdConfig { max_iter: 0, ..VmdConfig::new(2, 10.0) }).is_err());
        assert!(matches!(
            vmd_decompose(&[1.0, 2.0, 3.0], &VmdConfig::new(1, 10.0)),
            Err(Error::Decomposition(_))
        ));
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let v: Vec<f64> = (0..200).map(|t| (t as f64 * 0.4).sin() + (t as f64 * 0.05).cos()).collect();
        let cs = vmd_decompose(&v, &VmdConfig { max_iter: 3, ..VmdConfig::new(2, 500.0) }).unwrap();
        let conv = cs.convergence.unwrap();
        assert_eq!(conv.iterations, 3);
        assert!(!conv.converged);
    }

    #[test]
    fn centers_sorted_and_in_range() {
        let v: Vec<f64> = (0..300)
            .map(|t| (std::f64::consts::TAU * 0.3 * t as f64).sin() + (std::f64::consts::TAU * 0.02 * t as f64).sin())
            .collect();
        for init in [InitFreqs::Uniform, InitFreqs::Zeros, InitFreqs::Random { seed: 4 }] {
            let cs = vmd_decompose(&v, &VmdConfig { init, ..VmdConfig::new(3, 1000.0) }).unwrap();
            let w = cs.center_freqs.unwrap();
            assert!(w.windows(2).all(|p| p[0] <= p[1]), "{w:?}");
            assert!(w.iter().all(|x| (0.0..=0.5).contains(x)), "{w:?}");
        }
    }

    #[test]
    fn dc_mode_pins_first_frequency() {
        let v: Vec<f64> = (0..128).map(|t| 3.0 + (t as f64 * 0.7).sin()).collect();
        let cs = vmd_decompose(&v, &VmdConfig { dc_mode: true, ..VmdConfig::new(2, 1000.0) }).unwrap();
        assert_eq!(cs.center_freqs.unwrap()[0], 0.0);
    }
}
