//! Goodness-of-fit metrics: Nash–Sutcliffe efficiency, RMSE and MAE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(observed: &[f64], forecast: &[f64]) -> Result<()> {
    if observed.len() != forecast.len() {
        return Err(Error::Shape(format!(
            "observed has length {} but forecast has length {}",
            observed.len(),
            forecast.len()
        )));
    }
    if observed.is_empty() {
        return Err(Error::Shape("metrics need at least one value".into()));
    }
    Ok(())
}

/// `1 − Σ(Q − Q̂)² / Σ(Q − Q̄)²` with `Q̄` the mean of `observed`.
pub fn nse(observed: &[f64], forecast: &[f64]) -> Result<f64> {
    check(observed, forecast)?;
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let (mut sse, mut sst) = (0.0, 0.0);
    for (q, f) in observed.iter().zip(forecast) {
        sse += (q - f) * (q - f);
        sst += (q - mean) * (q - mean);
    }
    if sst == 0.0 {
        return Err(Error::Metric("NSE is undefined for a constant observed series".into()));
    }
    Ok(1.0 - sse / sst)
}

pub fn rmse(observed: &[f64], forecast: &[f64]) -> Result<f64> {
    check(observed, forecast)?;
    let sse: f64 = observed.iter().zip(forecast).map(|(q, f)| (q - f) * (q - f)).sum();
    Ok((sse / observed.len() as f64).sqrt())
}

pub fn mae(observed: &[f64], forecast: &[f64]) -> Result<f64> {
    check(observed, forecast)?;
    let sae: f64 = observed.iter().zip(forecast).map(|(q, f)| (q - f).abs()).sum();
    Ok(sae / observed.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub nse: f64,
    pub rmse: f64,
    pub mae: f64,
}

pub fn score(observed: &[f64], forecast: &[f64]) -> Result<Scores> {
    Ok(Scores {
        nse: nse(observed, forecast)?,
        rmse: rmse(observed, forecast)?,
        mae: mae(observed, forecast)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        let obs = [1.0, 2.0, 3.0];
        let fc = [1.0, 2.0, 4.0];
        assert_eq!(nse(&obs, &fc).unwrap(), 0.5);
        assert!((rmse(&obs, &fc).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((mae(&obs, &fc).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identities() {
        let obs = [3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(nse(&obs, &obs).unwrap(), 1.0);
        assert_eq!(rmse(&obs, &obs).unwrap(), 0.0);
        assert_eq!(mae(&obs, &obs).unwrap(), 0.0);
        let mean = [2.8; 5];
        assert_eq!(nse(&obs, &mean).unwrap(), 0.0);
        let shifted: Vec<f64> = obs.iter().map(|v| v - 0.25).collect();
        assert_eq!(rmse(&obs, &shifted).unwrap(), 0.25);
        assert_eq!(mae(&obs, &shifted).unwrap(), 0.25);
    }

    #[test]
    fn errors() {
        assert!(matches!(nse(&[2.0, 2.0], &[1.0, 2.0]), Err(Error::Metric(_))));
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(matches!(mae(&[], &[]), Err(Error::Shape(_))));
    }
}
