use crate::error::{Error, Result};

/// Normalised mean squared error `Σ(p − t)² / Σ(t − mean(t))²`.
pub fn nmse(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::contract(format!(
            "{} predictions for {} targets",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.len() < 2 {
        return Err(Error::domain("need at least 2 samples"));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let spread: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    if spread == 0.0 {
        return Err(Error::domain("truth is constant"));
    }
    let err: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok(err / spread)
}
