use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgFilterSpec {
    window: usize,
    order: usize,
}

impl SgFilterSpec {
    pub fn new(window: usize, order: usize) -> Result<Self> {
        if window < 3 || window.is_multiple_of(2) {
            return Err(Error::domain(format!("window must be odd and ≥ 3, got {window}")));
        }
        if order >= window {
            return Err(Error::domain(format!(
                "polynomial order {order} must be below window {window}"
            )));
        }
        Ok(SgFilterSpec { window, order })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl Default for SgFilterSpec {
    /// Window 7, order 4: the setting used for 61-point reflection patterns.
    fn default() -> Self {
        SgFilterSpec { window: 7, order: 4 }
    }
}

/// Weights `w` such that `Σ w_j y_{start+j}` is the least-squares polynomial
/// of degree `order` over the window, evaluated at offset `eval` within it.
fn window_weights(window: usize, order: usize, eval: usize) -> Vec<f64> {
    let vandermonde = DMatrix::from_fn(window, order + 1, |j, p| {
        (j as f64 - eval as f64).powi(p as i32)
    });
    // Polynomial basis centred at the evaluation point: the fitted value is
    // the constant coefficient, i.e. row 0 of the pseudo-inverse.
    let pinv = vandermonde
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .expect("SVD computed with both factors");
    pinv.row(0).iter().copied().collect()
}

/// Savitzky–Golay smoothing. Interior samples use the centred window; the
/// first and last `window / 2` samples use the one-sided window at the edge,
/// evaluated at their own position.
pub fn savitzky_golay(signal: &[f64], spec: SgFilterSpec) -> Result<Vec<f64>> {
    let w = spec.window;
    let n = signal.len();
    if n < w {
        return Err(Error::domain(format!(
            "signal of {n} samples is shorter than window {w}"
        )));
    }
    let half = w / 2;
    let centred = window_weights(w, spec.order, half);
    let leading: Vec<Vec<f64>> = (0..half).map(|i| window_weights(w, spec.order, i)).collect();
    let trailing: Vec<Vec<f64>> = (half + 1..w)
        .map(|i| window_weights(w, spec.order, i))
        .collect();
    let dot = |weights: &[f64], start: usize| -> f64 {
        weights
            .iter()
            .zip(&signal[start..start + w])
            .map(|(a, b)| a * b)
            .sum()
    };
    Ok((0..n)
        .map(|i| {
            if i < half {
                dot(&leading[i], 0)
            } else if i + half >= n {
                let offset = i - (n - w);
                dot(&trailing[offset - half - 1], n - w)
            } else {
                dot(&centred, i - half)
            }
        })
        .collect())
}
