//! Levenberg–Marquardt fit of `a·exp(b·x) + c`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Relative step and relative cost-decrease threshold for convergence.
pub const FIT_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e16;
/// Reciprocal condition number of JᵀJ below which the fit is rank deficient.
const RANK_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Sum of squared residuals at the returned parameters.
    pub residual_norm: f64,
    pub iterations: usize,
}

impl ExpFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * (self.b * x).exp() + self.c
    }
}

fn cost(x: &[f64], y: &[f64], p: &Vector3<f64>) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (p[0] * (p[1] * xi).exp() + p[2]);
            r * r
        })
        .sum()
}

/// Normal equations `JᵀJ` and gradient `Jᵀr` for residuals `r = y − f(x)`.
fn normal_equations(x: &[f64], y: &[f64], p: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let e = (p[1] * xi).exp();
        let row = Vector3::new(e, p[0] * xi * e, 1.0);
        let r = yi - (p[0] * e + p[2]);
        jtj += row * row.transpose();
        jtr += row * r;
    }
    (jtj, jtr)
}

/// Nonlinear least squares for `y ≈ a·exp(b·x) + c` from `init = (a, b, c)`.
///
/// The damped system is `(JᵀJ + λI)·δ = Jᵀr`. Damping starts at 1e-3, is divided by 10 after an accepted step and
/// multiplied by 10 after a rejected one. The fit converges when an accepted
/// step has both relative step size and relative cost decrease below
/// [`FIT_TOLERANCE`], or when the residual vanishes. Failing to converge in
/// [`MAX_ITERATIONS`], or a rank-deficient Jacobian at a non-interpolating
/// optimum, is an error carrying the last iterate.
pub fn fit_exponential(x: &[f64], y: &[f64], init: (f64, f64, f64)) -> Result<ExpFit> {
    if x.len() != y.len() {
        return Err(Error::contract(format!("{} x values for {} y values", x.len(), y.len())));
    }
    if x.len() < 4 {
        return Err(Error::domain("need at least 4 points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite input"));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("x values must be distinct"));
    }

    let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
    let zero_cost = 1e-28 * scale;

    let mut p = Vector3::new(init.0, init.1, init.2);
    let mut s = cost(x, y, &p);
    let mut lambda = INITIAL_DAMPING;
    let snapshot = |p: &Vector3<f64>, s: f64, it: usize| ExpFit {
        a: p[0],
        b: p[1],
        c: p[2],
        residual_norm: s,
        iterations: it,
    };
    if !s.is_finite() {
        return Err(Error::Fit {
            reason: "initial guess overflows".into(),
            last: Box::new(snapshot(&p, s, 0)),
        });
    }

    let mut converged = s <= zero_cost;
    let mut iterations = 0;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(x, y, &p);
        loop {
            // Identity damping: on the degenerate flat-data valley it walks to
            // a = 0 rather than to the equally exact b = 0, a + c = y branch.
            let damped = jtj + Matrix3::identity() * lambda;
            let step = damped.lu().solve(&jtr);
            let candidate = step.map(|d| p + d);
            let trial = candidate.map(|c| (cost(x, y, &c), c));
            match trial {
                Some((s_new, c)) if s_new.is_finite() && s_new < s => {
                    let d = c - p;
                    let rel_step = d.norm() / (p.norm() + f64::EPSILON);
                    let rel_decrease = (s - s_new) / s;
                    p = c;
                    s = s_new;
                    lambda = (lambda / 10.0).max(1e-300);
                    converged = s <= zero_cost
                        || (rel_step < FIT_TOLERANCE && rel_decrease < FIT_TOLERANCE);
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if lambda > MAX_DAMPING {
                        // No descent direction left: stationary to working
                        // precision.
                        converged = true;
                        break;
                    }
                }
            }
        }
    }

    let fit = snapshot(&p, s, iterations);
    if !converged {
        return Err(Error::Fit {
            reason: format!("no convergence after {MAX_ITERATIONS} iterations"),
            last: Box::new(fit),
        });
    }
    if s > zero_cost.max(1e-24 * scale) {
        let (jtj, _) = normal_equations(x, y, &p);
        let sv = jtj.singular_values();
        let (hi, lo) = (sv.max(), sv.min());
        if hi <= 0.0 || hi.is_nan() || lo / hi < RANK_TOLERANCE {
            return Err(Error::Fit {
                reason: "Jacobian is rank deficient at the optimum".into(),
                last: Box::new(fit),
            });
        }
    }
    Ok(fit)
}
