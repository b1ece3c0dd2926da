//! Levenberg–Marquardt least squares with Marquardt diagonal scaling and
//! Nielsen's damping update.
//!
//! The caller supplies residuals already divided by a data scale and a
//! per-parameter scale; the solver works in the scaled coordinates so that
//! its tolerances are dimensionless.

use nalgebra::{DMatrix, DVector};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative cost change that ends the iteration after an accepted step.
    pub cost_tol: f64,
    /// Gradient ∞-norm that ends the iteration.
    pub gradient_tol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            cost_tol: 1e-10,
            gradient_tol: 1e-8,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// ½ Σ r², in normalized residual units.
    pub cost: f64,
    /// RMS of the normalized residuals.
    pub rms: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ∞-norm of Jᵀr in scaled coordinates at the returned parameters.
    pub gradient_norm: f64,
    /// Parameter covariance in original units, scaled by the residual
    /// variance; `None` if JᵀJ is singular or there are no spare degrees of
    /// freedom.
    pub covariance: Option<DMatrix<f64>>,
    /// RMS after the initial point and after each accepted step.
    pub rms_history: Vec<f64>,
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

fn jacobian<F>(f: &F, q: &[f64], scales: &[f64], r0_len: usize) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = q.len();
    let mut j = DMatrix::zeros(r0_len, m);
    let mut qp = q.to_vec();
    let unscale = |q: &[f64]| -> Vec<f64> { q.iter().zip(scales).map(|(a, s)| a * s).collect() };
    for k in 0..m {
        let h = 1e-6 * q[k].abs().max(1.0);
        qp[k] = q[k] + h;
        let rp = f(&unscale(&qp));
        qp[k] = q[k] - h;
        let rm = f(&unscale(&qp));
        qp[k] = q[k];
        if rp.len() != r0_len || rm.len() != r0_len {
            return None;
        }
        for i in 0..r0_len {
            let d = (rp[i] - rm[i]) / (2.0 * h);
            if !d.is_finite() {
                return None;
            }
            j[(i, k)] = d;
        }
    }
    Some(j)
}

/// Minimize ½‖r(p)‖² starting from `p0`.
pub fn levenberg_marquardt<F>(
    residuals: F,
    p0: &[f64],
    scales: &[f64],
    opts: &LmOptions,
) -> Result<LmOutcome, AnalysisError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = p0.len();
    assert_eq!(scales.len(), m, "one scale per parameter");
    let scales: Vec<f64> = scales.iter().map(|s| if *s > 0.0 && s.is_finite() { *s } else { 1.0 }).collect();
    let to_p = |q: &DVector<f64>| -> Vec<f64> { q.iter().zip(&scales).map(|(a, s)| a * s).collect() };
    let mut q = DVector::from_iterator(m, p0.iter().zip(&scales).map(|(p, s)| p / s));
    let mut r = residuals(&to_p(&q));
    let n = r.len();
    if r.iter().any(|x| !x.is_finite()) {
        return Err(AnalysisError::NonFinite("residuals at the initial guess".into()));
    }
    if n < m {
        return Err(AnalysisError::InsufficientData {
            needed: m,
            got: n,
        });
    }
    let mut cost = cost_of(&r);
    let mut j = jacobian(&residuals, q.as_slice(), &scales, n)
        .ok_or_else(|| AnalysisError::NonFinite("Jacobian at the initial guess".into()))?;
    let mut rv = DVector::from_column_slice(&r);
    let mut g = j.transpose() * &rv;
    let mut jtj = j.transpose() * &j;
    let mut lambda = opts.initial_damping * jtj.diagonal().max().max(1e-300);
    let mut nu = 2.0;
    let mut history = vec![(2.0 * cost / n as f64).sqrt()];
    let mut iterations = 0;
    let mut converged = g.amax() < opts.gradient_tol;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let diag = jtj.diagonal();
        let dmax = diag.max().max(1e-300);
        let mut a = jtj.clone();
        for k in 0..m {
            a[(k, k)] += lambda * diag[k].max(1e-12 * dmax);
        }
        let step = match a.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => {
                lambda *= nu;
                nu *= 2.0;
                continue;
            }
        };
        let q_new = &q + &step;
        let r_new = residuals(&to_p(&q_new));
        let cost_new = if r_new.iter().all(|x| x.is_finite()) { cost_of(&r_new) } else { f64::INFINITY };
        let dmat = DVector::from_iterator(m, (0..m).map(|k| lambda * diag[k].max(1e-12 * dmax)));
        let predicted = 0.5 * step.dot(&(dmat.component_mul(&step) - &g));
        let rho = if predicted > 0.0 { (cost - cost_new) / predicted } else { -1.0 };
        if rho > 0.0 && cost_new <= cost {
            let rel = (cost - cost_new) / cost.max(1e-300);
            q = q_new;
            r = r_new;
            cost = cost_new;
            history.push((2.0 * cost / n as f64).sqrt());
            j = match jacobian(&residuals, q.as_slice(), &scales, n) {
                Some(j) => j,
                None => break,
            };
            rv = DVector::from_column_slice(&r);
            g = j.transpose() * &rv;
            jtj = j.transpose() * &j;
            lambda *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if g.amax() < opts.gradient_tol || rel < opts.cost_tol || cost == 0.0 {
                converged = true;
            }
        } else {
            lambda *= nu;
            nu *= 2.0;
            if !lambda.is_finite() || lambda > 1e300 {
                break;
            }
        }
    }

    let dof = n.saturating_sub(m);
    let covariance = if dof > 0 {
        jtj.clone().try_inverse().map(|inv| {
            let s2 = 2.0 * cost / dof as f64;
            let mut c = inv * s2;
            for a in 0..m {
                for b in 0..m {
                    c[(a, b)] *= scales[a] * scales[b];
                }
            }
            c
        })
    } else {
        None
    };
    Ok(LmOutcome {
        params: to_p(&q),
        cost,
        rms: (2.0 * cost / n as f64).sqrt(),
        iterations,
        converged,
        gradient_norm: g.amax(),
        covariance,
        rms_history: history,
    })
}
