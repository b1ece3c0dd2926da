//! Time evolution by adaptive Dormand–Prince 5(4) integration.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use super::density::DensityMatrix;
use super::DynamicsError;
use crate::spinmodel::LiouvillianModel;

/// Trace drift per step above which integration aborts instead of renormalizing.
pub const MAX_TRACE_DRIFT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

const C: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn rate_ratio(l: &LiouvillianModel) -> f64 {
    let (hi, lo) = l.rate_span_ghz;
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn vec_trace(v: &DVector<Complex64>, d: usize) -> Complex64 {
    (0..d).map(|k| v[k * (d + 1)]).sum()
}

/// Restore exact Hermiticity of vec(ρ). The generator preserves it, but
/// rounding noise parked in weakly damped fast modes otherwise grows to the
/// error-control level.
fn hermitize(v: &mut DVector<Complex64>, d: usize) {
    for j in 0..d {
        v[j * (d + 1)].im = 0.0;
        for i in 0..j {
            let a = 0.5 * (v[i + d * j] + v[j + d * i].conj());
            v[i + d * j] = a;
            v[j + d * i] = a.conj();
        }
    }
}

/// ρ(t) for dρ/dt = Lρ with the default tolerances.
pub fn evolve(l: &LiouvillianModel, rho0: &DensityMatrix, t_ns: f64) -> Result<DensityMatrix, DynamicsError> {
    evolve_with(l, rho0, t_ns, &EvolveOptions::default())
}

pub fn evolve_with(
    l: &LiouvillianModel,
    rho0: &DensityMatrix,
    t_ns: f64,
    opts: &EvolveOptions,
) -> Result<DensityMatrix, DynamicsError> {
    if !(t_ns >= 0.0) || !t_ns.is_finite() {
        return Err(DynamicsError::InvalidDuration(t_ns));
    }
    let d = l.dim();
    if rho0.dim() != d {
        return Err(DynamicsError::DimensionMismatch {
            model: d,
            state: rho0.dim(),
        });
    }
    if t_ns == 0.0 {
        return Ok(rho0.clone());
    }
    let lm = &l.matrix;
    let mut y = DVector::from_column_slice(rho0.matrix().as_slice());
    let norm_inf = (0..lm.nrows())
        .map(|i| lm.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut h = if norm_inf > 0.0 { (0.5 / norm_inf).min(t_ns) } else { t_ns };
    let mut t = 0.0;
    let mut k1 = lm * &y;
    let mut steps = 0usize;
    while t < t_ns {
        if steps >= opts.max_steps {
            return Err(DynamicsError::StepBudgetExceeded {
                steps,
                time_ns: t,
                rate_ratio: rate_ratio(l),
            });
        }
        let last = t + h >= t_ns;
        if last {
            h = t_ns - t;
        }
        let hc = Complex64::new(h, 0.0);
        let mut ks: Vec<DVector<Complex64>> = Vec::with_capacity(7);
        ks.push(k1.clone());
        for row in C.iter().take(5) {
            let mut yi = y.clone();
            for (j, &a) in row.iter().enumerate().take(ks.len()) {
                if a != 0.0 {
                    yi.axpy(hc * a, &ks[j], Complex64::new(1.0, 0.0));
                }
            }
            ks.push(lm * yi);
        }
        let mut y_new = y.clone();
        for (j, &b) in C[5].iter().enumerate() {
            if b != 0.0 {
                y_new.axpy(hc * b, &ks[j], Complex64::new(1.0, 0.0));
            }
        }
        let k7 = lm * &y_new;
        ks.push(k7);
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, &ej) in E.iter().enumerate() {
                if ej != 0.0 {
                    e += ks[j][i] * ej;
                }
            }
            let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max((e * h).norm() / scale);
        }
        steps += 1;
        if err <= 1.0 {
            let tr = vec_trace(&y_new, d);
            let drift = (tr - Complex64::new(1.0, 0.0)).norm();
            if drift > MAX_TRACE_DRIFT {
                return Err(DynamicsError::TraceDrift { drift, time_ns: t + h });
            }
            y_new.unscale_mut(tr.re);
            hermitize(&mut y_new, d);
            t = if last { t_ns } else { t + h };
            k1 = lm * &y_new;
            y = y_new;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t_ns.max(1.0) {
            return Err(DynamicsError::StepUnderflow {
                step_ns: h,
                time_ns: t,
                rate_ratio: rate_ratio(l),
            });
        }
    }
    DensityMatrix::new(DMatrix::from_column_slice(d, d, y.as_slice()))
}

/// States at each requested time (ascending, starting at or after 0),
/// integrating piecewise between consecutive times.
pub fn evolve_trajectory(
    l: &LiouvillianModel,
    rho0: &DensityMatrix,
    times_ns: &[f64],
) -> Result<Vec<DensityMatrix>, DynamicsError> {
    let mut out = Vec::with_capacity(times_ns.len());
    let mut rho = rho0.clone();
    let mut t_prev = 0.0;
    for &t in times_ns {
        if t < t_prev {
            return Err(DynamicsError::InvalidDuration(t - t_prev));
        }
        rho = evolve(l, &rho, t - t_prev)?;
        out.push(rho.clone());
        t_prev = t;
    }
    Ok(out)
}

/// Eigenvalues of the generator in rad/ns.
pub fn liouvillian_eigenvalues(l: &LiouvillianModel) -> Result<Vec<Complex64>, DynamicsError> {
    let n = l.matrix.nrows();
    let schur = Schur::try_new(l.matrix.clone(), 1e-14, 100_000).ok_or(DynamicsError::EigenFailure)?;
    let (_, tri) = schur.unpack();
    Ok((0..n).map(|i| tri[(i, i)]).collect())
}

/// Smallest non-zero decay rate |Re λ| of the generator, in rad/ns.
pub fn spectral_gap(l: &LiouvillianModel) -> Result<f64, DynamicsError> {
    let eig = liouvillian_eigenvalues(l)?;
    let scale = l.matrix.norm().max(1.0);
    eig.iter()
        .map(|z| -z.re)
        .filter(|&r| r > 1e-10 * scale)
        .min_by(f64::total_cmp)
        .ok_or(DynamicsError::EigenFailure)
}
