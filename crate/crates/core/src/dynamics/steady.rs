//! Stationary state by a dense linear solve.
//!
//! The first row of L is replaced by the trace functional, turning Lρ = 0,
//! tr ρ = 1 into a square system. The LU pivots flag a kernel of dimension
//! larger than one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::density::DensityMatrix;
use super::DynamicsError;
use crate::spinmodel::LiouvillianModel;

/// Pivot ratio below which the stationary state is treated as non-unique.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Residual bound, relative to max(1, ‖L‖_F).
pub const RESIDUAL_TOL: f64 = 1e-10;

pub fn steady_state(l: &LiouvillianModel) -> Result<DensityMatrix, DynamicsError> {
    let d = l.dim();
    let n = d * d;
    let mut a = l.matrix.clone();
    for j in 0..n {
        a[(0, j)] = Complex64::new(0.0, 0.0);
    }
    for k in 0..d {
        a[(0, k * (d + 1))] = Complex64::new(1.0, 0.0);
    }
    let mut b = DVector::<Complex64>::zeros(n);
    b[0] = Complex64::new(1.0, 0.0);

    let lu = a.clone().lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    let pmax = pivots.iter().cloned().fold(0.0, f64::max);
    let pmin = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if pmax > 0.0 { pmin / pmax } else { 0.0 };
    if !(ratio >= DEGENERACY_THRESHOLD) {
        return Err(DynamicsError::DegenerateSteadyState { pivot_ratio: ratio });
    }
    let mut x = lu.solve(&b).ok_or(DynamicsError::DegenerateSteadyState { pivot_ratio: ratio })?;
    // One step of iterative refinement.
    let r = &b - &a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }

    let rho = DMatrix::from_column_slice(d, d, x.as_slice());
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace().re;
    let rho = rho.unscale(tr);
    let residual = (&l.matrix * DVector::from_column_slice(rho.as_slice())).norm();
    let bound = RESIDUAL_TOL * l.matrix.norm().max(1.0);
    if residual > bound {
        return Err(DynamicsError::SteadyResidual { residual, bound });
    }
    DensityMatrix::new(rho)
}
