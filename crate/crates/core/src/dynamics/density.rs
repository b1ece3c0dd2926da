//! Validated density matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::DynamicsError;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> DVector<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues
}

impl DensityMatrix {
    /// Wrap a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self, DynamicsError> {
        let d = m.nrows();
        if m.ncols() != d || !(3..=4).contains(&d) {
            return Err(DynamicsError::InvalidDensity(format!(
                "expected a 3×3 or 4×4 matrix, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(DynamicsError::InvalidDensity("non-finite entry".into()));
        }
        let herm = (&m - m.adjoint()).camax();
        if herm > HERMITIAN_TOL {
            return Err(DynamicsError::InvalidDensity(format!(
                "not Hermitian (max deviation {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(DynamicsError::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min_eig = hermitian_eigenvalues(&m).min();
        if min_eig < -POSITIVITY_TOL {
            return Err(DynamicsError::InvalidDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { m })
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(p: &[f64]) -> Result<Self, DynamicsError> {
        let diag = DVector::from_iterator(p.len(), p.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&diag))
    }

    /// Unpolarized ground mixture: ½ on each D0 spin state, nothing excited.
    /// The ground states are the first two basis entries in every model.
    pub fn thermal_ground(dim: usize) -> Result<Self, DynamicsError> {
        let mut p = vec![0.0; dim];
        p[0] = 0.5;
        if dim > 1 {
            p[1] = 0.5;
        }
        Self::from_populations(&p)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn population(&self, i: usize) -> f64 {
        self.m[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        hermitian_eigenvalues(&self.m)
    }

    /// Σ|λ_i| of the difference (the trace norm, without the ½).
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.m - &other.m;
        hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum()
    }
}
