//! Rotating-frame Lindblad generator for the driven donor.
//!
//! Rates and Rabi frequencies are ordinary frequencies in GHz; the generator
//! is built in rad/ns (times 2π) so that `evolve` takes time in ns. The
//! coupling element is 2π·Ω/2, so a resonant two-level drive gives Rabi
//! oscillations at Ω GHz, and a decay rate Γ gives a population lifetime of
//! 1/(2πΓ) ns and an absorption line of FWHM Γ.
//!
//! The density matrix is vectorized column-major: vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{DriveEnergy, DriveField, GroundLabel, RelaxationConfig};
use super::constants::ev_to_ghz;
use super::scheme::{Level, LevelScheme};
use super::SpinModelError;

/// Which subset of the four levels is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// d = 3: |↑⟩, |↓⟩, |⇓↑↓⟩.
    Lambda,
    /// d = 4: |↑⟩, |↓⟩, |⇑↑↓⟩, |⇓↑↓⟩.
    Full,
}

impl ModelKind {
    pub fn from_dim(d: usize) -> Result<Self, SpinModelError> {
        match d {
            3 => Ok(ModelKind::Lambda),
            4 => Ok(ModelKind::Full),
            other => Err(SpinModelError::UnsupportedDimension(other)),
        }
    }

    pub fn dim(self) -> usize {
        self.basis().len()
    }

    pub fn basis(self) -> &'static [Level] {
        match self {
            ModelKind::Lambda => &[Level::Up, Level::Down, Level::Xdown],
            ModelKind::Full => &[Level::Up, Level::Down, Level::Xup, Level::Xdown],
        }
    }
}

/// A drive resolved to a photon energy relative to E0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedDrive {
    pub photon_ghz: f64,
    pub rabi_ghz: f64,
    pub ground: GroundLabel,
}

/// Photon energy of a drive relative to E0 in GHz. Detunings refer to the
/// nominal (unshifted) transition energy.
pub fn drive_photon_ghz(scheme: &LevelScheme, drive: &DriveField) -> f64 {
    match drive.energy {
        DriveEnergy::PhotonEv(e) => ev_to_ghz(e - scheme.e0_ev),
        DriveEnergy::DetuningGhz(d) => scheme.nominal_transition_offset_ghz(drive.target) + d,
    }
}

#[derive(Debug, Clone)]
pub struct LiouvillianModel {
    pub kind: ModelKind,
    /// Rotating-frame Hamiltonian in rad/ns.
    pub hamiltonian: DMatrix<Complex64>,
    /// Jump operators, already scaled by the square root of their rate in rad/ns.
    pub jumps: Vec<DMatrix<Complex64>>,
    /// d² × d² superoperator acting on column-major vec(ρ).
    pub matrix: DMatrix<Complex64>,
    pub gamma_x_ghz: f64,
    /// Largest and smallest non-zero characteristic frequency (GHz), used
    /// when reporting stiffness.
    pub rate_span_ghz: (f64, f64),
}

impl LiouvillianModel {
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn basis(&self) -> &'static [Level] {
        self.kind.basis()
    }

    pub fn index_of(&self, level: Level) -> Option<usize> {
        self.basis().iter().position(|&l| l == level)
    }

    pub fn excited_indices(&self) -> Vec<usize> {
        self.basis()
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, Level::Xup | Level::Xdown))
            .map(|(i, _)| i)
            .collect()
    }

    /// Apply the generator to a d×d matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.dim();
        let v = &self.matrix * DMatrix::from_column_slice(d * d, 1, rho.as_slice());
        DMatrix::from_column_slice(d, d, v.as_slice())
    }
}

fn projector(d: usize, i: usize, j: usize, scale: f64) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(d, d);
    m[(i, j)] = Complex64::new(scale, 0.0);
    m
}

/// Assemble the generator.
///
/// With one drive both ground states see the same laser. With two drives
/// each couples only the ground state of its target transition; two drives
/// on the same ground state are rejected. Every drive couples its ground
/// state(s) to every excited state in the basis with the same Rabi
/// frequency. `hf_shift_ghz` is added to the ground splitting.
pub fn build_liouvillian(
    scheme: &LevelScheme,
    drives: &[DriveField],
    relax: &RelaxationConfig,
    hf_shift_ghz: f64,
    kind: ModelKind,
) -> Result<LiouvillianModel, SpinModelError> {
    relax.validate()?;
    for d in drives {
        d.validate()?;
    }
    if drives.len() > 2 {
        return Err(SpinModelError::TooManyDrives(drives.len()));
    }
    let resolved: Vec<ResolvedDrive> = drives
        .iter()
        .map(|d| ResolvedDrive {
            photon_ghz: drive_photon_ghz(scheme, d),
            rabi_ghz: d.rabi_ghz,
            ground: d.target.ground(),
        })
        .collect();
    if resolved.len() == 2 && resolved[0].ground == resolved[1].ground {
        return Err(SpinModelError::SharedGroundState(resolved[0].ground));
    }

    let sch = scheme.shifted(0.0, hf_shift_ghz);
    let basis = kind.basis();
    let d = basis.len();
    let idx = |l: Level| basis.iter().position(|&b| b == l);
    let up = idx(Level::Up).unwrap_or(0);
    let down = idx(Level::Down).unwrap_or(1);
    let excited: Vec<usize> = (0..d).filter(|&i| matches!(basis[i], Level::Xup | Level::Xdown)).collect();

    // Per ground state: the frame frequency and the drives acting on it.
    let drive_for = |g: GroundLabel| -> Option<&ResolvedDrive> {
        match resolved.len() {
            0 => None,
            1 => Some(&resolved[0]),
            _ => resolved.iter().find(|r| r.ground == g),
        }
    };

    let mut h = DMatrix::<Complex64>::zeros(d, d);
    let mut freqs: Vec<f64> = Vec::new();
    for (i, &lvl) in basis.iter().enumerate() {
        let mut e = sch.offset_ghz(lvl);
        let g = match lvl {
            Level::Up => Some(GroundLabel::Up),
            Level::Down => Some(GroundLabel::Down),
            _ => None,
        };
        if let Some(g) = g {
            if let Some(r) = drive_for(g) {
                e += r.photon_ghz;
                for &x in &excited {
                    let c = Complex64::new(TAU * 0.5 * r.rabi_ghz, 0.0);
                    h[(x, i)] += c;
                    h[(i, x)] += c;
                }
                freqs.push(r.rabi_ghz);
            }
        }
        h[(i, i)] = Complex64::new(TAU * e, 0.0);
    }
    for &x in &excited {
        for &g in &[up, down] {
            let det = (h[(x, x)].re - h[(g, g)].re) / TAU;
            freqs.push(det.abs());
        }
    }

    let mut jumps = Vec::new();
    if relax.gamma_x_ghz > 0.0 {
        for &x in &excited {
            let ru = relax.gamma_x_ghz * relax.branch_up;
            let rd = relax.gamma_x_ghz * (1.0 - relax.branch_up);
            if ru > 0.0 {
                jumps.push(projector(d, up, x, (TAU * ru).sqrt()));
            }
            if rd > 0.0 {
                jumps.push(projector(d, down, x, (TAU * rd).sqrt()));
            }
        }
    }
    if relax.gamma_spin_ghz > 0.0 {
        let s = (TAU * relax.gamma_spin_ghz).sqrt();
        jumps.push(projector(d, down, up, s));
        jumps.push(projector(d, up, down, s));
    }
    if relax.gamma_deph_opt_ghz > 0.0 {
        let s = (2.0 * TAU * relax.gamma_deph_opt_ghz).sqrt();
        for &x in &excited {
            jumps.push(projector(d, x, x, s));
        }
    }
    if relax.gamma_deph_spin_ghz > 0.0 {
        let s = (0.5 * TAU * relax.gamma_deph_spin_ghz).sqrt();
        let mut z = projector(d, up, up, s);
        z[(down, down)] = Complex64::new(-s, 0.0);
        jumps.push(z);
    }
    freqs.extend([
        relax.gamma_x_ghz,
        relax.gamma_spin_ghz,
        relax.gamma_deph_opt_ghz,
        relax.gamma_deph_spin_ghz,
    ]);
    let positive: Vec<f64> = freqs.into_iter().filter(|&f| f > 0.0).collect();
    let rate_span_ghz = if positive.is_empty() {
        (0.0, 0.0)
    } else {
        (
            positive.iter().cloned().fold(f64::MIN, f64::max),
            positive.iter().cloned().fold(f64::MAX, f64::min),
        )
    };

    let matrix = superoperator(&h, &jumps);
    Ok(LiouvillianModel {
        kind,
        hamiltonian: h,
        jumps,
        matrix,
        gamma_x_ghz: relax.gamma_x_ghz,
        rate_span_ghz,
    })
}

/// L = −i(I⊗H − Hᵀ⊗I) + Σ_k [L̄_k⊗L_k − ½ I⊗L_k†L_k − ½ (L_k†L_k)ᵀ⊗I].
pub fn superoperator(h: &DMatrix<Complex64>, jumps: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let d = h.nrows();
    let id = DMatrix::<Complex64>::identity(d, d);
    let mi = Complex64::new(0.0, -1.0);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * mi;
    for j in jumps {
        let jdj = j.adjoint() * j;
        l += j.conjugate().kronecker(j);
        l -= id.kronecker(&jdj) * Complex64::new(0.5, 0.0);
        l -= jdj.transpose().kronecker(&id) * Complex64::new(0.5, 0.0);
    }
    l
}
