//! Simulation and data reduction for spin spectroscopy of donor-bound
//! excitons: a Lindblad model of the D0/D0X system under one- and
//! two-laser drive, experiment emulators producing spectra, lineshape and
//! g-factor fitting, and the beamsplitter background correction.

pub mod spinmodel;
pub mod dynamics;
pub mod analysis;
pub mod spectroscopy;
pub mod corrections;
