//! Fisher information of Gibbs states for entropy and temperature
//! estimation.
//!
//! For a Gibbs state `ρ = e^{-βH}/Z` the heat capacity `C_v = β² Var(H)`
//! sets both the temperature information `F_T = C_v/T²` and the entropy
//! information `F_S = 1/C_v`, so that `F_S·F_T = 1/T²` for every
//! Hamiltonian. With `n` copies this gives `Var(Ŝ)·Var(T̂) ≥ T²/n²`.
//!
//! Modules:
//!
//! - [`spectra`]: thermal models (finite spectra and closed-form families)
//! - [`thermo`]: `ln Z`, energy moments, entropies, thermodynamic length
//! - [`fisher`]: Fisher informations, Cramér–Rao bounds, Rényi variants
//! - [`estimation`]: Monte Carlo energy-measurement estimation
//! - [`ensembles`]: generalised and grand canonical ensembles, conjugate pairs
//! - [`criticality`]: exact finite 2D Ising lattices and finite-size scaling
//!
//! Units: `k_B = 1`, and oscillator frequencies are energies `ħω`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod criticality;
pub mod ensembles;
pub mod error;
pub mod estimation;
pub mod fisher;
pub mod spectra;
pub mod thermo;

pub use error::{Error, Result};
pub use fisher::{fisher_report, FisherReport};
pub use spectra::{build_model, parse_model, EnergyLevel, ModelSpec, ThermalModel};
pub use thermo::{log_partition, thermo_point, RenyiPoint, ThermoPoint};
