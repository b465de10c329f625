//! Physics of 2D ion crystals in an oblate Paul trap: DC stability, planar
//! equilibrium structures, phonon spectra, and phonon-mediated spin-spin
//! couplings.
//!
//! The crate works in two layers. Physical inputs (ion species, electrode
//! geometry, RF drive, DC voltages) collapse to a small set of dimensionless
//! stiffnesses and a length scale in [`trap`]; everything downstream of that
//! (equilibria, modes, couplings) is scale-free and parameterized only by
//! those stiffnesses and the ion count.

pub mod anneal;
pub mod config;
pub mod constants;
pub mod equilibrium;
pub mod io;
pub mod linalg;
pub mod modes;
pub mod spin;
pub mod trap;
