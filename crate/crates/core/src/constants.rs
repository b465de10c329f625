//! Physical constants (CODATA 2018), SI units.

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Atomic mass constant, kg.
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Coulomb constant 1/(4 pi eps0), N m^2 / C^2.
pub const COULOMB: f64 = 1.0 / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY);
