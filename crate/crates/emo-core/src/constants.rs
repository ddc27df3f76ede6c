//! Physical constants, CODATA 2018 values, SI units.

/// Reduced Planck constant (J·s)
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K), exact since the 2019 SI redefinition
pub const K_B: f64 = 1.380_649e-23;

/// Vacuum permittivity (F/m)
pub const EPSILON_0: f64 = 8.854_187_8128e-12;

/// Speed of light in vacuum (m/s), exact
pub const C_LIGHT: f64 = 299_792_458.0;

/// 2π, used for every Hz ↔ rad/s conversion
pub const TAU: f64 = std::f64::consts::TAU;
