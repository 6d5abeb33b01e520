//! Physical constants (CODATA 2018) and the reference material parameters.
//!
//! Every regression value in the test suite is computed from this one table,
//! so changing an entry here changes the pinned numbers downstream.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// GaAs Drude-Lorentz parameters (rad/s unless stated).
pub mod gaas {
    pub const EPS_INF: f64 = 11.0;
    pub const OMEGA_R: f64 = 0.506e14;
    pub const OMEGA_L: f64 = 0.550e14;
    pub const GAMMA: f64 = 0.00452e14;
}

/// Gold Drude parameters (rad/s).
pub mod gold {
    pub const OMEGA_PL: f64 = 137.2e14;
    pub const GAMMA: f64 = 0.4059e14;
    /// Room-temperature reference frequency 300 k_B / ħ, as quoted (0.392e14 rad/s).
    pub const OMEGA_ROOM: f64 = 0.392e14;
}

/// Canonical text form of the constants table, hashed into CSV metadata.
pub fn table_text() -> String {
    format!(
        "hbar={:.12e};k_B={:.12e};c={:.12e};eps0={:.12e}",
        HBAR, K_B, C, EPS0
    )
}

/// Hex SHA-256 of [`table_text`].
pub fn table_hash() -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(table_text().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
