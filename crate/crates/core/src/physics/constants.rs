//! Physical constants (CODATA 2018, exact SI values where defined) and the
//! handful of unit converters the rest of the crate relies on.

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Boltzmann constant, eV/K.
pub const K_B_EV: f64 = 8.617_333_262e-5;
/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant, J·s.
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Magnetic flux quantum h/2e, Wb.
pub const PHI0: f64 = H / (2.0 * E_CHARGE);
/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// BCS weak-coupling ratio Δ0 / (k_B T_c).
pub const BCS_RATIO: f64 = 1.76;

pub fn ev_to_joule(ev: f64) -> f64 {
    ev * E_CHARGE
}

pub fn joule_to_ev(j: f64) -> f64 {
    j / E_CHARGE
}

/// Photon energy ħω = h·f in eV.
pub fn photon_energy_ev(freq_hz: f64) -> f64 {
    H * freq_hz / E_CHARGE
}

/// Thermal energy k_B·T in eV.
pub fn thermal_energy_ev(t_kelvin: f64) -> f64 {
    K_B_EV * t_kelvin
}

/// Voltage corresponding to an energy in eV (numerically identical, kept
/// for readability at call sites).
pub fn ev_to_volt(ev: f64) -> f64 {
    ev
}

pub fn hz_to_joule(freq_hz: f64) -> f64 {
    H * freq_hz
}

pub fn joule_to_hz(energy_j: f64) -> f64 {
    energy_j / H
}
