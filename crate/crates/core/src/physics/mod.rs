//! Shared physics kernel: constants, BCS relations, Mattis-Bardeen
//! conductivity and thermal quasiparticles. Everything here is a pure
//! function of its arguments.

pub mod bcs;
pub mod constants;
pub mod mattis_bardeen;
pub mod quad;

pub use bcs::{
    delta0_from_tc, gap_vs_temperature, kinetic_parameters, quasiparticle_density,
    sum_gap_voltage, tc_from_delta0, Gap, KineticParameters, SuperconductorParams,
};
pub use mattis_bardeen::{
    mattis_bardeen, mattis_bardeen_with, ComplexConductivityRatio, MbTolerance,
};
