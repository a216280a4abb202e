//! Characterization and modeling toolkit for superconducting Josephson
//! junctions, thin films, microwave resonators and transmon qubits.
//!
//! Everything is SI internally (Hz, K, Ω, A, m, H, F, s). Energies are carried
//! in electron-volts; [`physics::constants`] has the converters.
//!
//! Layout:
//! - [`physics`]: constants, BCS gap relations, Mattis-Bardeen conductivity,
//!   thermal quasiparticle density.
//! - [`fit`]: weighted, bounded Levenberg-Marquardt engine used by every fit.
//! - [`film`]: T_c / RRR / kinetic inductance from R(T) traces.
//! - [`junction`]: Ambegaokar-Baratoff, area scaling, J_c, annealing, RCSJ.
//! - [`resonator`]: notch S21 fitting and TLS / conduction loss models.
//! - [`qubit`]: transmon spectrum, coherence fits, loss budget, quasiparticles.
//! - [`io`]: trace files, reports, the batch pipeline and plot data.

// `!(x > 0.0)` also rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod film;
pub mod fit;
pub mod io;
pub mod junction;
pub mod physics;
pub mod qubit;
pub mod resonator;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use trace::{Trace, TraceValues};

/// Version string embedded in reports.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
