//! Shortest-path nonadiabatic geometric quantum gates.
//!
//! The crate is organised bottom-up:
//!
//! - [`bloch_path`]: closed circle loops on the Bloch sphere, azimuth
//!   schedules, and geometric invariants of sampled trajectories.
//! - [`pulse`]: inverse-engineered drives (detuning, Rabi envelope, phase),
//!   duration normalisation against an amplitude budget, DRAG correction and
//!   target unitaries.
//! - [`dynamics`]: RK4 Schrödinger and Lindblad propagation for the ideal
//!   qubit, the driven three-level transmon and the coupled-transmon pair.
//! - [`fidelity`]: averaged gate fidelities, robustness scans, fidelity
//!   traces and dynamical comparator gates.
//! - [`optimizer`]: Fourier-coefficient search that shortens the gate, and
//!   the Bessel inversion used to build the two-qubit modulation.
//!
//! Units are angular frequencies in rad/ns and times in ns throughout.

pub mod bessel;
pub mod bloch_path;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod fidelity;
pub mod linalg;
pub mod optimizer;
pub mod pulse;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
