//! Frequency unit conversions.

use std::f64::consts::TAU;

/// Converts an ordinary frequency in MHz to an angular frequency in rad/ns.
pub fn mhz_to_rad_per_ns(mhz: f64) -> f64 {
    TAU * mhz * 1e-3
}

/// Converts an ordinary frequency in kHz to an angular frequency in rad/ns.
pub fn khz_to_rad_per_ns(khz: f64) -> f64 {
    TAU * khz * 1e-6
}

pub fn rad_per_ns_to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e-3)
}
