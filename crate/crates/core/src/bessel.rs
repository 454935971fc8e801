//! Bessel function J₁ on its first rising branch and its inverse.
//!
//! The two-qubit modulation depth comes from inverting `J₁(η) = y` with
//! `η` below the first maximum of J₁, where the ascending series converges
//! quickly.

use crate::error::{Error, Result};

/// Location of the first maximum of J₁ (first zero of J₁').
pub const J1_ARGMAX: f64 = 1.841_183_781_340_659_3;

const SERIES_TERMS: usize = 25;

/// `J₁(x)` by its ascending power series. Accurate to a few ulp for
/// `|x| ≤ 4`.
pub fn j1(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    for m in 1..SERIES_TERMS {
        term *= q / (m as f64 * (m + 1) as f64);
        sum += term;
    }
    sum
}

/// `J_n(x)` for integer `n ≥ 0` by ascending series; used only for checks.
pub fn jn(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = (0..n).fold(1.0, |acc, k| acc * half / (k + 1) as f64);
    let mut sum = term;
    for m in 1..40 {
        term *= q / (m as f64 * (m + n as usize) as f64);
        sum += term;
    }
    sum
}

/// Largest value of J₁ on `[0, J1_ARGMAX]`.
pub fn j1_max() -> f64 {
    j1(J1_ARGMAX)
}

/// Inverts `J₁(x) = y` on the rising branch `x ∈ [0, 1.8412)` by bisection
/// to `1e-12`.
pub fn invert_bessel_j1(y: f64) -> Result<f64> {
    let ymax = j1_max();
    if !(0.0..ymax).contains(&y) {
        return Err(Error::Domain {
            op: "invert_bessel_j1",
            value: y,
            domain: "[0, 0.5819)",
        });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, J1_ARGMAX);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if j1(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    // Reference by quadrature of the integral representation
    // J₁(x) = (1/π)∫₀^π cos(τ − x sinτ) dτ.
    fn j1_quadrature(x: f64) -> f64 {
        let n = 2000;
        let h = PI / n as f64;
        let f = |t: f64| (t - x * t.sin()).cos();
        let mut acc = f(0.0) + f(PI);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0 / PI
    }

    #[test]
    fn series_matches_integral_representation() {
        for i in 0..=40 {
            let x = 0.1 * i as f64;
            assert_abs_diff_eq!(j1(x), j1_quadrature(x), epsilon = 1e-13);
        }
        assert_abs_diff_eq!(jn(1, 1.3), j1(1.3), epsilon = 1e-15);
    }

    #[test]
    fn branch_maximum() {
        assert_abs_diff_eq!(j1_max(), 0.581_865_224_281_596_4, epsilon = 1e-14);
        let h = 1e-5;
        assert!(j1(J1_ARGMAX - h) < j1_max() && j1(J1_ARGMAX + h) < j1_max());
    }

    #[test]
    fn inversion() {
        assert_eq!(invert_bessel_j1(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(invert_bessel_j1(j1(1.0)).unwrap(), 1.0, epsilon = 1e-10);
        let ratio = 0.015 / (2.0 * 2f64.sqrt() * 0.010);
        assert_abs_diff_eq!(ratio, 0.5303, epsilon = 1e-4);
        let x = invert_bessel_j1(ratio).unwrap();
        assert!(x > 1.0 && x < J1_ARGMAX);
        assert!((j1(x) - ratio).abs() < 1e-10);
        assert!(invert_bessel_j1(0.59).is_err());
        assert!(invert_bessel_j1(-0.01).is_err());
    }
}
