//! Small dense complex matrices and the sparse kernels used by the
//! integrators.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrices with `σ_z|0⟩ = |0⟩`.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// `|ket⟩⟨bra|` for computational basis indices.
pub fn outer_basis(dim: usize, ket: usize, bra: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(ket, bra)] = ONE;
    m
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `min_φ ‖a − e^{iφ} b‖_F`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = (b.adjoint() * a).trace().norm();
    let sq = frobenius(a).powi(2) + frobenius(b).powi(2) - 2.0 * overlap;
    sq.max(0.0).sqrt()
}

/// `‖U†U − I‖_F`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential `exp(−i H t)` for a Hermitian `H`.
pub fn propagator(h: &CMatrix, t: f64) -> CMatrix {
    (h * c(0.0, -t)).exp()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Nonzero entries of a row-major square matrix.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseEntries {
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseEntries {
    pub fn rebuild(&mut self, dense: &[Complex64], dim: usize) {
        self.entries.clear();
        for (idx, z) in dense.iter().enumerate() {
            if z.re != 0.0 || z.im != 0.0 {
                self.entries.push((idx / dim, idx % dim, *z));
            }
        }
    }

    /// `out += −i (H ρ − ρ H)` for row-major `rho` and `out`.
    pub fn add_commutator(&self, rho: &[Complex64], out: &mut [Complex64], dim: usize) {
        for &(r, k, h) in &self.entries {
            let mh = -I * h;
            // (Hρ)_{r j} += H_{rk} ρ_{kj}
            let src = &rho[k * dim..(k + 1) * dim];
            let dst = &mut out[r * dim..(r + 1) * dim];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += mh * s;
            }
            // (ρH)_{i k'} += ρ_{i r} H_{r k'}, written with (r, k) = (row, col)
            for i in 0..dim {
                out[i * dim + k] -= mh * rho[i * dim + r];
            }
        }
    }

    /// `out = −i H ψ` for a state vector (or each column block of width `cols`).
    pub fn apply_schrodinger(&self, psi: &[Complex64], out: &mut [Complex64], cols: usize) {
        out.iter_mut().for_each(|z| *z = ZERO);
        for &(r, k, h) in &self.entries {
            let mh = -I * h;
            for j in 0..cols {
                out[r * cols + j] += mh * psi[k * cols + j];
            }
        }
    }
}

pub(crate) fn to_row_major(m: &CMatrix) -> Vec<Complex64> {
    let (r, cdim) = m.shape();
    let mut v = Vec::with_capacity(r * cdim);
    for i in 0..r {
        for j in 0..cdim {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub(crate) fn from_row_major(dim: usize, cols: usize, v: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(dim, cols, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_algebra() {
        let xy = pauli_x() * pauli_y();
        assert!(frobenius(&(xy - pauli_z() * I)) < 1e-15);
        assert!(unitarity_error(&pauli_y()) < 1e-15);
    }

    #[test]
    fn phase_alignment() {
        let u = pauli_x();
        let v = &u * Complex64::from_polar(1.0, 0.7);
        assert!(phase_aligned_distance(&u, &v) < 1e-7);
        assert!(phase_aligned_distance(&u, &pauli_z()) > 1.0);
    }

    #[test]
    fn sparse_commutator_matches_dense() {
        let h = CMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.1));
        let h = (&h + h.adjoint()) * c(0.5, 0.0);
        let rho = CMatrix::from_fn(3, 3, |i, j| c(0.1 * i as f64 + 0.2, 0.05 * j as f64));
        let expected = (&h * &rho - &rho * &h) * (-I);
        let mut sparse = SparseEntries::default();
        sparse.rebuild(&to_row_major(&h), 3);
        let mut out = vec![ZERO; 9];
        sparse.add_commutator(&to_row_major(&rho), &mut out, 3);
        let got = from_row_major(3, 3, &out);
        for (a, b) in got.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn propagator_of_pauli() {
        // exp(−iπ/2 σx) = −iσx
        let u = propagator(&pauli_x(), std::f64::consts::FRAC_PI_2);
        assert!(frobenius(&(u - pauli_x() * (-I))) < 1e-12);
    }
}
