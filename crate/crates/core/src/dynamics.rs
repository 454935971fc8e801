//! Closed and open time evolution.
//!
//! All Hamiltonians are sampled into dense row-major buffers and converted to
//! sparse entry lists once per evaluation time. Integration is fixed-step
//! classical RK4; the step is shrunk so that it divides every segment between
//! drive breakpoints.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{invert_bessel_j1, j1_max};
use crate::error::{Error, Result};
use crate::linalg::{c, from_row_major, to_row_major, CMatrix, SparseEntries, ONE, ZERO};
use crate::pulse::{DrivePulse, DriveValue, QubitDrive};
use crate::units::{khz_to_rad_per_ns, mhz_to_rad_per_ns};

/// Default integrator step, ns.
pub const DEFAULT_DT: f64 = 0.001;
/// Largest fidelity change tolerated when the step is halved.
pub const CONVERGENCE_LIMIT: f64 = 1e-6;

/// A validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-9;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a normalised ket.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("state norm {norm} is not 1")));
        }
        Self::new(&v * v.adjoint())
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let herm = crate::linalg::hermiticity_error(m);
        if herm > Self::HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian ({herm:e})"
            )));
        }
        let tr = self.trace_error();
        if tr > Self::TRACE_TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace off by {tr:e}")));
        }
        let min = self.min_eigenvalue();
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!("density matrix eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - ONE).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * c(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }
}

/// The auxiliary basis `|φ₊⟩ = cos(α/2)|0⟩ + sin(α/2)e^{iβ}|1⟩`,
/// `|φ₋⟩ = sin(α/2)e^{−iβ}|0⟩ − cos(α/2)|1⟩` at the loop start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionFrame {
    pub alpha0: f64,
    pub beta0: f64,
}

impl EvolutionFrame {
    pub fn new(alpha0: f64, beta0: f64) -> Self {
        Self { alpha0, beta0 }
    }

    pub fn phi_plus(&self) -> nalgebra::DVector<Complex64> {
        let (s, c0) = (self.alpha0 / 2.0).sin_cos();
        nalgebra::DVector::from_vec(vec![c(c0, 0.0), Complex64::from_polar(s, self.beta0)])
    }

    pub fn phi_minus(&self) -> nalgebra::DVector<Complex64> {
        let (s, c0) = (self.alpha0 / 2.0).sin_cos();
        nalgebra::DVector::from_vec(vec![Complex64::from_polar(s, -self.beta0), c(-c0, 0.0)])
    }

    /// Dynamical phase rates are zero under parallel transport, so the
    /// phases `γ±(t)` are purely geometric: `γ₊ = −γ_g`, `γ₋ = +γ_g` at the
    /// end of the loop.
    pub fn final_phases(gamma_g: f64) -> (f64, f64) {
        (-gamma_g, gamma_g)
    }
}

/// Relative amplitude and detuning miscalibrations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorFractions {
    pub epsilon: f64,
    pub delta: f64,
}

impl ErrorFractions {
    pub const VALIDATED_RANGE: f64 = 0.1;

    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self { epsilon, delta }
    }

    pub fn is_zero(&self) -> bool {
        self.epsilon == 0.0 && self.delta == 0.0
    }

    /// True when either fraction lies outside `[−0.1, 0.1]`.
    pub fn outside_validated_range(&self) -> bool {
        self.epsilon.abs() > Self::VALIDATED_RANGE + 1e-15 || self.delta.abs() > Self::VALIDATED_RANGE + 1e-15
    }
}

/// Amplitude-damping rate `Γ` and dephasing rate `κ`, rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecoherenceRates {
    pub gamma_decay: f64,
    pub kappa_dephase: f64,
}

impl DecoherenceRates {
    pub fn new(gamma_decay: f64, kappa_dephase: f64) -> Result<Self> {
        for (v, op) in [(gamma_decay, "gamma_decay"), (kappa_dephase, "kappa_dephase")] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    op,
                    value: v,
                    domain: "[0, ∞)",
                });
            }
        }
        Ok(Self {
            gamma_decay,
            kappa_dephase,
        })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// `Γ = κ = 2π × 3 kHz`.
    pub fn reference() -> Self {
        let r = khz_to_rad_per_ns(3.0);
        Self {
            gamma_decay: r,
            kappa_dephase: r,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gamma_decay == 0.0 && self.kappa_dephase == 0.0
    }
}

/// Single transmon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub anharmonicity: f64,
}

impl TransmonParams {
    /// 2π × 220 MHz.
    pub fn reference() -> Self {
        Self {
            anharmonicity: mhz_to_rad_per_ns(220.0),
        }
    }
}

/// Two capacitively coupled transmons, all in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledTransmons {
    pub g: f64,
    /// `ω_a − ω_b`.
    pub delta: f64,
    pub anh_a: f64,
    pub anh_b: f64,
}

impl CoupledTransmons {
    /// g = 2π×10 MHz, Δ = 2π×500 MHz, α_a = 2π×220 MHz, α_b = 2π×200 MHz.
    pub fn reference() -> Self {
        Self {
            g: mhz_to_rad_per_ns(10.0),
            delta: mhz_to_rad_per_ns(500.0),
            anh_a: mhz_to_rad_per_ns(220.0),
            anh_b: mhz_to_rad_per_ns(200.0),
        }
    }

    /// 2π × 15 MHz.
    pub fn reference_g_prime_max() -> f64 {
        mhz_to_rad_per_ns(15.0)
    }
}

/// A time-dependent Hamiltonian, in rad/ns.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    fn duration(&self) -> f64;

    /// Adds `H(t)` into a zeroed row-major buffer of length `dim²`.
    fn fill(&self, t: f64, out: &mut [Complex64]);

    /// Interior times where `H` is discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn matrix(&self, t: f64) -> CMatrix {
        let d = self.dim();
        let mut buf = vec![ZERO; d * d];
        self.fill(t, &mut buf);
        from_row_major(d, d, &buf)
    }
}

fn fill_qubit_block(v: &DriveValue, out: &mut [Complex64], dim: usize) {
    out[0] += c(-v.detuning / 2.0, 0.0);
    out[dim + 1] += c(v.detuning / 2.0, 0.0);
    out[dim] += v.rabi / 2.0;
    out[1] += v.rabi.conj() / 2.0;
}

/// `H = Δ/2 (|1⟩⟨1| − |0⟩⟨0|) + [Ω/2 |1⟩⟨0| + h.c.]`.
#[derive(Clone, Copy)]
pub struct TwoLevel<'a> {
    pub drive: &'a dyn QubitDrive,
}

impl<'a> TwoLevel<'a> {
    pub fn new(drive: &'a dyn QubitDrive) -> Self {
        Self { drive }
    }
}

impl Hamiltonian for TwoLevel<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn duration(&self) -> f64 {
        self.drive.duration()
    }

    fn fill(&self, t: f64, out: &mut [Complex64]) {
        fill_qubit_block(&self.drive.sample(t), out, 2);
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.drive.breakpoints()
    }
}

/// Transmon truncated to three levels, in the frame rotating with the drive:
/// the qubit block of [`TwoLevel`], `|2⟩` at `3Δ/2 − α`, and `√2` times the
/// drive on `|1⟩ ↔ |2⟩`.
#[derive(Clone, Copy)]
pub struct ThreeLevel<'a> {
    pub drive: &'a dyn QubitDrive,
    pub anharmonicity: f64,
}

impl<'a> ThreeLevel<'a> {
    pub fn new(drive: &'a dyn QubitDrive, params: TransmonParams) -> Self {
        Self {
            drive,
            anharmonicity: params.anharmonicity,
        }
    }
}

impl Hamiltonian for ThreeLevel<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn duration(&self) -> f64 {
        self.drive.duration()
    }

    fn fill(&self, t: f64, out: &mut [Complex64]) {
        let v = self.drive.sample(t);
        fill_qubit_block(&v, out, 3);
        out[8] += c(1.5 * v.detuning - self.anharmonicity, 0.0);
        out[7] += v.rabi * (SQRT_2 / 2.0);
        out[5] += v.rabi.conj() * (SQRT_2 / 2.0);
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.drive.breakpoints()
    }
}

/// A drive with amplitude and detuning errors:
/// `Ω → (1 + ε)Ω` and `Δ → Δ + δΩ₀`, which adds
/// `(ε/2)[Ω|1⟩⟨0| + h.c.] + (δ/2)Ω₀(|1⟩⟨1| − |0⟩⟨0|)` to the Hamiltonian.
#[derive(Clone, Copy)]
pub struct PerturbedDrive<'a> {
    pub base: &'a dyn QubitDrive,
    pub errors: ErrorFractions,
    pub omega0: f64,
}

pub fn error_inject(base: &dyn QubitDrive, errors: ErrorFractions, omega0: f64) -> PerturbedDrive<'_> {
    PerturbedDrive { base, errors, omega0 }
}

impl QubitDrive for PerturbedDrive<'_> {
    fn duration(&self) -> f64 {
        self.base.duration()
    }

    fn sample(&self, t: f64) -> DriveValue {
        let v = self.base.sample(t);
        if self.errors.is_zero() {
            return v;
        }
        DriveValue {
            rabi: v.rabi * (1.0 + self.errors.epsilon),
            detuning: v.detuning + self.errors.delta * self.omega0,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }
}

/// Piecewise-constant drive.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedDrive {
    pub segments: Vec<DriveSegment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSegment {
    pub duration: f64,
    pub rabi: Complex64,
    pub detuning: f64,
}

impl SegmentedDrive {
    pub fn new(segments: Vec<DriveSegment>) -> Result<Self> {
        if segments.is_empty() || segments.iter().any(|s| !(s.duration > 0.0)) {
            return Err(Error::InvalidParameter("segments need positive durations".into()));
        }
        Ok(Self { segments })
    }
}

impl QubitDrive for SegmentedDrive {
    fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    fn sample(&self, t: f64) -> DriveValue {
        let mut end = 0.0;
        for s in &self.segments {
            end += s.duration;
            if t < end {
                return DriveValue {
                    rabi: s.rabi,
                    detuning: s.detuning,
                };
            }
        }
        let last = self.segments.last().expect("non-empty");
        DriveValue {
            rabi: last.rabi,
            detuning: last.detuning,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let n = self.segments.len();
        self.segments[..n - 1]
            .iter()
            .map(|s| {
                acc += s.duration;
                acc
            })
            .collect()
    }
}

/// Cumulative integral of a smooth function on a uniform grid, evaluated
/// between nodes by cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTable {
    h: f64,
    values: Vec<f64>,
    rates: Vec<f64>,
}

impl IntegralTable {
    pub fn build(f: impl Fn(f64) -> f64, duration: f64, max_step: f64) -> Self {
        let n = ((duration / max_step).ceil() as usize).max(1);
        let h = duration / n as f64;
        let rates: Vec<f64> = (0..=n).map(|k| f(k as f64 * h)).collect();
        let mut values = vec![0.0; n + 1];
        for k in 0..n {
            let mid = f((k as f64 + 0.5) * h);
            values[k + 1] = values[k] + h / 6.0 * (rates[k] + 4.0 * mid + rates[k + 1]);
        }
        Self { h, values, rates }
    }

    pub fn total(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    pub fn at(&self, t: f64) -> f64 {
        let n = self.values.len() - 1;
        let x = (t / self.h).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n.saturating_sub(1));
        let u = x - k as f64;
        let (p0, p1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.rates[k] * self.h, self.rates[k + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * p0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * p1 + (u3 - u2) * m1
    }
}

/// Parametric modulation realising an effective `{|11⟩, |02⟩}` drive.
///
/// The shortest-path pulse supplies `g′(t) = |Ω(t)|`, `φ(t) = arg Ω(t)` and
/// `Δ′(t) = Δ(t)`; the modulation amplitude is `η = J₁⁻¹[g′/(2√2 g)]` and the
/// frequency `ν = Δ′ + α_b + Δ`.
#[derive(Debug, Clone)]
pub struct TwoQubitDrive {
    pub pulse: DrivePulse,
    pub pair: CoupledTransmons,
    detuning_integral: IntegralTable,
    pub times: Vec<f64>,
    pub eta: Vec<f64>,
    pub nu: Vec<f64>,
    pub varphi: Vec<f64>,
    pub g_prime: Vec<f64>,
    pub delta_prime: Vec<f64>,
}

/// Step of the `∫Δ′` table, ns.
const PHASE_TABLE_STEP: f64 = 5e-4;

/// `η(t)` for samples of `g′(t)`.
pub fn eta_waveform(g_prime: &[f64], g: f64) -> Result<Vec<f64>> {
    g_prime
        .iter()
        .map(|&gp| invert_bessel_j1(gp / (2.0 * SQRT_2 * g)))
        .collect()
}

impl TwoQubitDrive {
    pub fn new(pulse: DrivePulse, pair: CoupledTransmons) -> Result<Self> {
        let peak = pulse.peak_envelope();
        if peak / (2.0 * SQRT_2 * pair.g) >= j1_max() {
            return Err(Error::Domain {
                op: "TwoQubitDrive",
                value: peak / (2.0 * SQRT_2 * pair.g),
                domain: "[0, max J1)",
            });
        }
        let drive = pulse.without_drag();
        let detuning_integral = IntegralTable::build(|t| drive.sample(t).detuning, drive.tau, PHASE_TABLE_STEP);
        let times = drive.times.clone();
        let g_prime = drive.envelope.clone();
        let delta_prime = drive.detuning.clone();
        let eta = eta_waveform(&g_prime, pair.g)?;
        let nu = delta_prime.iter().map(|d| d + pair.anh_b + pair.delta).collect();
        let varphi = drive.phase.clone();
        Ok(Self {
            pulse: drive,
            pair,
            detuning_integral,
            times,
            eta,
            nu,
            varphi,
            g_prime,
            delta_prime,
        })
    }

    pub fn duration(&self) -> f64 {
        self.pulse.tau
    }

    /// `∫₀ᵗ ν dt′`.
    pub fn nu_integral(&self, t: f64) -> f64 {
        (self.pair.anh_b + self.pair.delta) * t + self.detuning_integral.at(t)
    }

    pub fn detuning_integral(&self, t: f64) -> f64 {
        self.detuning_integral.at(t)
    }

    /// `(η, φ)` at `t`.
    pub fn modulation(&self, t: f64) -> Result<(f64, f64)> {
        let v = self.pulse.sample(t);
        let eta = invert_bessel_j1(v.rabi.norm() / (2.0 * SQRT_2 * self.pair.g))?;
        Ok((eta, v.rabi.arg()))
    }

    /// `exp[i ∫₀^τ Δ′ (|11⟩⟨11| − |02⟩⟨02|)/2]`, which maps the
    /// interaction-picture state at `τ` into the frame of the effective model.
    pub fn frame_correction(&self) -> CMatrix {
        let phase = self.detuning_integral.total() / 2.0;
        let mut v = CMatrix::identity(9, 9);
        v[(TWO_QUBIT_11, TWO_QUBIT_11)] = Complex64::from_polar(1.0, phase);
        v[(TWO_QUBIT_02, TWO_QUBIT_02)] = Complex64::from_polar(1.0, -phase);
        v
    }
}

/// Index of `|ab⟩` in the 9-level product basis.
pub const fn two_qubit_index(a: usize, b: usize) -> usize {
    3 * a + b
}

pub const TWO_QUBIT_02: usize = two_qubit_index(0, 2);
pub const TWO_QUBIT_11: usize = two_qubit_index(1, 1);
/// `|00⟩, |01⟩, |10⟩, |11⟩` inside the 9-level space.
pub const TWO_QUBIT_COMPUTATIONAL: [usize; 4] = [0, 1, 3, 4];

/// Coupled transmons in the interaction picture:
/// `g{[|10⟩⟨01|e^{iΔt} + √2|11⟩⟨02|e^{i(Δ+α_b)t} + √2|20⟩⟨11|e^{i(Δ−α_a)t}]
/// e^{−iη sin(∫ν + φ)} + h.c.}`.
#[derive(Clone, Copy)]
pub struct TwoQubitFull<'a> {
    pub drive: &'a TwoQubitDrive,
}

impl Hamiltonian for TwoQubitFull<'_> {
    fn dim(&self) -> usize {
        9
    }

    fn duration(&self) -> f64 {
        self.drive.duration()
    }

    fn fill(&self, t: f64, out: &mut [Complex64]) {
        let p = &self.drive.pair;
        if p.g == 0.0 {
            return;
        }
        let (eta, varphi) = self
            .drive
            .modulation(t)
            .expect("modulation range checked at construction");
        let f = eta * (self.drive.nu_integral(t) + varphi).sin();
        let terms = [
            (two_qubit_index(1, 0), two_qubit_index(0, 1), p.g, p.delta),
            (TWO_QUBIT_11, TWO_QUBIT_02, SQRT_2 * p.g, p.delta + p.anh_b),
            (two_qubit_index(2, 0), TWO_QUBIT_11, SQRT_2 * p.g, p.delta - p.anh_a),
        ];
        for (r, k, amp, freq) in terms {
            let z = Complex64::from_polar(amp, freq * t - f);
            out[r * 9 + k] += z;
            out[k * 9 + r] += z.conj();
        }
    }
}

/// Effective model `[[−Δ′/2, (g′/2)e^{−iφ}], [(g′/2)e^{iφ}, Δ′/2]]` on
/// `{|11⟩, |02⟩}`, embedded in the 9-level space.
#[derive(Clone, Copy)]
pub struct TwoQubitEffective<'a> {
    pub drive: &'a dyn QubitDrive,
}

impl TwoQubitEffective<'_> {
    pub fn block(&self, t: f64) -> CMatrix {
        let v = self.drive.sample(t);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(-v.detuning / 2.0, 0.0);
        m[(1, 1)] = c(v.detuning / 2.0, 0.0);
        m[(0, 1)] = v.rabi.conj() / 2.0;
        m[(1, 0)] = v.rabi / 2.0;
        m
    }
}

impl Hamiltonian for TwoQubitEffective<'_> {
    fn dim(&self) -> usize {
        9
    }

    fn duration(&self) -> f64 {
        self.drive.duration()
    }

    fn fill(&self, t: f64, out: &mut [Complex64]) {
        let b = self.block(t);
        let idx = [TWO_QUBIT_11, TWO_QUBIT_02];
        for (i, &r) in idx.iter().enumerate() {
            for (j, &k) in idx.iter().enumerate() {
                out[r * 9 + k] += b[(i, j)];
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.drive.breakpoints()
    }
}

/// Which collapse operators accompany a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseOperators {
    /// `σ₋ = |0⟩⟨1|` and `σ_z = |1⟩⟨1| − |0⟩⟨0|`, higher levels untouched.
    #[default]
    Qubit,
    /// Transmon ladder `b = Σ √k |k−1⟩⟨k|` and `2b†b − 1`.
    Ladder,
}

fn single_collapse(levels: usize, kind: CollapseOperators) -> (CMatrix, CMatrix) {
    let mut lower = CMatrix::zeros(levels, levels);
    let mut z = CMatrix::zeros(levels, levels);
    match kind {
        CollapseOperators::Qubit => {
            lower[(0, 1)] = ONE;
            z[(0, 0)] = -ONE;
            z[(1, 1)] = ONE;
        }
        CollapseOperators::Ladder => {
            for k in 1..levels {
                lower[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
            }
            for k in 0..levels {
                z[(k, k)] = c(2.0 * k as f64 - 1.0, 0.0);
            }
        }
    }
    (lower, z)
}

/// Sparse superoperator `Σ_j (r_j/2) L(c_j)` with
/// `L(σ)ρ = 2σρσ† − σ†σρ − ρσ†σ`.
#[derive(Debug, Clone, Default)]
pub struct Dissipator {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl Dissipator {
    pub fn none(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn from_operators(dim: usize, ops: &[(f64, CMatrix)]) -> Result<Self> {
        for (_, op) in ops {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.nrows(),
                });
            }
        }
        let mut entries = Vec::new();
        let ops: Vec<(f64, &CMatrix, CMatrix, CMatrix)> = ops
            .iter()
            .filter(|(r, _)| *r != 0.0)
            .map(|(r, op)| {
                let opd = op.adjoint();
                let n = &opd * op;
                (*r, op, opd, n)
            })
            .collect();
        if ops.is_empty() {
            return Ok(Self::none(dim));
        }
        for i in 0..dim {
            for j in 0..dim {
                let e = crate::linalg::outer_basis(dim, i, j);
                let mut out = CMatrix::zeros(dim, dim);
                for (rate, op, opd, n) in &ops {
                    let term = (*op * &e * opd) * c(2.0, 0.0) - n * &e - &e * n;
                    out += term * c(rate / 2.0, 0.0);
                }
                for p in 0..dim {
                    for q in 0..dim {
                        let z = out[(p, q)];
                        if z.norm() > 0.0 {
                            entries.push((p * dim + q, i * dim + j, z));
                        }
                    }
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Collapse set for a single qubit embedded in `levels` levels.
    pub fn single(levels: usize, rates: &DecoherenceRates, kind: CollapseOperators) -> Result<Self> {
        let (lower, z) = single_collapse(levels, kind);
        Self::from_operators(levels, &[(rates.gamma_decay, lower), (rates.kappa_dephase, z)])
    }

    /// The single-qubit pair applied to each transmon of a 3 ⊗ 3 system.
    pub fn pair(rates: &DecoherenceRates, kind: CollapseOperators) -> Result<Self> {
        let (lower, z) = single_collapse(3, kind);
        let id = CMatrix::identity(3, 3);
        Self::from_operators(
            9,
            &[
                (rates.gamma_decay, lower.kronecker(&id)),
                (rates.kappa_dephase, z.kronecker(&id)),
                (rates.gamma_decay, id.kronecker(&lower)),
                (rates.kappa_dephase, id.kronecker(&z)),
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = to_row_major(rho);
        let mut out = vec![ZERO; v.len()];
        self.add_to(&v, &mut out);
        from_row_major(self.dim, self.dim, &out)
    }

    fn add_to(&self, rho: &[Complex64], out: &mut [Complex64]) {
        for &(o, i, z) in &self.entries {
            out[o] += z * rho[i];
        }
    }
}

/// Step control for the RK4 integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// Largest step, ns.
    pub dt: f64,
    /// Re-run at `dt/2` and reject if a fidelity moves by more than
    /// [`CONVERGENCE_LIMIT`].
    pub convergence_check: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            convergence_check: false,
        }
    }
}

impl IntegratorOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn checked(mut self) -> Self {
        self.convergence_check = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain {
                op: "IntegratorOptions",
                value: self.dt,
                domain: "(0, ∞)",
            });
        }
        Ok(())
    }

    pub fn halved(&self) -> Self {
        Self {
            dt: self.dt / 2.0,
            ..*self
        }
    }
}

/// Evaluates `f` at `dt` and, if requested, at `dt/2`; returns the finer
/// value or rejects the step.
pub fn with_convergence_guard<T>(
    opts: &IntegratorOptions,
    f: impl Fn(&IntegratorOptions) -> Result<T>,
    measure: impl Fn(&T) -> f64,
) -> Result<T> {
    opts.validate()?;
    let coarse = f(opts)?;
    if !opts.convergence_check {
        return Ok(coarse);
    }
    let fine = f(&opts.halved())?;
    let change = (measure(&coarse) - measure(&fine)).abs();
    if change > CONVERGENCE_LIMIT {
        return Err(Error::StepSizeRejected {
            change,
            limit: CONVERGENCE_LIMIT,
        });
    }
    Ok(fine)
}

/// One integration interval `[t0, t1]` split into `steps` equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSegment {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl GridSegment {
    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }
}

/// Splits `[0, duration]` at the breakpoints, each piece stepped with the
/// largest step not exceeding `dt` that divides it.
pub fn time_grid(duration: f64, breakpoints: &[f64], dt: f64) -> Vec<GridSegment> {
    let mut edges = vec![0.0];
    let mut bps: Vec<f64> = breakpoints
        .iter()
        .cloned()
        .filter(|&b| b > 0.0 && b < duration)
        .collect();
    bps.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    edges.extend(bps);
    edges.push(duration);
    edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| GridSegment {
            t0: w[0],
            t1: w[1],
            steps: (((w[1] - w[0]) / dt).ceil() as usize).max(1),
        })
        .collect()
}

struct Sampler<'a> {
    h: &'a dyn Hamiltonian,
    dense: Vec<Complex64>,
}

impl<'a> Sampler<'a> {
    fn new(h: &'a dyn Hamiltonian) -> Self {
        let d = h.dim();
        Self {
            h,
            dense: vec![ZERO; d * d],
        }
    }

    fn sparse_at(&mut self, t: f64, out: &mut SparseEntries) {
        self.dense.iter_mut().for_each(|z| *z = ZERO);
        self.h.fill(t, &mut self.dense);
        out.rebuild(&self.dense, self.h.dim());
    }
}

/// Right-hand side of a linear ODE in terms of the sparse Hamiltonian.
trait Generator {
    fn rhs(&self, h: &SparseEntries, y: &[Complex64], out: &mut [Complex64]);
}

struct Liouvillian<'a> {
    dim: usize,
    dissipator: &'a Dissipator,
}

impl Generator for Liouvillian<'_> {
    fn rhs(&self, h: &SparseEntries, y: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        h.add_commutator(y, out, self.dim);
        self.dissipator.add_to(y, out);
    }
}

struct Schrodinger {
    cols: usize,
}

impl Generator for Schrodinger {
    fn rhs(&self, h: &SparseEntries, y: &[Complex64], out: &mut [Complex64]) {
        h.apply_schrodinger(y, out, self.cols);
    }
}

/// Classical RK4 over a batch of state buffers. `observe` is called after
/// every step with the step count, the time and the states; returning
/// `false` is not supported, observation is passive.
fn rk4_batch(
    h: &dyn Hamiltonian,
    gen: &dyn Generator,
    states: &mut [Vec<Complex64>],
    dt: f64,
    mut observe: impl FnMut(usize, f64, &mut [Vec<Complex64>]),
) {
    let grid = time_grid(h.duration(), &h.breakpoints(), dt);
    let len = states.first().map_or(0, |s| s.len());
    let mut sampler = Sampler::new(h);
    let (mut h0, mut hm, mut h1) = (
        SparseEntries::default(),
        SparseEntries::default(),
        SparseEntries::default(),
    );
    let mut k = vec![ZERO; len];
    let mut acc = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];
    let mut count = 0;
    for seg in &grid {
        let step = seg.step();
        let nudge = 1e-12 * (seg.t1 - seg.t0);
        let edge = |t: f64| {
            if t <= seg.t0 {
                seg.t0 + nudge
            } else if t >= seg.t1 {
                seg.t1 - nudge
            } else {
                t
            }
        };
        sampler.sparse_at(edge(seg.t0), &mut h0);
        for n in 0..seg.steps {
            let t = seg.t0 + n as f64 * step;
            let t_end = if n + 1 == seg.steps { seg.t1 } else { t + step };
            sampler.sparse_at(t + step / 2.0, &mut hm);
            sampler.sparse_at(edge(t_end), &mut h1);
            for y in states.iter_mut() {
                gen.rhs(&h0, y, &mut k);
                for ((a, t_), (kv, yv)) in acc.iter_mut().zip(tmp.iter_mut()).zip(k.iter().zip(y.iter())) {
                    *a = *kv;
                    *t_ = yv + kv * (step / 2.0);
                }
                gen.rhs(&hm, &tmp, &mut k);
                for ((a, t_), (kv, yv)) in acc.iter_mut().zip(tmp.iter_mut()).zip(k.iter().zip(y.iter())) {
                    *a += kv * 2.0;
                    *t_ = yv + kv * (step / 2.0);
                }
                gen.rhs(&hm, &tmp, &mut k);
                for ((a, t_), (kv, yv)) in acc.iter_mut().zip(tmp.iter_mut()).zip(k.iter().zip(y.iter())) {
                    *a += kv * 2.0;
                    *t_ = yv + kv * step;
                }
                gen.rhs(&h1, &tmp, &mut k);
                for ((yv, a), kv) in y.iter_mut().zip(acc.iter()).zip(k.iter()) {
                    *yv += (a + kv) * (step / 6.0);
                }
            }
            std::mem::swap(&mut h0, &mut h1);
            count += 1;
            observe(count, t_end, states);
        }
    }
}

/// A recorded Lindblad evolution.
#[derive(Debug, Clone)]
pub struct LindbladRun {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Largest `|Tr ρ − 1|` seen at any step.
    pub max_trace_error: f64,
}

impl LindbladRun {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("at least the initial state is recorded")
    }
}

fn check_dims(h: &dyn Hamiltonian, d: &Dissipator, dim: usize) -> Result<()> {
    if h.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: dim,
        });
    }
    if d.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: d.dim(),
        });
    }
    Ok(())
}

/// Integrates `ρ̇ = −i[H, ρ] + D(ρ)` over `[0, H.duration()]`, recording
/// every `record_stride` steps (and always the first and last state).
/// `ρ` is re-symmetrised after every step.
pub fn evolve_lindblad(
    h: &dyn Hamiltonian,
    rho0: &DensityMatrix,
    dissipator: &Dissipator,
    opts: &IntegratorOptions,
    record_stride: usize,
) -> Result<LindbladRun> {
    opts.validate()?;
    let dim = rho0.dim();
    check_dims(h, dissipator, dim)?;
    let gen = Liouvillian { dim, dissipator };
    let mut states = vec![to_row_major(rho0.matrix())];
    let mut run = LindbladRun {
        times: vec![0.0],
        states: vec![rho0.clone()],
        max_trace_error: rho0.trace_error(),
    };
    let total: usize = time_grid(h.duration(), &h.breakpoints(), opts.dt)
        .iter()
        .map(|s| s.steps)
        .sum();
    rk4_batch(h, &gen, &mut states, opts.dt, |n, t, ys| {
        let y = &mut ys[0];
        let mut tr = ZERO;
        for i in 0..dim {
            for j in i..dim {
                let a = y[i * dim + j];
                let b = y[j * dim + i];
                let m = (a + b.conj()) * 0.5;
                y[i * dim + j] = m;
                y[j * dim + i] = m.conj();
            }
            tr += y[i * dim + i];
        }
        run.max_trace_error = run.max_trace_error.max((tr - ONE).norm());
        if n == total || (record_stride > 0 && n % record_stride == 0) {
            run.times.push(t);
            run.states.push(DensityMatrix::unchecked(from_row_major(dim, dim, y)));
        }
    });
    Ok(run)
}

/// Schrödinger propagator `U(τ)`, integrated column-wise.
pub fn propagate_unitary(h: &dyn Hamiltonian, opts: &IntegratorOptions) -> Result<CMatrix> {
    opts.validate()?;
    let dim = h.dim();
    let mut states = vec![to_row_major(&CMatrix::identity(dim, dim))];
    rk4_batch(h, &Schrodinger { cols: dim }, &mut states, opts.dt, |_, _, _| {});
    Ok(from_row_major(dim, dim, &states[0]))
}

/// Evolves a set of kets (columns of `psi0`) and records them every
/// `record_stride` steps.
pub fn evolve_states(
    h: &dyn Hamiltonian,
    psi0: &CMatrix,
    opts: &IntegratorOptions,
    record_stride: usize,
) -> Result<(Vec<f64>, Vec<CMatrix>)> {
    opts.validate()?;
    if psi0.nrows() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi0.nrows(),
        });
    }
    let (rows, cols) = psi0.shape();
    let mut states = vec![to_row_major(psi0)];
    let total: usize = time_grid(h.duration(), &h.breakpoints(), opts.dt)
        .iter()
        .map(|s| s.steps)
        .sum();
    let mut times = vec![0.0];
    let mut out = vec![psi0.clone()];
    rk4_batch(h, &Schrodinger { cols }, &mut states, opts.dt, |n, t, ys| {
        if n == total || (record_stride > 0 && n % record_stride == 0) {
            times.push(t);
            out.push(from_row_major(rows, cols, &ys[0]));
        }
    });
    Ok((times, out))
}

/// The evolution map restricted to inputs supported on a subspace, stored
/// as the images of `|k⟩⟨l|` for `k ≤ l`.
#[derive(Debug, Clone)]
pub struct ChannelMap {
    pub dim: usize,
    pub subspace: Vec<usize>,
    images: Vec<CMatrix>,
}

impl ChannelMap {
    fn pair_index(&self, k: usize, l: usize) -> usize {
        let n = self.subspace.len();
        debug_assert!(k <= l && l < n);
        k * n - k * (k + 1) / 2 + l
    }

    /// Image of `|k⟩⟨l|` (subspace indices).
    pub fn image(&self, k: usize, l: usize) -> CMatrix {
        if k <= l {
            self.images[self.pair_index(k, l)].clone()
        } else {
            self.images[self.pair_index(l, k)].adjoint()
        }
    }

    /// Output for the input `|ψ⟩⟨ψ|`, `ψ` given by its subspace amplitudes.
    pub fn apply_pure(&self, psi: &[Complex64]) -> CMatrix {
        let n = self.subspace.len();
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in 0..n {
            for l in k..n {
                let w = psi[k] * psi[l].conj();
                if w == ZERO {
                    continue;
                }
                let img = &self.images[self.pair_index(k, l)];
                if k == l {
                    out += img * w;
                } else {
                    out += img * w + img.adjoint() * w.conj();
                }
            }
        }
        out
    }

    /// `⟨ν| Λ(|ψ⟩⟨ψ|) |ν⟩` without forming the output matrix.
    pub fn expectation(&self, psi: &[Complex64], nu: &[Complex64]) -> f64 {
        let n = self.subspace.len();
        let mut total = 0.0;
        for k in 0..n {
            for l in k..n {
                let w = psi[k] * psi[l].conj();
                if w == ZERO {
                    continue;
                }
                let img = &self.images[self.pair_index(k, l)];
                let mut e = ZERO;
                for (p, np) in nu.iter().enumerate() {
                    if *np == ZERO {
                        continue;
                    }
                    for (q, nq) in nu.iter().enumerate() {
                        e += np.conj() * img[(p, q)] * nq;
                    }
                }
                // the (l, k) image is the adjoint, whose expectation is conj(e)
                total += if k == l { (w * e).re } else { 2.0 * (w * e).re };
            }
        }
        total
    }

    /// Conjugates every image by `V`.
    pub fn transform(&self, v: &CMatrix) -> ChannelMap {
        let vd = v.adjoint();
        ChannelMap {
            dim: self.dim,
            subspace: self.subspace.clone(),
            images: self.images.iter().map(|m| v * m * &vd).collect(),
        }
    }

    /// Largest deviation of `Tr Λ(|k⟩⟨l|)` from `δ_kl`.
    pub fn trace_error(&self) -> f64 {
        let n = self.subspace.len();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for l in k..n {
                let expected = if k == l { ONE } else { ZERO };
                worst = worst.max((self.images[self.pair_index(k, l)].trace() - expected).norm());
            }
        }
        worst
    }
}

/// Propagates `|k⟩⟨l|` for all `k ≤ l` in `subspace` through the master
/// equation. By linearity this gives the output for any initial state on the
/// subspace at the cost of one batched integration.
pub fn propagate_map(
    h: &dyn Hamiltonian,
    dissipator: &Dissipator,
    subspace: &[usize],
    opts: &IntegratorOptions,
) -> Result<ChannelMap> {
    opts.validate()?;
    let dim = h.dim();
    check_dims(h, dissipator, dim)?;
    if let Some(&bad) = subspace.iter().find(|&&i| i >= dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad + 1,
        });
    }
    let mut states = Vec::new();
    for (a, &k) in subspace.iter().enumerate() {
        for &l in &subspace[a..] {
            states.push(to_row_major(&crate::linalg::outer_basis(dim, k, l)));
        }
    }
    let gen = Liouvillian { dim, dissipator };
    rk4_batch(h, &gen, &mut states, opts.dt, |_, _, _| {});
    Ok(ChannelMap {
        dim,
        subspace: subspace.to_vec(),
        images: states.iter().map(|s| from_row_major(dim, dim, s)).collect(),
    })
}

/// Outcome of evolving the auxiliary states under a two-level Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportReport {
    /// `max_t max_± |⟨ψ±(t)|H(t)|ψ±(t)⟩|`, rad/ns.
    pub max_violation: f64,
    /// `max_± (1 − |⟨φ±(0)|ψ±(τ)⟩|)`.
    pub cyclic_deviation: f64,
    /// `arg⟨φ₊(0)|ψ₊(τ)⟩` and `arg⟨φ₋(0)|ψ₋(τ)⟩`.
    pub phases: (f64, f64),
}

/// Evolves `|φ±(0)⟩` under `h` and checks parallel transport and cyclicity.
pub fn parallel_transport_check(
    h: &dyn Hamiltonian,
    frame: &EvolutionFrame,
    opts: &IntegratorOptions,
) -> Result<TransportReport> {
    if h.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: h.dim(),
        });
    }
    let plus = frame.phi_plus();
    let minus = frame.phi_minus();
    let mut psi0 = CMatrix::zeros(2, 2);
    psi0.set_column(0, &plus);
    psi0.set_column(1, &minus);
    let (times, states) = evolve_states(h, &psi0, opts, 1)?;
    let mut worst: f64 = 0.0;
    for (t, psi) in times.iter().zip(&states) {
        let hm = h.matrix(*t);
        for col in 0..2 {
            let v = psi.column(col);
            let e = (v.adjoint() * &hm * v)[(0, 0)];
            worst = worst.max(e.norm());
        }
    }
    let last = states.last().expect("non-empty");
    let op = (plus.adjoint() * last.column(0))[(0, 0)];
    let om = (minus.adjoint() * last.column(1))[(0, 0)];
    Ok(TransportReport {
        max_violation: worst,
        cyclic_deviation: (1.0 - op.norm()).max(1.0 - om.norm()),
        phases: (op.arg(), om.arg()),
    })
}

/// Amplitude of the first sideband of `e^{−iη sin θ}`, extracted by a
/// discrete Fourier sum over one period.
pub fn jacobi_anger_sideband(eta: f64, samples: usize) -> f64 {
    let n = samples.max(8);
    let mut acc = ZERO;
    for k in 0..n {
        let theta = 2.0 * PI * k as f64 / n as f64;
        acc += Complex64::from_polar(1.0, -eta * theta.sin() + theta);
    }
    // e^{−iη sinθ} = Σ J_n(η) e^{−inθ}; the n = 1 coefficient is picked by e^{+iθ}
    (acc / n as f64).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::j1;
    use crate::linalg::{frobenius, identity, unitarity_error, I};
    use crate::pulse::{synthesize_catalog, AmplitudeBudget, CatalogGate};
    use approx::assert_abs_diff_eq;

    struct Idle(usize, f64);
    impl Hamiltonian for Idle {
        fn dim(&self) -> usize {
            self.0
        }
        fn duration(&self) -> f64 {
            self.1
        }
        fn fill(&self, _: f64, _: &mut [Complex64]) {}
    }

    #[test]
    fn density_matrix_validation() {
        let mixed = DensityMatrix::new(identity(2) * c(0.5, 0.0)).unwrap();
        assert_eq!(mixed.populations(), vec![0.5, 0.5]);
        assert_abs_diff_eq!(mixed.min_eigenvalue(), 0.5, epsilon = 1e-15);
        assert!(DensityMatrix::new(identity(2)).is_err());
        let mut bad = identity(2) * c(0.5, 0.0);
        bad[(0, 1)] = c(0.0, 0.1);
        assert!(DensityMatrix::new(bad).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = c(1.5, 0.0);
        neg[(1, 1)] = c(-0.5, 0.0);
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::pure(&[ONE, ONE]).is_err());
    }

    #[test]
    fn frame_is_orthonormal() {
        for (a, b) in [(0.0, 0.3), (0.7, 1.1), (std::f64::consts::FRAC_PI_4, 0.0)] {
            let f = EvolutionFrame::new(a, b);
            let p = f.phi_plus();
            let m = f.phi_minus();
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(m.norm(), 1.0, epsilon = 1e-15);
            assert!((p.adjoint() * &m)[(0, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn idle_evolution_is_trivial() {
        let rho0 = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let run = evolve_lindblad(
            &Idle(2, 5.0),
            &rho0,
            &Dissipator::none(2),
            &IntegratorOptions::default(),
            1000,
        )
        .unwrap();
        assert!(run.states.len() > 2);
        for s in &run.states {
            assert!(frobenius(&(s.matrix() - rho0.matrix())) < 1e-15);
        }
    }

    #[test]
    fn amplitude_damping_closed_form() {
        let gamma = 2.0 * PI * 3e-3;
        let rates = DecoherenceRates::new(gamma, 0.0).unwrap();
        let rho0 = DensityMatrix::pure(&[ZERO, ONE]).unwrap();
        let d = Dissipator::single(2, &rates, CollapseOperators::Qubit).unwrap();
        let t = 40.0;
        let run = evolve_lindblad(&Idle(2, t), &rho0, &d, &IntegratorOptions::with_dt(0.01), 0).unwrap();
        let p1 = run.final_state().populations()[1];
        // (Γ/2)·L(σ₋) with L(σ) = 2σρσ† − … gives ρ₁₁' = −Γ ρ₁₁
        assert_abs_diff_eq!(p1, (-gamma * t).exp(), epsilon = 1e-12);
        assert!(run.max_trace_error < 1e-12);
    }

    #[test]
    fn dephasing_closed_form() {
        let kappa = 0.01;
        let rates = DecoherenceRates::new(0.0, kappa).unwrap();
        let h = 0.5f64.sqrt();
        let rho0 = DensityMatrix::pure(&[c(h, 0.0), c(h, 0.0)]).unwrap();
        let d = Dissipator::single(3, &rates, CollapseOperators::Qubit).unwrap();
        let mut m = CMatrix::zeros(3, 3);
        m.view_mut((0, 0), (2, 2)).copy_from(rho0.matrix());
        let rho3 = DensityMatrix::new(m).unwrap();
        let run = evolve_lindblad(&Idle(3, 10.0), &rho3, &d, &IntegratorOptions::with_dt(0.01), 0).unwrap();
        // (κ/2)L(σ_z) damps the coherence at rate 2κ
        assert_abs_diff_eq!(
            run.final_state().matrix()[(0, 1)].re,
            0.5 * (-2.0 * kappa * 10.0).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn rates_validation() {
        assert!(DecoherenceRates::new(-1.0, 0.0).is_err());
        let r = DecoherenceRates::reference();
        assert_abs_diff_eq!(r.gamma_decay, 2.0 * PI * 3e-6, epsilon = 1e-18);
    }

    #[test]
    fn error_injection_terms() {
        let pulse = synthesize_catalog(CatalogGate::PiOver8, &[], &AmplitudeBudget::reference()).unwrap();
        let omega0 = AmplitudeBudget::reference().omega0;
        let t = 7.3;
        let base = pulse.sample(t);
        let same = error_inject(&pulse, ErrorFractions::default(), omega0).sample(t);
        assert_eq!(base, same);

        let e = error_inject(&pulse, ErrorFractions::new(0.1, 0.0), omega0);
        let h0 = TwoLevel::new(&pulse).matrix(t);
        let h1 = TwoLevel::new(&e).matrix(t);
        let diff = &h1 - &h0;
        assert!((diff[(1, 0)] - base.rabi * 0.05).norm() < 1e-15);

        let e = error_inject(&pulse, ErrorFractions::new(0.0, -0.1), omega0);
        let diff = TwoLevel::new(&e).matrix(t) - h0;
        assert_abs_diff_eq!(diff[(1, 1)].re, -0.05 * omega0, epsilon = 1e-15);
        assert_abs_diff_eq!(diff[(0, 0)].re, 0.05 * omega0, epsilon = 1e-15);
    }

    #[test]
    fn three_level_structure() {
        let off = SegmentedDrive::new(vec![DriveSegment {
            duration: 1.0,
            rabi: ZERO,
            detuning: 0.0,
        }])
        .unwrap();
        let anh = 1.3;
        let h = ThreeLevel {
            drive: &off,
            anharmonicity: anh,
        }
        .matrix(0.5);
        let mut expected = CMatrix::zeros(3, 3);
        expected[(2, 2)] = c(-anh, 0.0);
        assert!(frobenius(&(h - expected)) < 1e-15);

        let pulse = synthesize_catalog(CatalogGate::Hadamard, &[], &AmplitudeBudget::reference()).unwrap();
        let h3 = ThreeLevel {
            drive: &pulse,
            anharmonicity: f64::INFINITY.min(1e300),
        }
        .matrix(4.0);
        let h2 = TwoLevel::new(&pulse).matrix(4.0);
        assert!(frobenius(&(h3.view((0, 0), (2, 2)).into_owned() - h2)) < 1e-15);
        assert!(crate::linalg::hermiticity_error(&h3) < 1e-15);
    }

    #[test]
    fn segmented_drive_breakpoints() {
        let d = SegmentedDrive::new(vec![
            DriveSegment {
                duration: 1.0,
                rabi: ONE,
                detuning: 0.0,
            },
            DriveSegment {
                duration: 2.0,
                rabi: I,
                detuning: 1.0,
            },
        ])
        .unwrap();
        assert_eq!(d.breakpoints(), vec![1.0]);
        assert_eq!(d.duration(), 3.0);
        assert_eq!(d.sample(0.5).rabi, ONE);
        assert_eq!(d.sample(1.5).rabi, I);
        let grid = time_grid(3.0, &d.breakpoints(), 0.3);
        assert_eq!(grid.len(), 2);
        assert!(grid.iter().all(|g| g.step() <= 0.3 + 1e-15));
    }

    #[test]
    fn unitary_propagation_of_constant_hamiltonian() {
        let d = SegmentedDrive::new(vec![DriveSegment {
            duration: 3.0,
            rabi: c(0.4, 0.1),
            detuning: -0.2,
        }])
        .unwrap();
        let h = TwoLevel::new(&d);
        let u = propagate_unitary(&h, &IntegratorOptions::default()).unwrap();
        let exact = crate::linalg::propagator(&h.matrix(1.0), 3.0);
        assert!(frobenius(&(&u - exact)) < 1e-12);
        assert!(unitarity_error(&u) < 1e-12);
    }

    #[test]
    fn integral_table_is_accurate() {
        let tab = IntegralTable::build(|t| (0.3 * t).cos(), 20.0, 0.01);
        for t in [0.0, 0.123, 7.77, 20.0] {
            assert_abs_diff_eq!(tab.at(t), (0.3 * t).sin() / 0.3, epsilon = 1e-11);
        }
    }

    #[test]
    fn dissipator_preserves_trace() {
        let rates = DecoherenceRates::new(0.3, 0.2).unwrap();
        for d in [
            Dissipator::single(3, &rates, CollapseOperators::Qubit).unwrap(),
            Dissipator::single(3, &rates, CollapseOperators::Ladder).unwrap(),
            Dissipator::pair(&rates, CollapseOperators::Qubit).unwrap(),
        ] {
            let n = d.dim();
            let mut rho = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    rho[(i, j)] = c((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05);
                }
            }
            assert!(d.apply(&rho).trace().norm() < 1e-14);
        }
    }

    #[test]
    fn sideband_matches_bessel() {
        for eta in [0.0, 0.3, 1.0, 1.7] {
            assert_abs_diff_eq!(jacobi_anger_sideband(eta, 64), j1(eta), epsilon = 1e-13);
        }
    }

    #[test]
    fn eta_waveform_examples() {
        let g = mhz_to_rad_per_ns(10.0);
        assert_eq!(eta_waveform(&[0.0], g).unwrap(), vec![0.0]);
        let ratio = j1(1.0);
        let eta = eta_waveform(&[ratio * 2.0 * SQRT_2 * g], g).unwrap()[0];
        assert_abs_diff_eq!(eta, 1.0, epsilon = 1e-10);
        let eta = eta_waveform(&[CoupledTransmons::reference_g_prime_max()], g).unwrap()[0];
        assert!(eta > 1.0 && eta < 1.8412);
        assert!(eta_waveform(&[0.6 * 2.0 * SQRT_2 * g], g).is_err());
    }

    #[test]
    fn channel_map_matches_direct_evolution() {
        let pulse = synthesize_catalog(CatalogGate::PiOver8, &[], &AmplitudeBudget::reference()).unwrap();
        let h = ThreeLevel::new(&pulse, TransmonParams::reference());
        let d = Dissipator::single(3, &DecoherenceRates::new(0.01, 0.02).unwrap(), CollapseOperators::Qubit).unwrap();
        let opts = IntegratorOptions::with_dt(0.01);
        let map = propagate_map(&h, &d, &[0, 1], &opts).unwrap();
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let rho0 = DensityMatrix::pure(&[psi[0], psi[1], ZERO]).unwrap();
        let direct = evolve_lindblad(&h, &rho0, &d, &opts, 0).unwrap();
        let via_map = map.apply_pure(&psi);
        // hermitisation in the direct run only rounds
        assert!(frobenius(&(direct.final_state().matrix() - &via_map)) < 1e-12);
        assert!(map.trace_error() < 1e-12);
        let nu = [c(0.0, 1.0), ZERO, ZERO];
        let e = map.expectation(&psi, &nu);
        assert_abs_diff_eq!(e, via_map[(0, 0)].re, epsilon = 1e-14);
    }
}
