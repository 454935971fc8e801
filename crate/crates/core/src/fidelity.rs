//! State and gate fidelities, robustness scans and fidelity traces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch_path::PathSpec;
use crate::dynamics::{
    error_inject, evolve_lindblad, evolve_states, propagate_map, with_convergence_guard, ChannelMap, CollapseOperators,
    DecoherenceRates, DensityMatrix, Dissipator, DriveSegment, ErrorFractions, Hamiltonian, IntegratorOptions,
    SegmentedDrive, ThreeLevel, TransmonParams, TwoLevel, TwoQubitDrive, TwoQubitEffective, TwoQubitFull, TWO_QUBIT_02,
    TWO_QUBIT_11, TWO_QUBIT_COMPUTATIONAL,
};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ZERO};
use crate::pulse::{target_unitary, target_unitary_2q, AmplitudeBudget, QubitDrive};

/// Default number of `ϑ` samples for the single-qubit average.
pub const DEFAULT_THETA_POINTS: usize = 1001;
/// Default `ϑ` samples per qubit for the two-qubit average.
pub const DEFAULT_THETA_GRID_2Q: usize = 51;
/// Default number of points along a robustness axis.
pub const DEFAULT_SCAN_POINTS: usize = 41;

/// `⟨ν|ρ|ν⟩`, with `ν` zero-padded to the dimension of `ρ`.
pub fn state_fidelity(rho: &DensityMatrix, target: &[Complex64]) -> Result<f64> {
    let dim = rho.dim();
    if target.len() > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: target.len(),
        });
    }
    let m = rho.matrix();
    let mut acc = ZERO;
    for (i, a) in target.iter().enumerate() {
        for (j, b) in target.iter().enumerate() {
            acc += a.conj() * m[(i, j)] * b;
        }
    }
    Ok(acc.re)
}

/// Trapezoid weights for `n` uniform samples of `[0, 2π]`, normalised so
/// that they sum to one.
pub fn theta_weights(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two ϑ samples".into()));
    }
    let mut w = vec![1.0 / (n - 1) as f64; n];
    w[0] /= 2.0;
    w[n - 1] /= 2.0;
    Ok(w)
}

pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / (n - 1) as f64).collect()
}

/// Which single-qubit model to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleQubitModel {
    TwoLevel,
    ThreeLevel(TransmonParams),
}

impl SingleQubitModel {
    pub fn dim(&self) -> usize {
        match self {
            SingleQubitModel::TwoLevel => 2,
            SingleQubitModel::ThreeLevel(_) => 3,
        }
    }
}

/// Numerical settings shared by the fidelity routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelitySettings {
    pub theta_points: usize,
    pub theta_grid_2q: usize,
    pub integrator: IntegratorOptions,
    pub collapse: CollapseOperators,
}

impl Default for FidelitySettings {
    fn default() -> Self {
        Self {
            theta_points: DEFAULT_THETA_POINTS,
            theta_grid_2q: DEFAULT_THETA_GRID_2Q,
            integrator: IntegratorOptions::default(),
            collapse: CollapseOperators::Qubit,
        }
    }
}

/// `(1/2π)∫⟨ν_τ|Λ(|ν₀⟩⟨ν₀|)|ν_τ⟩dϑ` with `|ν₀⟩ = cosϑ|0⟩ + sinϑ|1⟩` and
/// `|ν_τ⟩ = T|ν₀⟩`.
pub fn average_from_map_1q(map: &ChannelMap, target: &CMatrix, theta_points: usize) -> Result<f64> {
    if map.subspace.len() != 2 || target.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: map.subspace.len(),
        });
    }
    let w = theta_weights(theta_points)?;
    let mut total = 0.0;
    let mut nu = vec![ZERO; map.dim];
    for (theta, wk) in theta_grid(theta_points).into_iter().zip(w) {
        let (s, co) = theta.sin_cos();
        let psi = [c(co, 0.0), c(s, 0.0)];
        nu.iter_mut().for_each(|z| *z = ZERO);
        for (r, &i) in map.subspace.iter().enumerate() {
            nu[i] = target[(r, 0)] * psi[0] + target[(r, 1)] * psi[1];
        }
        total += wk * map.expectation(&psi, &nu);
    }
    Ok(total)
}

/// Product-state average over a `ϑ₁ × ϑ₂` grid for a map on
/// `{|00⟩, |01⟩, |10⟩, |11⟩}`.
pub fn average_from_map_2q(map: &ChannelMap, target: &CMatrix, grid: usize) -> Result<f64> {
    if map.subspace.len() != 4 || target.shape() != (4, 4) {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: map.subspace.len(),
        });
    }
    let w = theta_weights(grid)?;
    let thetas = theta_grid(grid);
    let mut total = 0.0;
    let mut nu = vec![ZERO; map.dim];
    for (t1, w1) in thetas.iter().zip(&w) {
        let (s1, c1) = t1.sin_cos();
        for (t2, w2) in thetas.iter().zip(&w) {
            let (s2, c2) = t2.sin_cos();
            let psi = [c(c1 * c2, 0.0), c(c1 * s2, 0.0), c(s1 * c2, 0.0), c(s1 * s2, 0.0)];
            nu.iter_mut().for_each(|z| *z = ZERO);
            for (r, &i) in map.subspace.iter().enumerate() {
                nu[i] = (0..4).map(|k| target[(r, k)] * psi[k]).sum();
            }
            total += w1 * w2 * map.expectation(&psi, &nu);
        }
    }
    Ok(total)
}

fn single_qubit_map(
    drive: &dyn QubitDrive,
    model: SingleQubitModel,
    rates: &DecoherenceRates,
    collapse: CollapseOperators,
    opts: &IntegratorOptions,
) -> Result<ChannelMap> {
    let d = Dissipator::single(model.dim(), rates, collapse)?;
    match model {
        SingleQubitModel::TwoLevel => propagate_map(&TwoLevel::new(drive), &d, &[0, 1], opts),
        SingleQubitModel::ThreeLevel(p) => propagate_map(&ThreeLevel::new(drive, p), &d, &[0, 1], opts),
    }
}

/// Average gate fidelity of a single-qubit drive against `target`, with
/// error fractions applied relative to the budget `omega0`.
pub fn average_gate_fidelity_1q(
    drive: &dyn QubitDrive,
    target: &CMatrix,
    model: SingleQubitModel,
    rates: &DecoherenceRates,
    errors: ErrorFractions,
    omega0: f64,
    settings: &FidelitySettings,
) -> Result<f64> {
    let perturbed = error_inject(drive, errors, omega0);
    with_convergence_guard(
        &settings.integrator,
        |opts| {
            let map = single_qubit_map(&perturbed, model, rates, settings.collapse, opts)?;
            average_from_map_1q(&map, target, settings.theta_points)
        },
        |f| *f,
    )
}

/// Two-qubit average for any 9-level Hamiltonian; `frame` is applied to the
/// final state before comparison.
pub fn average_gate_fidelity_2q(
    h: &dyn Hamiltonian,
    frame: Option<&CMatrix>,
    target: &CMatrix,
    rates: &DecoherenceRates,
    settings: &FidelitySettings,
) -> Result<f64> {
    if h.dim() != 9 {
        return Err(Error::DimensionMismatch {
            expected: 9,
            got: h.dim(),
        });
    }
    let d = Dissipator::pair(rates, settings.collapse)?;
    with_convergence_guard(
        &settings.integrator,
        |opts| {
            let mut map = propagate_map(h, &d, &TWO_QUBIT_COMPUTATIONAL, opts)?;
            if let Some(v) = frame {
                map = map.transform(v);
            }
            average_from_map_2q(&map, target, settings.theta_grid_2q)
        },
        |f| *f,
    )
}

/// Which two-qubit Hamiltonian to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoQubitModel {
    Full,
    Effective,
}

/// Fidelity of the modulated control-phase gate against
/// `diag(1, 1, 1, e^{−iγ′})`.
pub fn two_qubit_gate_fidelity(
    drive: &TwoQubitDrive,
    model: TwoQubitModel,
    rates: &DecoherenceRates,
    settings: &FidelitySettings,
) -> Result<f64> {
    let target = target_unitary_2q(drive.pulse.spec.gamma_g);
    match model {
        TwoQubitModel::Full => {
            let frame = drive.frame_correction();
            average_gate_fidelity_2q(&TwoQubitFull { drive }, Some(&frame), &target, rates, settings)
        }
        TwoQubitModel::Effective => average_gate_fidelity_2q(
            &TwoQubitEffective { drive: &drive.pulse },
            None,
            &target,
            rates,
            settings,
        ),
    }
}

/// A curve of fidelity against error fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    EpsilonX,
    DeltaZ,
    #[serde(rename = "grid_2d")]
    Grid2D,
}

/// One gate implementation in a scan.
pub struct ScanVariant<'a> {
    pub name: String,
    pub drive: &'a dyn QubitDrive,
    pub target: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub axis: ScanAxis,
    pub points: Vec<ErrorFractions>,
    pub names: Vec<String>,
    /// `fidelities[v][p]` for variant `v` at point `p`.
    pub fidelities: Vec<Vec<f64>>,
}

impl ScanResult {
    pub fn curve(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.fidelities[i].as_slice())
    }

    /// Index of the point matching `errors` exactly.
    pub fn index_of(&self, errors: ErrorFractions) -> Option<usize> {
        self.points
            .iter()
            .position(|p| (p.epsilon - errors.epsilon).abs() < 1e-12 && (p.delta - errors.delta).abs() < 1e-12)
    }
}

/// `n` uniform values in `[−range, range]`; the 2-D grid is their product
/// with `ε` varying slowest.
pub fn scan_points(axis: ScanAxis, n: usize, range: f64) -> Result<Vec<ErrorFractions>> {
    if n < 2 {
        return Err(Error::InvalidParameter("a scan needs at least two points".into()));
    }
    let values: Vec<f64> = (0..n)
        .map(|k| {
            let v = -range + 2.0 * range * k as f64 / (n - 1) as f64;
            if v.abs() < 1e-15 {
                0.0
            } else {
                v
            }
        })
        .collect();
    Ok(match axis {
        ScanAxis::EpsilonX => values.iter().map(|&e| ErrorFractions::new(e, 0.0)).collect(),
        ScanAxis::DeltaZ => values.iter().map(|&d| ErrorFractions::new(0.0, d)).collect(),
        ScanAxis::Grid2D => values
            .iter()
            .flat_map(|&e| values.iter().map(move |&d| ErrorFractions::new(e, d)))
            .collect(),
    })
}

/// Evaluates each variant at each point in the two-level model. Work is
/// spread over the rayon pool when the `parallel` feature is on; results
/// are always in point order.
pub fn robustness_scan_at(
    variants: &[ScanVariant<'_>],
    axis: ScanAxis,
    points: Vec<ErrorFractions>,
    rates: &DecoherenceRates,
    omega0: f64,
    settings: &FidelitySettings,
) -> Result<ScanResult> {
    let jobs: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..points.len()).map(move |p| (v, p)))
        .collect();
    let eval = |&(v, p): &(usize, usize)| {
        let var = &variants[v];
        average_gate_fidelity_1q(
            var.drive,
            &var.target,
            SingleQubitModel::TwoLevel,
            rates,
            points[p],
            omega0,
            settings,
        )
    };
    #[cfg(feature = "parallel")]
    let flat: Vec<Result<f64>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let flat: Vec<Result<f64>> = jobs.iter().map(eval).collect();
    let flat = flat.into_iter().collect::<Result<Vec<f64>>>()?;
    let fidelities = flat.chunks(points.len().max(1)).map(|c| c.to_vec()).collect();
    Ok(ScanResult {
        axis,
        points,
        names: variants.iter().map(|v| v.name.clone()).collect(),
        fidelities,
    })
}

pub fn robustness_scan(
    variants: &[ScanVariant<'_>],
    axis: ScanAxis,
    n_points: usize,
    range: f64,
    rates: &DecoherenceRates,
    omega0: f64,
    settings: &FidelitySettings,
) -> Result<ScanResult> {
    let points = scan_points(axis, n_points, range)?;
    robustness_scan_at(variants, axis, points, rates, omega0, settings)
}

/// Fidelity against an instantaneous reference, and level populations.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
}

/// Evolves `|ψ₀⟩` (qubit amplitudes) in `h` with `dissipator` and compares
/// at every recorded step with the closed evolution of the same state under
/// the two-level `ideal`.
pub fn fidelity_dynamics(
    h: &dyn Hamiltonian,
    dissipator: &Dissipator,
    ideal: &dyn Hamiltonian,
    psi0: [Complex64; 2],
    opts: &IntegratorOptions,
    record_stride: usize,
) -> Result<FidelityTrace> {
    if ideal.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: ideal.dim(),
        });
    }
    if (h.duration() - ideal.duration()).abs() > 1e-12 * h.duration() || h.breakpoints() != ideal.breakpoints() {
        return Err(Error::InvalidParameter(
            "model and reference must share a time grid".into(),
        ));
    }
    let mut full = vec![ZERO; h.dim()];
    full[0] = psi0[0];
    full[1] = psi0[1];
    let rho0 = DensityMatrix::pure(&full)?;
    let run = evolve_lindblad(h, &rho0, dissipator, opts, record_stride)?;
    let start = CMatrix::from_column_slice(2, 1, &psi0);
    let (times, refs) = evolve_states(ideal, &start, opts, record_stride)?;
    if times.len() != run.times.len() {
        return Err(Error::InvalidParameter("model and reference grids differ".into()));
    }
    let mut fidelity = Vec::with_capacity(times.len());
    let mut populations = Vec::with_capacity(times.len());
    for (rho, r) in run.states.iter().zip(&refs) {
        fidelity.push(state_fidelity(rho, &[r[(0, 0)], r[(1, 0)]])?);
        populations.push(rho.populations());
    }
    Ok(FidelityTrace {
        times,
        fidelity,
        populations,
    })
}

/// Two-qubit counterpart of [`fidelity_dynamics`]: evolves the 9-level state
/// `psi0` in the chosen model and compares with the closed effective model.
/// Full-model states are mapped into the effective frame at every step.
pub fn two_qubit_dynamics(
    drive: &TwoQubitDrive,
    model: TwoQubitModel,
    rates: &DecoherenceRates,
    collapse: CollapseOperators,
    psi0: &[Complex64],
    opts: &IntegratorOptions,
    record_stride: usize,
) -> Result<FidelityTrace> {
    if psi0.len() != 9 {
        return Err(Error::DimensionMismatch {
            expected: 9,
            got: psi0.len(),
        });
    }
    let d = Dissipator::pair(rates, collapse)?;
    let rho0 = DensityMatrix::pure(psi0)?;
    let effective = TwoQubitEffective { drive: &drive.pulse };
    let run = match model {
        TwoQubitModel::Full => evolve_lindblad(&TwoQubitFull { drive }, &rho0, &d, opts, record_stride)?,
        TwoQubitModel::Effective => evolve_lindblad(&effective, &rho0, &d, opts, record_stride)?,
    };
    let start = CMatrix::from_column_slice(9, 1, psi0);
    let (times, refs) = evolve_states(&effective, &start, opts, record_stride)?;
    if times.len() != run.times.len() {
        return Err(Error::InvalidParameter("model and reference grids differ".into()));
    }
    let mut fidelity = Vec::with_capacity(times.len());
    let mut populations = Vec::with_capacity(times.len());
    for ((t, rho), r) in times.iter().zip(&run.states).zip(&refs) {
        let mut nu: Vec<Complex64> = r.column(0).iter().copied().collect();
        if model == TwoQubitModel::Full {
            // undo the ∫Δ′ frame on the reference instead of rotating ρ
            let half = drive.detuning_integral(*t) / 2.0;
            nu[TWO_QUBIT_11] *= Complex64::from_polar(1.0, -half);
            nu[TWO_QUBIT_02] *= Complex64::from_polar(1.0, half);
        }
        fidelity.push(state_fidelity(rho, &nu)?);
        populations.push(rho.populations());
    }
    Ok(FidelityTrace {
        times,
        fidelity,
        populations,
    })
}

/// A constant-amplitude rotation realising the same gate as a loop.
///
/// For a tilted axis `n(α₀, β₀)` this is one segment with transverse
/// amplitude `Ω₀`, phase `β₀`, longitudinal amplitude `Ω₀ cot α₀` and
/// duration `2γ sin α₀ / Ω₀`. For the polar axis it is the resonant sequence
/// `R_x(π/2) R_y(2γ) R_x(−π/2)` at amplitude `Ω₀`.
pub fn dynamical_comparator(spec: &PathSpec, budget: &AmplitudeBudget) -> Result<(SegmentedDrive, CMatrix)> {
    spec.validate()?;
    let om = budget.omega0;
    let gamma = spec.gamma_g;
    let sa = spec.alpha0.sin();
    let segments = if sa.abs() < 1e-12 {
        let sign = spec.alpha0.cos().signum();
        let rot = |phase: f64, angle: f64| DriveSegment {
            duration: angle / om,
            rabi: Complex64::from_polar(om, phase),
            detuning: 0.0,
        };
        vec![rot(PI, PI / 2.0), rot(PI / 2.0, 2.0 * gamma * sign), rot(0.0, PI / 2.0)]
            .into_iter()
            .map(|mut s| {
                if s.duration < 0.0 {
                    s.duration = -s.duration;
                    s.rabi = -s.rabi;
                }
                s
            })
            .collect()
    } else {
        let a_z = om * spec.alpha0.cos() / sa;
        vec![DriveSegment {
            duration: 2.0 * gamma * sa.abs() / om,
            rabi: Complex64::from_polar(om * sa.signum(), spec.beta0),
            detuning: -a_z * sa.signum(),
        }]
    };
    Ok((SegmentedDrive::new(segments)?, target_unitary(spec)))
}
