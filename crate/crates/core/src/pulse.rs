//! Inverse-engineered drives for the geometric loops.
//!
//! Given a sampled loop `(α(s), β(s))` the qubit Hamiltonian that follows it
//! under parallel transport is
//!
//! ```text
//! H(t) = Δ(t)/2 (|1⟩⟨1| − |0⟩⟨0|) + [Ω(t)/2 |1⟩⟨0| + h.c.]
//! Δ(t) = −β̇ sin²α
//! Ω(t) = e^{iβ}(iα̇ − β̇ sinα cosα) = Ω^s(t) e^{i(β − ζ + π)}
//! ```
//!
//! The loop is traversed in normalised time, so the physical duration is a
//! free scale; [`normalize_duration`] fixes it by making the peak of
//! `Ω^s` equal to the amplitude budget.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch_path::{
    point_at, sample_trajectory, BetaSchedule, PathPoint, PathSpec, PathTrajectory, DEFAULT_GRID_POINTS,
};
use crate::dynamics::EvolutionFrame;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ONE};
use crate::units::mhz_to_rad_per_ns;

/// Peak Rabi amplitude available to the drive, rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeBudget {
    pub omega0: f64,
}

impl AmplitudeBudget {
    pub fn new(omega0: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::Domain {
                op: "AmplitudeBudget",
                value: omega0,
                domain: "(0, ∞)",
            });
        }
        Ok(Self { omega0 })
    }

    pub fn from_mhz(mhz: f64) -> Result<Self> {
        Self::new(mhz_to_rad_per_ns(mhz))
    }

    /// 2π × 30 MHz.
    pub fn reference() -> Self {
        Self {
            omega0: mhz_to_rad_per_ns(30.0),
        }
    }
}

/// Gates with a pre-built loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogGate {
    Phase,
    #[serde(rename = "pi8")]
    PiOver8,
    Hadamard,
}

impl CatalogGate {
    pub const ALL: [CatalogGate; 3] = [CatalogGate::Phase, CatalogGate::PiOver8, CatalogGate::Hadamard];

    pub fn spec(self) -> PathSpec {
        match self {
            CatalogGate::Phase => PathSpec::pole_start(FRAC_PI_4).expect("π/4 is a valid phase"),
            CatalogGate::PiOver8 => PathSpec::pole_start(FRAC_PI_8).expect("π/8 is a valid phase"),
            CatalogGate::Hadamard => PathSpec::hadamard(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CatalogGate::Phase => "phase",
            CatalogGate::PiOver8 => "pi8",
            CatalogGate::Hadamard => "hadamard",
        }
    }
}

impl FromStr for CatalogGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phase" | "s" => Ok(CatalogGate::Phase),
            "pi8" | "pi/8" | "t" => Ok(CatalogGate::PiOver8),
            "hadamard" | "h" => Ok(CatalogGate::Hadamard),
            other => Err(Error::InvalidParameter(format!("unknown gate '{other}'"))),
        }
    }
}

/// `Δ = −(dβ/ds / τ) sin²α`.
pub fn detuning_of(point: &PathPoint, tau: f64) -> f64 {
    -(point.dbeta_ds / tau) * point.alpha.sin().powi(2)
}

/// Envelope in normalised time, `√((dα/ds)² + (dβ/ds · sinα cosα)²)`.
pub fn normalized_envelope(point: &PathPoint) -> f64 {
    let (sa, ca) = point.alpha.sin_cos();
    point.dalpha_ds.hypot(point.dbeta_ds * sa * ca)
}

fn zeta_arguments(point: &PathPoint) -> (f64, f64) {
    let (sa, ca) = point.alpha.sin_cos();
    (point.dalpha_ds, point.dbeta_ds * sa * ca)
}

/// Removes 2π jumps from a phase sequence in place.
pub fn unwrap_phase(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        phases[i] = phases[i - 1] + d;
    }
}

fn wrap_to_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Envelope `Ω^s(t)` and continuous phase `ζ(t)` on the trajectory grid.
///
/// `ζ` is the two-argument arctangent of `(α̇, β̇ sinα cosα)`, unwrapped.
/// Where both arguments vanish (the pole-start endpoints) it takes the value
/// of the nearest regular neighbour.
pub fn rabi_envelope(traj: &PathTrajectory, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let envelope: Vec<f64> = traj.samples.iter().map(|p| normalized_envelope(p) / tau).collect();
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    let degenerate = |i: usize| envelope[i] <= 1e-14 * peak.max(f64::MIN_POSITIVE);
    let mut zeta: Vec<Option<f64>> = traj
        .samples
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if degenerate(i) {
                None
            } else {
                let (y, x) = zeta_arguments(p);
                Some(y.atan2(x))
            }
        })
        .collect();
    // forward fill, then back fill the leading gap
    let mut last = None;
    for z in zeta.iter_mut() {
        match z {
            Some(v) => last = Some(*v),
            None => *z = last,
        }
    }
    let first = zeta.iter().flatten().next().copied().unwrap_or(0.0);
    let mut zeta: Vec<f64> = zeta.into_iter().map(|z| z.unwrap_or(first)).collect();
    unwrap_phase(&mut zeta);
    (envelope, zeta)
}

/// Duration that makes the envelope peak at the budget:
/// `τ = max_s Ξ(s) / Ω₀`.
pub fn normalize_duration(traj: &PathTrajectory, budget: &AmplitudeBudget) -> f64 {
    let peak = traj.samples.iter().map(normalized_envelope).fold(0.0, f64::max);
    peak / budget.omega0
}

/// Instantaneous drive seen by the qubit transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveValue {
    /// Coefficient of `|1⟩⟨0|` (and of `√2|2⟩⟨1|` for a transmon) in `2H`.
    pub rabi: Complex64,
    /// `Δ` in `(Δ/2)(|1⟩⟨1| − |0⟩⟨0|)`.
    pub detuning: f64,
}

/// A time-dependent single-qubit control.
pub trait QubitDrive: Sync {
    fn duration(&self) -> f64;

    fn sample(&self, t: f64) -> DriveValue;

    /// Interior times where the drive is discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// DRAG-corrected envelope samples.
///
/// `envelope[i]` is `Ω^s_d`, the complex coefficient that replaces `Ω^s` on
/// the lowering operators `√k |k−1⟩⟨k| e^{−iφ}` of the transmon Hamiltonian.
/// The raising-operator drive is therefore `conj(Ω^s_d) e^{iφ}`; the real
/// part is the in-phase component and the imaginary part enters with the
/// opposite sign in quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct DragCorrection {
    pub anharmonicity: f64,
    pub envelope: Vec<Complex64>,
}

/// A synthesised drive: the loop it follows plus samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivePulse {
    pub spec: PathSpec,
    pub schedule: BetaSchedule,
    pub tau: f64,
    pub times: Vec<f64>,
    pub detuning: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Drive phase `φ = β − ζ + π`, unwrapped.
    pub phase: Vec<f64>,
    pub zeta: Vec<f64>,
    pub beta_dot: Vec<f64>,
    pub drag: Option<DragCorrection>,
}

/// Builds the drive for a loop, with the duration set by the budget.
pub fn synthesize(
    spec: &PathSpec,
    schedule: &BetaSchedule,
    budget: &AmplitudeBudget,
    grid_points: usize,
) -> Result<DrivePulse> {
    let traj = sample_trajectory(spec, schedule, grid_points)?;
    let tau = normalize_duration(&traj, budget);
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("degenerate loop: envelope vanishes".into()));
    }
    Ok(pulse_from_trajectory(&traj, tau))
}

/// The catalog gate's unmodified drive at the given budget.
pub fn synthesize_catalog(gate: CatalogGate, coeffs: &[f64], budget: &AmplitudeBudget) -> Result<DrivePulse> {
    let spec = gate.spec();
    let schedule = BetaSchedule::new(spec.schedule_base(), coeffs.to_vec())?;
    synthesize(&spec, &schedule, budget, DEFAULT_GRID_POINTS)
}

pub fn pulse_from_trajectory(traj: &PathTrajectory, tau: f64) -> DrivePulse {
    let (envelope, zeta) = rabi_envelope(traj, tau);
    let times = traj.samples.iter().map(|p| p.s * tau).collect();
    let detuning = traj.samples.iter().map(|p| detuning_of(p, tau)).collect();
    let phase = traj.samples.iter().zip(&zeta).map(|(p, z)| p.beta - z + PI).collect();
    let beta_dot = traj.samples.iter().map(|p| p.dbeta_ds / tau).collect();
    DrivePulse {
        spec: traj.spec,
        schedule: traj.schedule.clone(),
        tau,
        times,
        detuning,
        envelope,
        phase,
        zeta,
        beta_dot,
        drag: None,
    }
}

/// Derivative of uniformly spaced samples: centred differences inside,
/// second-order one-sided stencils at the ends.
pub fn grid_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => vec![(values[1] - values[0]) / h; 2],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h)
                } else {
                    (values[i + 1] - values[i - 1]) / (2.0 * h)
                }
            })
            .collect(),
    }
}

fn drag_formula(envelope: f64, envelope_dot: f64, phase_rate: f64, detuning: f64, anharmonicity: f64) -> Complex64 {
    c(envelope, 0.0) - c((phase_rate + detuning) * envelope, envelope_dot) / (2.0 * anharmonicity)
}

/// Applies the DRAG correction
/// `Ω^s_d = Ω^s − {iΩ̇^s + [β̇ − ζ̇ + Δ]Ω^s}/(2α)`.
///
/// An infinite anharmonicity leaves the pulse unchanged.
pub fn drag_correct(pulse: &DrivePulse, anharmonicity: f64) -> Result<DrivePulse> {
    if anharmonicity == 0.0 || anharmonicity.is_nan() {
        return Err(Error::Domain {
            op: "drag_correct",
            value: anharmonicity,
            domain: "nonzero",
        });
    }
    let h = if pulse.times.len() > 1 {
        pulse.times[1] - pulse.times[0]
    } else {
        pulse.tau
    };
    let envelope_dot = grid_derivative(&pulse.envelope, h);
    let zeta_dot = grid_derivative(&pulse.zeta, h);
    let corrected = (0..pulse.envelope.len())
        .map(|i| {
            drag_formula(
                pulse.envelope[i],
                envelope_dot[i],
                pulse.beta_dot[i] - zeta_dot[i],
                pulse.detuning[i],
                anharmonicity,
            )
        })
        .collect();
    let mut out = pulse.clone();
    out.drag = Some(DragCorrection {
        anharmonicity,
        envelope: corrected,
    });
    Ok(out)
}

/// Continuous-time quantities of the loop at physical time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseState {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
    pub envelope: f64,
    /// In `(−π, π]`; meaningless where `envelope` vanishes.
    pub zeta: f64,
    pub detuning: f64,
}

impl DrivePulse {
    /// Evaluates the loop analytically at time `t ∈ [0, τ]`.
    pub fn state_at(&self, t: f64) -> PulseState {
        let s = (t / self.tau).clamp(0.0, 1.0);
        let p = point_at(&self.spec, &self.schedule, s, None).expect("pulse was synthesised from a valid loop");
        let (y, x) = zeta_arguments(&p);
        PulseState {
            alpha: p.alpha,
            beta: p.beta,
            alpha_dot: p.dalpha_ds / self.tau,
            beta_dot: p.dbeta_ds / self.tau,
            envelope: normalized_envelope(&p) / self.tau,
            zeta: y.atan2(x),
            detuning: detuning_of(&p, self.tau),
        }
    }

    /// `Ω(t) = e^{iβ}(iα̇ − β̇ sinα cosα)` without DRAG.
    pub fn bare_rabi(&self, t: f64) -> Complex64 {
        let st = self.state_at(t);
        let (sa, ca) = st.alpha.sin_cos();
        Complex64::from_polar(1.0, st.beta) * c(-st.beta_dot * sa * ca, st.alpha_dot)
    }

    pub fn peak_envelope(&self) -> f64 {
        self.envelope.iter().cloned().fold(0.0, f64::max)
    }

    /// Removes the DRAG correction, if any.
    pub fn without_drag(&self) -> DrivePulse {
        let mut p = self.clone();
        p.drag = None;
        p
    }

    fn fd_step(&self) -> f64 {
        1e-5 * self.tau
    }

    /// Phase `ζ` at `t`, taking the one-sided limit where the envelope
    /// vanishes.
    fn regular_zeta(&self, t: f64, st: &PulseState) -> f64 {
        let scale = self.peak_envelope().max(f64::MIN_POSITIVE);
        if st.envelope > 1e-12 * scale {
            return st.zeta;
        }
        let h = self.fd_step();
        let probe = if t + h <= self.tau { t + h } else { t - h };
        self.state_at(probe).zeta
    }

    /// DRAG-corrected raising-operator drive at `t`, derivatives by centred
    /// differences of the analytic loop.
    fn drag_rabi(&self, t: f64, anharmonicity: f64) -> (Complex64, f64) {
        let st = self.state_at(t);
        let h = self.fd_step();
        let lo = (t - h).max(0.0);
        let hi = (t + h).min(self.tau);
        let (a, b) = (self.state_at(lo), self.state_at(hi));
        let envelope_dot = (b.envelope - a.envelope) / (hi - lo);
        let zeta = self.regular_zeta(t, &st);
        let zeta_dot = if a.envelope > 0.0 && b.envelope > 0.0 && st.envelope > 0.0 {
            wrap_to_pi(b.zeta - a.zeta) / (hi - lo)
        } else {
            0.0
        };
        let corrected = drag_formula(
            st.envelope,
            envelope_dot,
            st.beta_dot - zeta_dot,
            st.detuning,
            anharmonicity,
        );
        let phase = st.beta - zeta + PI;
        (corrected.conj() * Complex64::from_polar(1.0, phase), st.detuning)
    }
}

impl QubitDrive for DrivePulse {
    fn duration(&self) -> f64 {
        self.tau
    }

    fn sample(&self, t: f64) -> DriveValue {
        match &self.drag {
            None => {
                let st = self.state_at(t);
                let (sa, ca) = st.alpha.sin_cos();
                DriveValue {
                    rabi: Complex64::from_polar(1.0, st.beta) * c(-st.beta_dot * sa * ca, st.alpha_dot),
                    detuning: st.detuning,
                }
            }
            Some(d) => {
                let (rabi, detuning) = self.drag_rabi(t, d.anharmonicity);
                DriveValue { rabi, detuning }
            }
        }
    }
}

/// Ideal gate of a loop: `e^{−iγ}|φ₊⟩⟨φ₊| + e^{iγ}|φ₋⟩⟨φ₋|` at the start
/// point, i.e. `exp(−iγ n·σ)` with `σ_z|0⟩ = |0⟩`.
pub fn target_unitary(spec: &PathSpec) -> CMatrix {
    let frame = EvolutionFrame::new(spec.alpha0, spec.beta0);
    let plus = frame.phi_plus();
    let minus = frame.phi_minus();
    let p = &plus * plus.adjoint();
    let m = &minus * minus.adjoint();
    p * Complex64::from_polar(1.0, -spec.gamma_g) + m * Complex64::from_polar(1.0, spec.gamma_g)
}

/// `diag(1, 1, 1, e^{−iγ'})` on `{|00⟩, |01⟩, |10⟩, |11⟩}`.
pub fn target_unitary_2q(gamma_g_prime: f64) -> CMatrix {
    let mut u = CMatrix::from_diagonal_element(4, 4, ONE);
    u[(3, 3)] = Complex64::from_polar(1.0, -gamma_g_prime);
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch_path::{alpha_max, beta_schedule, ScheduleBase};
    use crate::linalg::{frobenius, identity, pauli_x, pauli_z, phase_aligned_distance, I};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn pi8_pulse() -> DrivePulse {
        synthesize_catalog(CatalogGate::PiOver8, &[], &AmplitudeBudget::reference()).unwrap()
    }

    #[test]
    fn catalog_entries() {
        let s = CatalogGate::Phase.spec();
        assert_eq!((s.gamma_g, s.alpha0, s.beta0), (FRAC_PI_4, 0.0, FRAC_PI_2));
        let s = CatalogGate::PiOver8.spec();
        assert_eq!((s.gamma_g, s.alpha0, s.beta0), (FRAC_PI_8, 0.0, FRAC_PI_2));
        let s = CatalogGate::Hadamard.spec();
        assert_eq!((s.gamma_g, s.alpha0, s.beta0), (FRAC_PI_2, FRAC_PI_4, 0.0));
        assert_eq!("pi8".parse::<CatalogGate>().unwrap(), CatalogGate::PiOver8);
        assert!("cnot".parse::<CatalogGate>().is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(AmplitudeBudget::new(0.0).is_err());
        assert!(AmplitudeBudget::new(-1.0).is_err());
        assert_abs_diff_eq!(
            AmplitudeBudget::from_mhz(30.0).unwrap().omega0,
            0.188_495_559_215_387_6,
            epsilon = 1e-15
        );
    }

    #[test]
    fn detuning_examples() {
        let flat = PathPoint {
            s: 0.3,
            alpha: 0.0,
            beta: 1.0,
            dalpha_ds: 0.2,
            dbeta_ds: 3.0,
        };
        assert_eq!(detuning_of(&flat, 20.0), 0.0);

        let tau = 19.66;
        let spec = CatalogGate::PiOver8.spec();
        let sched = BetaSchedule::unmodified(ScheduleBase::HalfTurn);
        let mid = point_at(&spec, &sched, 0.5, None).unwrap();
        let am = alpha_max(FRAC_PI_8).unwrap();
        let expected = -(PI * PI / 2.0 / tau) * am.sin().powi(2);
        assert_abs_diff_eq!(detuning_of(&mid, tau), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, -0.1802, epsilon = 1e-4);
        // finite-difference β̇ cross-check
        let h = 1e-6;
        let fd = (beta_schedule(0.5 + h, &sched).0 - beta_schedule(0.5 - h, &sched).0) / (2.0 * h) / tau;
        assert_abs_diff_eq!(-fd * mid.alpha.sin().powi(2), expected, epsilon = 1e-8);

        let had = point_at(
            &PathSpec::hadamard(),
            &BetaSchedule::unmodified(ScheduleBase::FullTurn),
            0.0,
            None,
        )
        .unwrap();
        assert_eq!(detuning_of(&had, 23.5), 0.0);
    }

    #[test]
    fn envelope_at_midpoint() {
        let spec = CatalogGate::PiOver8.spec();
        let sched = BetaSchedule::unmodified(ScheduleBase::HalfTurn);
        let traj = sample_trajectory(&spec, &sched, 1001).unwrap();
        let tau = 19.66;
        let (env, zeta) = rabi_envelope(&traj, tau);
        let am = alpha_max(FRAC_PI_8).unwrap();
        assert_abs_diff_eq!(env[500], PI * PI / 2.0 / tau * am.sin() * am.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_to_pi(zeta[500]), 0.0, epsilon = 1e-12);
        assert!(env.iter().all(|&e| e >= 0.0));
        assert!(zeta.iter().all(|z| z.is_finite()));
    }

    #[test]
    fn hadamard_envelope_matches_finite_differences() {
        let spec = PathSpec::hadamard();
        let sched = BetaSchedule::unmodified(ScheduleBase::FullTurn);
        let tau = 23.5;
        let p = point_at(&spec, &sched, 0.5, None).unwrap();
        let h = 1e-5;
        let a = point_at(&spec, &sched, 0.5 - h, None).unwrap();
        let b = point_at(&spec, &sched, 0.5 + h, None).unwrap();
        let alpha_dot = (b.alpha - a.alpha) / (2.0 * h) / tau;
        let beta_dot = (b.beta - a.beta) / (2.0 * h) / tau;
        let (sa, ca) = p.alpha.sin_cos();
        let env_fd = alpha_dot.hypot(beta_dot * sa * ca);
        let zeta_fd = alpha_dot.atan2(beta_dot * sa * ca);
        let env = normalized_envelope(&p) / tau;
        let (y, x) = zeta_arguments(&p);
        assert!(((env - env_fd) / env).abs() < 1e-6);
        assert!((y.atan2(x) - zeta_fd).abs() < 1e-6);
    }

    #[test]
    fn durations_and_peak() {
        let budget = AmplitudeBudget::reference();
        let pi8 = pi8_pulse();
        assert!((pi8.tau - 19.66).abs() < 0.05, "tau = {}", pi8.tau);
        assert!(((pi8.peak_envelope() - budget.omega0) / budget.omega0).abs() < 1e-9);
        assert!(pi8.envelope[0] < 1e-6 * budget.omega0);
        assert!(pi8.envelope[pi8.envelope.len() - 1] < 1e-6 * budget.omega0);

        let had = synthesize_catalog(CatalogGate::Hadamard, &[], &budget).unwrap();
        assert!((had.tau - 23.49).abs() < 0.05, "tau = {}", had.tau);

        let double = AmplitudeBudget::new(2.0 * budget.omega0).unwrap();
        let fast = synthesize_catalog(CatalogGate::PiOver8, &[], &double).unwrap();
        assert_abs_diff_eq!(fast.tau, pi8.tau / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn continuous_evaluation_matches_samples() {
        let pulse = pi8_pulse();
        for i in [0, 700, 2000, 3500, 4000] {
            let st = pulse.state_at(pulse.times[i]);
            assert_abs_diff_eq!(st.envelope, pulse.envelope[i], epsilon = 1e-13);
            assert_abs_diff_eq!(st.detuning, pulse.detuning[i], epsilon = 1e-13);
            let rabi = pulse.sample(pulse.times[i]).rabi;
            let expected = Complex64::from_polar(pulse.envelope[i], pulse.phase[i]);
            assert!((rabi - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_is_continuous() {
        let had = synthesize_catalog(CatalogGate::Hadamard, &[], &AmplitudeBudget::reference()).unwrap();
        let max_jump = had.phase.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(max_jump < 0.1, "{max_jump}");
    }

    #[test]
    fn drag_limits() {
        let pulse = pi8_pulse();
        let same = drag_correct(&pulse, f64::INFINITY).unwrap();
        let d = same.drag.as_ref().unwrap();
        for (z, e) in d.envelope.iter().zip(&pulse.envelope) {
            assert_eq!(z.re, *e);
            assert_eq!(z.im, 0.0);
        }
        assert!(drag_correct(&pulse, 0.0).is_err());

        // constant envelope with no phase motion: no correction
        let z = drag_formula(0.1, 0.0, 0.0, 0.0, 1.3);
        assert_eq!(z, c(0.1, 0.0));
    }

    #[test]
    fn drag_grid_and_continuous_agree() {
        let anh = crate::units::mhz_to_rad_per_ns(220.0);
        let pulse = drag_correct(&pi8_pulse(), anh).unwrap();
        let d = pulse.drag.as_ref().unwrap();
        for i in [10, 1000, 2000, 3000, 3990] {
            let t = pulse.times[i];
            let grid = d.envelope[i].conj() * Complex64::from_polar(1.0, pulse.phase[i]);
            let cont = pulse.sample(t).rabi;
            assert!((grid - cont).norm() < 1e-6, "i={i}: {grid} vs {cont}");
        }
        // endpoint stays finite
        assert!(pulse.sample(0.0).rabi.norm().is_finite());
        assert!(pulse.sample(pulse.tau).rabi.norm().is_finite());
    }

    #[test]
    fn target_unitaries() {
        let mut zero = CatalogGate::PiOver8.spec();
        zero.gamma_g = 0.0;
        assert!(frobenius(&(target_unitary(&zero) - identity(2))) < 1e-15);

        let t = target_unitary(&CatalogGate::PiOver8.spec());
        assert!(t[(0, 1)].norm() < 1e-15 && t[(1, 0)].norm() < 1e-15);
        let rel = t[(1, 1)] / t[(0, 0)];
        assert_abs_diff_eq!(rel.arg(), FRAC_PI_4, epsilon = 1e-14);

        let h = target_unitary(&PathSpec::hadamard());
        let expected = (pauli_x() + pauli_z()) * (-I / 2f64.sqrt());
        assert!(frobenius(&(&h - expected)) < 1e-14);
        let hadamard = (pauli_x() + pauli_z()) * c(1.0 / 2f64.sqrt(), 0.0);
        assert!(phase_aligned_distance(&h, &hadamard) < 1e-7);

        let cz = target_unitary_2q(PI);
        assert_abs_diff_eq!(cz[(3, 3)].re, -1.0, epsilon = 1e-15);
        assert!(frobenius(&(target_unitary_2q(0.0) - identity(4))) < 1e-15);
        let cp = target_unitary_2q(FRAC_PI_4);
        assert_abs_diff_eq!(cp[(3, 3)].arg(), -FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn grid_derivative_is_second_order() {
        let h = 0.01;
        let v: Vec<f64> = (0..101).map(|i| (i as f64 * h).powi(2)).collect();
        let d = grid_derivative(&v, h);
        for (i, di) in d.iter().enumerate() {
            assert_abs_diff_eq!(*di, 2.0 * i as f64 * h, epsilon = 1e-10);
        }
    }
}
