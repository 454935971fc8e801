//! Closed circle loops on the Bloch sphere.
//!
//! A gate is identified by its target geometric phase and the starting point
//! of the loop. Two families are supported: loops that start at the North
//! Pole (Phase and π/8 gates) and the loop through (π/4, 0) used for the
//! Hadamard gate. Time is normalised, `s = t/τ ∈ [0, 1]`; all derivatives
//! here are taken with respect to `s`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which loop family a gate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    /// Loop through the North Pole; azimuth sweeps half a turn.
    PoleStart,
    /// Loop through (α, β) = (π/4, 0); azimuth sweeps a full turn.
    HadamardStart,
}

/// Target geometric phase and starting point of a loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub gamma_g: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub kind: PathKind,
}

impl PathSpec {
    /// A loop starting at the North Pole with `β₀ = π/2`.
    pub fn pole_start(gamma_g: f64) -> Result<Self> {
        if !(gamma_g > 0.0 && gamma_g < PI) {
            return Err(Error::Domain {
                op: "PathSpec::pole_start",
                value: gamma_g,
                domain: "(0, π)",
            });
        }
        Ok(Self {
            gamma_g,
            alpha0: 0.0,
            beta0: FRAC_PI_2,
            kind: PathKind::PoleStart,
        })
    }

    /// The Hadamard loop: `γ_g = π/2` starting from `(π/4, 0)`.
    pub fn hadamard() -> Self {
        Self {
            gamma_g: FRAC_PI_2,
            alpha0: FRAC_PI_4,
            beta0: 0.0,
            kind: PathKind::HadamardStart,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PathKind::PoleStart => {
                if !(self.gamma_g > 0.0 && self.gamma_g < PI) {
                    return Err(Error::Domain {
                        op: "PathSpec",
                        value: self.gamma_g,
                        domain: "(0, π)",
                    });
                }
                if self.alpha0 != 0.0 {
                    return Err(Error::InvalidParameter("pole-start loops require alpha0 = 0".into()));
                }
            }
            PathKind::HadamardStart => {
                if (self.gamma_g - FRAC_PI_2).abs() > 1e-12
                    || (self.alpha0 - FRAC_PI_4).abs() > 1e-12
                    || self.beta0.abs() > 1e-12
                {
                    return Err(Error::InvalidParameter(
                        "hadamard loop requires (gamma_g, alpha0, beta0) = (π/2, π/4, 0)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The azimuth profile this loop family is paired with.
    pub fn schedule_base(&self) -> ScheduleBase {
        match self.kind {
            PathKind::PoleStart => ScheduleBase::HalfTurn,
            PathKind::HadamardStart => ScheduleBase::FullTurn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleBase {
    /// `β: π/2 → 3π/2` via `π/2 + π sin²(πs/2)`.
    HalfTurn,
    /// `β: 0 → 2π` via `2π sin²(πs/2)`.
    FullTurn,
}

/// Azimuth schedule in normalised time: a base profile plus up to three
/// Fourier corrections `a_k sin(2kπs)`, which vanish at both ends.
///
/// The physical duration is fixed later by the amplitude budget, so it is
/// not part of the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub base: ScheduleBase,
    pub coeffs: Vec<f64>,
}

pub const MAX_FOURIER_TERMS: usize = 3;

impl BetaSchedule {
    pub fn new(base: ScheduleBase, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() > MAX_FOURIER_TERMS {
            return Err(Error::InvalidParameter(format!(
                "at most {MAX_FOURIER_TERMS} Fourier coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { base, coeffs })
    }

    pub fn unmodified(base: ScheduleBase) -> Self {
        Self {
            base,
            coeffs: Vec::new(),
        }
    }

    pub fn start(&self) -> f64 {
        match self.base {
            ScheduleBase::HalfTurn => FRAC_PI_2,
            ScheduleBase::FullTurn => 0.0,
        }
    }

    pub fn end(&self) -> f64 {
        match self.base {
            ScheduleBase::HalfTurn => 1.5 * PI,
            ScheduleBase::FullTurn => TAU,
        }
    }
}

/// Azimuth and its derivative with respect to `s` at normalised time `s`.
pub fn beta_schedule(s: f64, schedule: &BetaSchedule) -> (f64, f64) {
    let half = 0.5 * PI * s;
    let (mut beta, mut dbeta) = match schedule.base {
        ScheduleBase::HalfTurn => (FRAC_PI_2 + PI * half.sin().powi(2), 0.5 * PI * PI * (PI * s).sin()),
        ScheduleBase::FullTurn => (TAU * half.sin().powi(2), PI * PI * (PI * s).sin()),
    };
    for (k, a) in schedule.coeffs.iter().enumerate() {
        let w = TAU * (k + 1) as f64;
        beta += a * (w * s).sin();
        dbeta += a * w * (w * s).cos();
    }
    (beta, dbeta)
}

/// Shape constant of the pole-start circle, `√(2πγ − γ²)/(π − γ)`.
pub fn circle_constant(gamma_g: f64) -> Result<f64> {
    if !(gamma_g > 0.0 && gamma_g < PI) {
        return Err(Error::Domain {
            op: "circle_constant",
            value: gamma_g,
            domain: "(0, π)",
        });
    }
    Ok((TAU * gamma_g - gamma_g * gamma_g).sqrt() / (PI - gamma_g))
}

/// Largest polar angle reached by the pole-start circle:
/// `cos(α_m/2) = 1 − γ/π`.
pub fn alpha_max(gamma_g: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&gamma_g) {
        return Err(Error::Domain {
            op: "alpha_max",
            value: gamma_g,
            domain: "[0, π]",
        });
    }
    Ok(2.0 * (1.0 - gamma_g / PI).acos())
}

// Sine factors down to this size are treated as rounding noise at the
// window edges β = π/2, 3π/2.
const WINDOW_SLACK: f64 = 1e-12;

fn pole_sine_factor(beta: f64) -> Result<f64> {
    let factor = (beta - FRAC_PI_2).sin();
    if factor < -WINDOW_SLACK {
        return Err(Error::Domain {
            op: "alpha_of_beta",
            value: beta,
            domain: "[π/2, 3π/2]",
        });
    }
    Ok(factor.max(0.0))
}

/// Polar angle on the pole-start circle, `tan(α/2) = C sin(β − π/2)`.
pub fn alpha_of_beta(gamma_g: f64, beta: f64) -> Result<f64> {
    let c = circle_constant(gamma_g)?;
    Ok(2.0 * (c * pole_sine_factor(beta)?).atan())
}

/// `dα/dβ` on the pole-start circle.
fn dalpha_dbeta_pole(c: f64, beta: f64) -> f64 {
    let x = c * (beta - FRAC_PI_2).sin();
    2.0 * c * (beta - FRAC_PI_2).cos() / (1.0 + x * x)
}

const HADAMARD_TILT: f64 = PI / 12.0;
const ROOT_TOL: f64 = 1e-13;

/// Residual of the Hadamard-loop constraint
/// `2 sin(π/12) sinα cosβ − 2 cos(π/12) cosα + 1`.
pub fn hadamard_residual(alpha: f64, beta: f64) -> f64 {
    2.0 * HADAMARD_TILT.sin() * alpha.sin() * beta.cos() - 2.0 * HADAMARD_TILT.cos() * alpha.cos() + 1.0
}

fn hadamard_partials(alpha: f64, beta: f64) -> (f64, f64) {
    let (st, ct) = HADAMARD_TILT.sin_cos();
    let d_alpha = 2.0 * st * alpha.cos() * beta.cos() + 2.0 * ct * alpha.sin();
    let d_beta = -2.0 * st * alpha.sin() * beta.sin();
    (d_alpha, d_beta)
}

/// Polar angle on the Hadamard loop at azimuth `beta`.
pub fn hadamard_alpha_of_beta(beta: f64) -> Result<f64> {
    hadamard_alpha_seeded(beta, FRAC_PI_4)
}

/// Safeguarded Newton iteration on `[0, π]`, started from `seed`.
///
/// The residual is negative at α = 0 and positive at α = π for every β, so
/// the bracket is always valid; Newton steps that leave it fall back to
/// bisection.
pub fn hadamard_alpha_seeded(beta: f64, seed: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, PI);
    let mut x = seed.clamp(lo, hi);
    for _ in 0..200 {
        let f = hadamard_residual(x, beta);
        if f.abs() < ROOT_TOL {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let (df, _) = hadamard_partials(x, beta);
        let newton = x - f / df;
        x = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    let residual = hadamard_residual(x, beta);
    if residual.abs() < 1e-12 {
        Ok(x)
    } else {
        Err(Error::Convergence {
            op: "hadamard_alpha_of_beta",
            residual,
        })
    }
}

/// One sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dalpha_ds: f64,
    pub dbeta_ds: f64,
}

impl PathPoint {
    /// Unit Bloch vector of the point.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        [sa * cb, sa * sb, ca]
    }

    /// Great-circle distance to another point, in radians.
    pub fn angular_distance(&self, other: &PathPoint) -> f64 {
        let a = self.bloch_vector();
        let b = other.bloch_vector();
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let sin = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
        let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        sin.atan2(cos)
    }
}

/// Evaluates the loop at normalised time `s`.
///
/// `seed` is the polar angle at a nearby earlier time; it only matters for the
/// Hadamard loop, where it starts the root finder on the continuous branch.
pub fn point_at(spec: &PathSpec, schedule: &BetaSchedule, s: f64, seed: Option<f64>) -> Result<PathPoint> {
    let (beta, dbeta_ds) = beta_schedule(s, schedule);
    let (alpha, dalpha_ds) = match spec.kind {
        PathKind::PoleStart => {
            let c = circle_constant(spec.gamma_g)?;
            let alpha = 2.0 * (c * pole_sine_factor(beta)?).atan();
            (alpha, dalpha_dbeta_pole(c, beta) * dbeta_ds)
        }
        PathKind::HadamardStart => {
            let alpha = hadamard_alpha_seeded(beta, seed.unwrap_or(spec.alpha0))?;
            let (g_alpha, g_beta) = hadamard_partials(alpha, beta);
            (alpha, -g_beta / g_alpha * dbeta_ds)
        }
    };
    Ok(PathPoint {
        s,
        alpha,
        beta,
        dalpha_ds,
        dbeta_ds,
    })
}

fn check_pairing(spec: &PathSpec, schedule: &BetaSchedule) -> Result<()> {
    if spec.schedule_base() != schedule.base {
        return Err(Error::InvalidParameter(format!(
            "{:?} loops need a {:?} schedule, got {:?}",
            spec.kind,
            spec.schedule_base(),
            schedule.base
        )));
    }
    Ok(())
}

/// A loop sampled on a uniform grid in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTrajectory {
    pub spec: PathSpec,
    pub schedule: BetaSchedule,
    pub samples: Vec<PathPoint>,
}

pub const DEFAULT_GRID_POINTS: usize = 4001;

pub fn sample_trajectory(spec: &PathSpec, schedule: &BetaSchedule, grid_points: usize) -> Result<PathTrajectory> {
    spec.validate()?;
    check_pairing(spec, schedule)?;
    if grid_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 grid points, got {grid_points}"
        )));
    }
    let last = (grid_points - 1) as f64;
    let mut samples = Vec::with_capacity(grid_points);
    let mut seed = spec.alpha0;
    for i in 0..grid_points {
        let p = point_at(spec, schedule, i as f64 / last, Some(seed))?;
        seed = p.alpha;
        samples.push(p);
    }
    Ok(PathTrajectory {
        spec: *spec,
        schedule: schedule.clone(),
        samples,
    })
}

impl PathTrajectory {
    pub fn geometric_phase(&self) -> f64 {
        geometric_phase(&self.samples)
    }

    pub fn path_length(&self) -> f64 {
        path_length(&self.samples)
    }

    /// Angular distance between the first and last samples.
    pub fn closure_gap(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => a.angular_distance(b),
            _ => 0.0,
        }
    }

    pub fn max_alpha(&self) -> f64 {
        self.samples.iter().map(|p| p.alpha).fold(f64::MIN, f64::max)
    }
}

/// Composite Simpson on a uniform grid, trapezoid when the interval count
/// is odd.
pub(crate) fn integrate_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    if intervals % 2 == 1 {
        let inner: f64 = values[1..n - 1].iter().sum();
        return h * (0.5 * (values[0] + values[n - 1]) + inner);
    }
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

fn grid_step(samples: &[PathPoint]) -> f64 {
    match samples {
        [first, .., last] => (last.s - first.s) / (samples.len() - 1) as f64,
        _ => 0.0,
    }
}

/// `½∫(1 − cosα) dβ` over the sampled loop.
pub fn geometric_phase(samples: &[PathPoint]) -> f64 {
    let integrand: Vec<f64> = samples
        .iter()
        .map(|p| 0.5 * (1.0 - p.alpha.cos()) * p.dbeta_ds)
        .collect();
    integrate_uniform(&integrand, grid_step(samples))
}

/// Arc length of the sampled loop on the unit sphere.
pub fn path_length(samples: &[PathPoint]) -> f64 {
    let integrand: Vec<f64> = samples
        .iter()
        .map(|p| (p.dalpha_ds.powi(2) + (p.alpha.sin() * p.dbeta_ds).powi(2)).sqrt())
        .collect();
    integrate_uniform(&integrand, grid_step(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_8;

    fn pole(gamma: f64) -> (PathSpec, BetaSchedule) {
        (
            PathSpec::pole_start(gamma).unwrap(),
            BetaSchedule::unmodified(ScheduleBase::HalfTurn),
        )
    }

    #[test]
    fn circle_constant_values() {
        assert_abs_diff_eq!(circle_constant(FRAC_PI_4).unwrap(), 7f64.sqrt() / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(circle_constant(FRAC_PI_8).unwrap(), 15f64.sqrt() / 7.0, epsilon = 1e-15);
        assert!(circle_constant(1e-12).unwrap() < 1e-5);
        assert!(matches!(circle_constant(0.0), Err(Error::Domain { .. })));
        assert!(circle_constant(PI).is_err());
        for gamma in [FRAC_PI_8, FRAC_PI_4, FRAC_PI_2] {
            let am = alpha_max(gamma).unwrap();
            assert_abs_diff_eq!((am / 2.0).tan(), circle_constant(gamma).unwrap(), epsilon = 1e-13);
        }
    }

    #[test]
    fn alpha_max_values() {
        assert_eq!(alpha_max(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(alpha_max(PI).unwrap(), PI, epsilon = 1e-15);
        // cos(α_m/2) = 7/8
        assert_abs_diff_eq!(
            alpha_max(FRAC_PI_8).unwrap(),
            2.0 * (7.0f64 / 8.0).acos(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(alpha_max(FRAC_PI_8).unwrap(), 1.0107, epsilon = 1e-4);
        assert!(alpha_max(-0.1).is_err());
        assert!(alpha_max(3.2).is_err());
    }

    #[test]
    fn alpha_of_beta_values() {
        assert_eq!(alpha_of_beta(FRAC_PI_8, FRAC_PI_2).unwrap(), 0.0);
        assert_abs_diff_eq!(
            alpha_of_beta(FRAC_PI_8, PI).unwrap(),
            alpha_max(FRAC_PI_8).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(alpha_of_beta(FRAC_PI_4, 1.5 * PI).unwrap(), 0.0, epsilon = 1e-15);
        assert!(alpha_of_beta(FRAC_PI_4, 0.0).is_err());
        assert!(alpha_of_beta(FRAC_PI_4, 1.6 * PI).is_err());
    }

    #[test]
    fn hadamard_roots() {
        assert_abs_diff_eq!(hadamard_alpha_of_beta(0.0).unwrap(), FRAC_PI_4, epsilon = 1e-13);
        assert_abs_diff_eq!(hadamard_alpha_of_beta(TAU).unwrap(), FRAC_PI_4, epsilon = 1e-13);
        // 2cos(α − π/12) = 1 at cosβ = −1
        assert_abs_diff_eq!(hadamard_alpha_of_beta(PI).unwrap(), 5.0 * PI / 12.0, epsilon = 1e-13);
        for i in 0..=64 {
            let beta = TAU * i as f64 / 64.0;
            let a = hadamard_alpha_of_beta(beta).unwrap();
            assert!(hadamard_residual(a, beta).abs() < 1e-12);
            assert!((0.0..=PI).contains(&a));
        }
    }

    #[test]
    fn schedule_endpoints() {
        let half = BetaSchedule::new(ScheduleBase::HalfTurn, vec![0.1, -0.05, 0.02]).unwrap();
        let full = BetaSchedule::new(ScheduleBase::FullTurn, vec![0.1, -0.05, 0.02]).unwrap();
        assert_abs_diff_eq!(beta_schedule(0.0, &half).0, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_schedule(1.0, &half).0, 1.5 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(beta_schedule(0.0, &full).0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_schedule(1.0, &full).0, TAU, epsilon = 1e-14);
        let plain = BetaSchedule::unmodified(ScheduleBase::HalfTurn);
        let (b, db) = beta_schedule(0.5, &plain);
        assert_abs_diff_eq!(b, PI, epsilon = 1e-15);
        assert_abs_diff_eq!(db, PI * PI / 2.0, epsilon = 1e-14);
        assert!(BetaSchedule::new(ScheduleBase::HalfTurn, vec![0.0; 4]).is_err());
    }

    #[test]
    fn schedule_derivative_matches_finite_difference() {
        let sched = BetaSchedule::new(ScheduleBase::FullTurn, vec![0.095, 0.022, -0.046]).unwrap();
        let h = 1e-6;
        for i in 1..20 {
            let s = i as f64 / 20.0;
            let fd = (beta_schedule(s + h, &sched).0 - beta_schedule(s - h, &sched).0) / (2.0 * h);
            assert_abs_diff_eq!(beta_schedule(s, &sched).1, fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn trajectory_sampling() {
        let (spec, sched) = pole(FRAC_PI_8);
        let traj = sample_trajectory(&spec, &sched, 1001).unwrap();
        assert_abs_diff_eq!(traj.max_alpha(), alpha_max(FRAC_PI_8).unwrap(), epsilon = 1e-9);
        assert!(traj.closure_gap() < 1e-9);

        let had = sample_trajectory(
            &PathSpec::hadamard(),
            &BetaSchedule::unmodified(ScheduleBase::FullTurn),
            1001,
        )
        .unwrap();
        assert!(had.closure_gap() < 1e-9);
        assert_abs_diff_eq!(had.samples[0].alpha, FRAC_PI_4, epsilon = 1e-13);

        let (spec, sched) = pole(FRAC_PI_4);
        let two = sample_trajectory(&spec, &sched, 2).unwrap();
        assert_eq!(two.samples.len(), 2);
        assert!(two.samples.iter().all(|p| p.alpha.abs() < 1e-14));
        assert!(sample_trajectory(&spec, &sched, 1).is_err());
        assert!(sample_trajectory(&spec, &BetaSchedule::unmodified(ScheduleBase::FullTurn), 10).is_err());
    }

    #[test]
    fn hadamard_slope_matches_finite_difference() {
        let spec = PathSpec::hadamard();
        let sched = BetaSchedule::unmodified(ScheduleBase::FullTurn);
        let h = 1e-6;
        for i in 1..10 {
            let s = i as f64 / 10.0;
            let p = point_at(&spec, &sched, s, None).unwrap();
            let fd = (point_at(&spec, &sched, s + h, None).unwrap().alpha
                - point_at(&spec, &sched, s - h, None).unwrap().alpha)
                / (2.0 * h);
            assert_abs_diff_eq!(p.dalpha_ds, fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn phases_and_lengths() {
        let flat = vec![
            PathPoint {
                s: 0.0,
                alpha: 0.0,
                beta: 0.0,
                dalpha_ds: 0.0,
                dbeta_ds: 1.0,
            },
            PathPoint {
                s: 0.5,
                alpha: 0.0,
                beta: 0.5,
                dalpha_ds: 0.0,
                dbeta_ds: 1.0,
            },
            PathPoint {
                s: 1.0,
                alpha: 0.0,
                beta: 1.0,
                dalpha_ds: 0.0,
                dbeta_ds: 1.0,
            },
        ];
        assert_eq!(geometric_phase(&flat), 0.0);
        assert_eq!(path_length(&flat), 0.0);

        let (spec, sched) = pole(FRAC_PI_8);
        let traj = sample_trajectory(&spec, &sched, DEFAULT_GRID_POINTS).unwrap();
        assert_abs_diff_eq!(traj.geometric_phase(), FRAC_PI_8, epsilon = 1e-6);
        // small circle of angular radius α_m/2
        let radius = alpha_max(FRAC_PI_8).unwrap() / 2.0;
        assert_abs_diff_eq!(traj.path_length(), TAU * radius.sin(), epsilon = 1e-6);
        assert_abs_diff_eq!(traj.path_length(), 3.042, epsilon = 1e-3);

        let had = sample_trajectory(
            &PathSpec::hadamard(),
            &BetaSchedule::unmodified(ScheduleBase::FullTurn),
            DEFAULT_GRID_POINTS,
        )
        .unwrap();
        assert_abs_diff_eq!(had.geometric_phase(), FRAC_PI_2, epsilon = 1e-6);
    }

    #[test]
    fn simpson_and_trapezoid() {
        let h = 0.25;
        let even: Vec<f64> = (0..5).map(|i| (i as f64 * h).powi(2)).collect();
        assert_abs_diff_eq!(integrate_uniform(&even, h), 1.0 / 3.0, epsilon = 1e-15);
        let odd: Vec<f64> = (0..4).map(|i| i as f64 / 3.0).collect();
        assert_abs_diff_eq!(integrate_uniform(&odd, 1.0 / 3.0), 0.5, epsilon = 1e-15);
    }
}
