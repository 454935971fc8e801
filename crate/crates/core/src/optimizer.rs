//! Duration minimisation over the Fourier coefficients of the azimuth
//! schedule.
//!
//! The loop itself never changes: the coefficients only re-time the walk
//! along it, so the geometric phase is fixed and the search trades peak
//! envelope against duration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bloch_path::{sample_trajectory, BetaSchedule, PathSpec, DEFAULT_GRID_POINTS};
use crate::dynamics::{CoupledTransmons, TwoQubitDrive};
use crate::error::{Error, Result};
use crate::pulse::{normalize_duration, synthesize, AmplitudeBudget, DrivePulse};

pub use crate::bessel::invert_bessel_j1;

/// Search configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub spec: PathSpec,
    pub budget: AmplitudeBudget,
    pub n_terms: usize,
    pub bounds: (f64, f64),
    /// Reject schedules whose azimuth ever runs backwards.
    pub monotone: bool,
    /// Impose `Σ k a_k = 0`, which keeps `dβ/ds` zero at both ends so the
    /// envelope starts and ends at zero. `a_n` is then eliminated.
    pub zero_endpoint_amplitude: bool,
    pub starts: usize,
    pub evals_per_start: usize,
    pub seed: u64,
    pub grid_points: usize,
}

impl OptimizationProblem {
    pub fn new(spec: PathSpec, budget: AmplitudeBudget) -> Self {
        Self {
            spec,
            budget,
            n_terms: 3,
            bounds: (-0.2, 0.2),
            monotone: true,
            zero_endpoint_amplitude: true,
            starts: 16,
            evals_per_start: 500,
            seed: 0,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.n_terms == 0 || self.n_terms > crate::bloch_path::MAX_FOURIER_TERMS {
            return Err(Error::InvalidParameter(format!(
                "n_terms must be in 1..={}",
                crate::bloch_path::MAX_FOURIER_TERMS
            )));
        }
        let (lo, hi) = self.bounds;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!("bad bounds ({lo}, {hi})")));
        }
        if self.starts == 0 || self.evals_per_start == 0 {
            return Err(Error::InvalidParameter(
                "need at least one start and one evaluation".into(),
            ));
        }
        Ok(())
    }

    fn free_dims(&self) -> usize {
        if self.zero_endpoint_amplitude {
            self.n_terms - 1
        } else {
            self.n_terms
        }
    }

    /// Full coefficient vector from the free parameters.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut coeffs = free.to_vec();
        if self.zero_endpoint_amplitude {
            let n = self.n_terms as f64;
            let s: f64 = free.iter().enumerate().map(|(k, a)| (k + 1) as f64 * a).sum();
            coeffs.push(-s / n);
        }
        coeffs
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub start: usize,
    pub coeffs: Vec<f64>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub coeffs: Vec<f64>,
    pub tau: f64,
    pub baseline_tau: f64,
    pub history: Vec<Evaluation>,
}

/// Duration for the given coefficients, or `+∞` if they leave the box or
/// (with the monotone flag) make the azimuth run backwards.
pub fn objective(coeffs: &[f64], problem: &OptimizationProblem) -> f64 {
    let (lo, hi) = problem.bounds;
    if coeffs.iter().any(|a| !(a >= &lo && a <= &hi)) {
        return f64::INFINITY;
    }
    let Ok(schedule) = BetaSchedule::new(problem.spec.schedule_base(), coeffs.to_vec()) else {
        return f64::INFINITY;
    };
    let Ok(traj) = sample_trajectory(&problem.spec, &schedule, problem.grid_points) else {
        return f64::INFINITY;
    };
    if problem.monotone && traj.samples.iter().any(|p| p.dbeta_ds < -1e-12) {
        return f64::INFINITY;
    }
    let tau = normalize_duration(&traj, &problem.budget);
    if tau.is_finite() && tau > 0.0 {
        tau
    } else {
        f64::INFINITY
    }
}

fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        if evals >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    if simplex.len() < n + 1 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        return simplex.swap_remove(0);
    }
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() < 1e-12 && size < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let x = along(0.5);
            let fx = eval(&x, &mut evals);
            (x, fx)
        } else {
            let x = along(-0.5);
            let fx = eval(&x, &mut evals);
            (x, fx)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            if evals >= max_evals {
                break;
            }
            let x: Vec<f64> = x_best.iter().zip(&item.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
            let fx = eval(&x, &mut evals);
            *item = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn run_start(problem: &OptimizationProblem, start: usize, x0: &[f64]) -> (Vec<f64>, f64, Vec<Evaluation>) {
    let mut history = Vec::new();
    let width = problem.bounds.1 - problem.bounds.0;
    let mut f = |free: &[f64]| {
        let coeffs = problem.expand(free);
        let tau = objective(&coeffs, problem);
        history.push(Evaluation { start, coeffs, tau });
        tau
    };
    let (x, fx) = nelder_mead(&mut f, x0, 0.125 * width, problem.evals_per_start);
    (problem.expand(&x), fx, history)
}

/// Seeded multi-start Nelder–Mead. The first start is the unmodified
/// schedule; the rest are drawn uniformly from the box among feasible
/// points. Returns the baseline if nothing beats it.
pub fn optimize(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    problem.validate()?;
    let baseline_coeffs = vec![0.0; problem.n_terms];
    let baseline_tau = objective(&baseline_coeffs, problem);
    if !baseline_tau.is_finite() {
        return Err(Error::InvalidParameter("the unmodified schedule is infeasible".into()));
    }
    let baseline = OptimizationResult {
        coeffs: baseline_coeffs.clone(),
        tau: baseline_tau,
        baseline_tau,
        history: vec![Evaluation {
            start: 0,
            coeffs: baseline_coeffs,
            tau: baseline_tau,
        }],
    };
    let dims = problem.free_dims();
    let (lo, hi) = problem.bounds;
    if dims == 0 || hi - lo <= 0.0 {
        return Ok(baseline);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let mut starts = vec![vec![0.0; dims]];
    while starts.len() < problem.starts {
        let mut found = None;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..dims).map(|_| rng.gen_range(lo..=hi)).collect();
            if objective(&problem.expand(&x), problem).is_finite() {
                found = Some(x);
                break;
            }
        }
        starts.push(found.unwrap_or_else(|| vec![0.0; dims]));
    }

    let run = |(i, x0): (usize, &Vec<f64>)| run_start(problem, i, x0);
    #[cfg(feature = "parallel")]
    let runs: Vec<_> = {
        use rayon::prelude::*;
        starts.par_iter().enumerate().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = starts.iter().enumerate().map(run).collect();

    let mut history = baseline.history.clone();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (coeffs, tau, h) in runs {
        history.extend(h);
        if tau.is_finite() && best.as_ref().map_or(true, |b| tau < b.1) {
            best = Some((coeffs, tau));
        }
    }
    match best {
        Some((coeffs, tau)) if tau < baseline_tau => Ok(OptimizationResult {
            coeffs,
            tau,
            baseline_tau,
            history,
        }),
        _ => Ok(OptimizationResult { history, ..baseline }),
    }
}

/// Control-phase drive on `{|11⟩, |02⟩}`: the optimised pole-start loop for
/// `γ′` at budget `g′_max`, turned into a parametric modulation.
pub fn two_qubit_drive(
    pair: CoupledTransmons,
    g_prime_max: f64,
    gamma_prime: f64,
    seed: u64,
) -> Result<(TwoQubitDrive, OptimizationResult)> {
    let spec = PathSpec::pole_start(gamma_prime)?;
    let budget = AmplitudeBudget::new(g_prime_max)?;
    let mut problem = OptimizationProblem::new(spec, budget);
    problem.seed = seed;
    let result = optimize(&problem)?;
    let pulse = optimized_pulse(&problem, &result)?;
    Ok((TwoQubitDrive::new(pulse, pair)?, result))
}

/// The drive for an optimisation result.
pub fn optimized_pulse(problem: &OptimizationProblem, result: &OptimizationResult) -> Result<DrivePulse> {
    let schedule = BetaSchedule::new(problem.spec.schedule_base(), result.coeffs.clone())?;
    synthesize(&problem.spec, &schedule, &problem.budget, problem.grid_points)
}
