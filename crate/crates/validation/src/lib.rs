//! The acceptance suite: ten numbered criteria, each made of one or more
//! numeric checks against a stated tolerance.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use shortpath::bessel::{invert_bessel_j1, j1, j1_max};
use shortpath::bloch_path::{alpha_max, sample_trajectory, BetaSchedule, PathSpec, ScheduleBase};
use shortpath::dynamics::{
    evolve_lindblad, parallel_transport_check, CollapseOperators, CoupledTransmons, DecoherenceRates, DensityMatrix,
    Dissipator, ErrorFractions, EvolutionFrame, IntegratorOptions, ThreeLevel, TransmonParams, TwoLevel,
};
use shortpath::fidelity::{
    average_gate_fidelity_1q, dynamical_comparator, robustness_scan, two_qubit_gate_fidelity, FidelitySettings,
    ScanAxis, ScanVariant, SingleQubitModel, TwoQubitModel, DEFAULT_SCAN_POINTS,
};
use shortpath::linalg::phase_aligned_distance;
use shortpath::optimizer::{optimize, two_qubit_drive, OptimizationProblem};
use shortpath::pulse::{drag_correct, synthesize_catalog, target_unitary, AmplitudeBudget, CatalogGate};
use shortpath::{Complex64, Result};

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Fixed schedule coefficients whose durations are checked by criterion 2.
pub const FIXED_COEFFS_PI8: [f64; 3] = [0.007, 0.033, -0.024];
pub const FIXED_COEFFS_HADAMARD: [f64; 3] = [0.095, 0.022, -0.046];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable bound, e.g. `19.66 ± 0.05`.
    pub bound: String,
    pub passed: bool,
}

impl Check {
    fn within(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("{target} ± {tol}"),
            passed: (value - target).abs() <= tol,
        }
    }

    fn below(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("< {limit:.3e}"),
            passed: value < limit,
        }
    }

    fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("<= {limit}"),
            passed: value <= limit,
        }
    }

    fn exceeds(label: impl Into<String>, value: f64, other: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("> {other:.6}"),
            passed: value > other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {:>2} {status} {} ({:.1} s):",
            self.id, self.title, self.seconds
        )?;
        for (i, c) in self.checks.iter().enumerate() {
            let mark = if c.passed { "ok" } else { "FAIL" };
            let sep = if i == 0 { " " } else { "; " };
            write!(f, "{sep}{} = {:.6e} [{}] {mark}", c.label, c.value, c.bound)?;
        }
        Ok(())
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "unoptimized gate durations",
        2 => "durations with fixed schedule coefficients",
        3 => "optimizer from scratch",
        4 => "closed-system unitaries",
        5 => "parallel transport and cyclic evolution",
        6 => "three-level DRAG fidelities",
        7 => "two-qubit control-phase gate",
        8 => "robustness against dynamical gates",
        9 => "geometric phase invariance",
        10 => "numerical hygiene",
        _ => "unknown",
    }
}

pub fn run(id: u8) -> Result<Outcome> {
    let start = Instant::now();
    let checks = match id {
        1 => unoptimized_durations()?,
        2 => fixed_coefficient_durations()?,
        3 => optimizer_from_scratch()?,
        4 => closed_unitaries()?,
        5 => transport_and_cyclicity()?,
        6 => three_level_fidelities()?,
        7 => two_qubit_gate()?,
        8 => robustness_ordering()?,
        9 => phase_invariance()?,
        10 => hygiene()?,
        _ => {
            return Err(shortpath::Error::InvalidParameter(format!(
                "no acceptance criterion {id}"
            )));
        }
    };
    Ok(Outcome {
        id,
        title: title(id),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn unoptimized_durations() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let t8 = synthesize_catalog(CatalogGate::PiOver8, &[], &b)?.tau;
    let th = synthesize_catalog(CatalogGate::Hadamard, &[], &b)?.tau;
    Ok(vec![
        Check::within("tau_pi8_ns", t8, 19.66, 0.05),
        Check::within("tau_hadamard_ns", th, 23.49, 0.05),
    ])
}

fn fixed_coefficient_durations() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let t8 = synthesize_catalog(CatalogGate::PiOver8, &FIXED_COEFFS_PI8, &b)?.tau;
    let th = synthesize_catalog(CatalogGate::Hadamard, &FIXED_COEFFS_HADAMARD, &b)?.tau;
    Ok(vec![
        Check::within("tau_pi8_ns", t8, 16.71, 0.1),
        Check::within("tau_hadamard_ns", th, 19.57, 0.1),
    ])
}

fn optimizer_from_scratch() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let mut out = Vec::new();
    for (gate, limit) in [(CatalogGate::PiOver8, 16.8), (CatalogGate::Hadamard, 19.7)] {
        let problem = OptimizationProblem::new(gate.spec(), b);
        let r = optimize(&problem)?;
        out.push(Check::at_most(format!("tau_{}_ns", gate.name()), r.tau, limit));
    }
    Ok(out)
}

fn closed_unitaries() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let mut out = Vec::new();
    for gate in CatalogGate::ALL {
        let p = synthesize_catalog(gate, &[], &b)?;
        let u = shortpath::dynamics::propagate_unitary(&TwoLevel::new(&p), &IntegratorOptions::default())?;
        let d = phase_aligned_distance(&u, &target_unitary(&p.spec));
        out.push(Check::below(format!("distance_{}", gate.name()), d, 1e-5));
    }
    Ok(out)
}

fn transport_and_cyclicity() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let mut out = Vec::new();
    for gate in CatalogGate::ALL {
        let p = synthesize_catalog(gate, &[], &b)?;
        let frame = EvolutionFrame::new(p.spec.alpha0, p.spec.beta0);
        let r = parallel_transport_check(&TwoLevel::new(&p), &frame, &IntegratorOptions::default())?;
        out.push(Check::below(
            format!("transport_{}_rad_per_ns", gate.name()),
            r.max_violation,
            1e-8 * b.omega0,
        ));
        out.push(Check::below(
            format!("cyclic_{}", gate.name()),
            r.cyclic_deviation,
            1e-6,
        ));
    }
    Ok(out)
}

fn three_level_fidelities() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let params = TransmonParams::reference();
    let rates = DecoherenceRates::reference();
    let settings = FidelitySettings::default();
    let mut out = Vec::new();
    for (gate, expected) in [(CatalogGate::PiOver8, 0.9996), (CatalogGate::Hadamard, 0.9997)] {
        let p = drag_correct(&synthesize_catalog(gate, &[], &b)?, params.anharmonicity)?;
        let f = average_gate_fidelity_1q(
            &p,
            &target_unitary(&p.spec),
            SingleQubitModel::ThreeLevel(params),
            &rates,
            ErrorFractions::default(),
            b.omega0,
            &settings,
        )?;
        out.push(Check::within(format!("fidelity_{}", gate.name()), f, expected, 0.0003));
    }
    Ok(out)
}

fn two_qubit_gate() -> Result<Vec<Check>> {
    let (drive, _) = two_qubit_drive(
        CoupledTransmons::reference(),
        CoupledTransmons::reference_g_prime_max(),
        FRAC_PI_4,
        0,
    )?;
    let f = two_qubit_gate_fidelity(
        &drive,
        TwoQubitModel::Full,
        &DecoherenceRates::reference(),
        &FidelitySettings::default(),
    )?;
    Ok(vec![
        Check::within("tau_ns", drive.duration(), 43.50, 0.5),
        Check::within("fidelity_full", f, 0.9981, 0.0015),
    ])
}

fn robustness_ordering() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let rates = DecoherenceRates::reference();
    let settings = FidelitySettings::default();
    let mut out = Vec::new();
    for gate in [CatalogGate::PiOver8, CatalogGate::Hadamard] {
        let p = synthesize_catalog(gate, &[], &b)?;
        let (cmp, cmp_target) = dynamical_comparator(&p.spec, &b)?;
        let variants = [
            ScanVariant {
                name: "geometric".into(),
                drive: &p,
                target: target_unitary(&p.spec),
            },
            ScanVariant {
                name: "dynamical".into(),
                drive: &cmp,
                target: cmp_target,
            },
        ];
        for (axis, sym) in [(ScanAxis::EpsilonX, "eps"), (ScanAxis::DeltaZ, "delta")] {
            let scan = robustness_scan(&variants, axis, DEFAULT_SCAN_POINTS, 0.1, &rates, b.omega0, &settings)?;
            let last = scan.points.len() - 1;
            for (idx, sign) in [(0, "-"), (last, "+")] {
                let geo = scan.fidelities[0][idx];
                let dyn_f = scan.fidelities[1][idx];
                out.push(Check::exceeds(format!("{}_{sym}{sign}0.1", gate.name()), geo, dyn_f));
            }
        }
    }
    Ok(out)
}

fn phase_invariance() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    let mut drawn = 0;
    while accepted < 20 && drawn < 10_000 {
        drawn += 1;
        let spec = if accepted % 2 == 0 {
            PathSpec::pole_start(FRAC_PI_8)?
        } else {
            PathSpec::hadamard()
        };
        let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.2..=0.2)).collect();
        let sched = BetaSchedule::new(spec.schedule_base(), coeffs)?;
        // draws that do not trace a closed loop are redrawn
        let Ok(traj) = sample_trajectory(&spec, &sched, 4001) else {
            continue;
        };
        accepted += 1;
        worst = worst.max((traj.geometric_phase() - spec.gamma_g).abs());
    }
    Ok(vec![
        Check {
            label: "loops_tested".into(),
            value: accepted as f64,
            bound: "= 20".into(),
            passed: accepted == 20,
        },
        Check::below("max_phase_deviation_rad", worst, 1e-6),
    ])
}

fn polyline_length(points: &[[f64; 3]]) -> f64 {
    points
        .windows(2)
        .map(|w| (0..3).map(|i| w[0][i] * w[1][i]).sum::<f64>().clamp(-1.0, 1.0).acos())
        .sum()
}

fn orange_slice_length(gamma: f64, n: usize) -> f64 {
    let mut pts = Vec::with_capacity(2 * n + 2);
    for k in 0..=n {
        let a = PI * k as f64 / n as f64;
        pts.push([a.sin(), 0.0, a.cos()]);
    }
    for k in 0..=n {
        let a = PI - PI * k as f64 / n as f64;
        pts.push([a.sin() * gamma.cos(), a.sin() * gamma.sin(), a.cos()]);
    }
    polyline_length(&pts)
}

fn hygiene() -> Result<Vec<Check>> {
    let b = AmplitudeBudget::reference();
    let params = TransmonParams::reference();
    let rates = DecoherenceRates::reference();
    let mut out = Vec::new();

    let p = drag_correct(
        &synthesize_catalog(CatalogGate::PiOver8, &[], &b)?,
        params.anharmonicity,
    )?;
    let h = ThreeLevel::new(&p, params);
    let d = Dissipator::single(3, &rates, CollapseOperators::Qubit)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rho0 = DensityMatrix::pure(&[Complex64::new(r, 0.0), Complex64::new(0.0, r), Complex64::new(0.0, 0.0)])?;
    let run = evolve_lindblad(&h, &rho0, &d, &IntegratorOptions::default(), 1000)?;
    out.push(Check::below("trace_error", run.max_trace_error, 1e-8));

    let settings = FidelitySettings::default();
    let target = target_unitary(&p.spec);
    let eval = |opts: IntegratorOptions| {
        average_gate_fidelity_1q(
            &p,
            &target,
            SingleQubitModel::ThreeLevel(params),
            &rates,
            ErrorFractions::default(),
            b.omega0,
            &FidelitySettings {
                integrator: opts,
                ..settings
            },
        )
    };
    let coarse = eval(IntegratorOptions::default())?;
    let fine = eval(IntegratorOptions::default().halved())?;
    out.push(Check::below("rk4_dt_halving_change", (coarse - fine).abs(), 1e-6));

    let top = j1_max();
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let y = top * k as f64 / 1000.0;
        worst = worst.max((j1(invert_bessel_j1(y)?) - y).abs());
    }
    out.push(Check::below("bessel_round_trip", worst, 1e-10));

    for (gamma, name) in [(FRAC_PI_8, "pi/8"), (FRAC_PI_4, "pi/4"), (FRAC_PI_2, "pi/2")] {
        let spec = PathSpec::pole_start(gamma)?;
        let traj = sample_trajectory(&spec, &BetaSchedule::unmodified(ScheduleBase::HalfTurn), 4001)?;
        let circle = 2.0 * PI * (alpha_max(gamma)? / 2.0).sin();
        let slice = orange_slice_length(gamma, 2000);
        out.push(Check {
            label: format!("loop_length_{name}"),
            value: traj.path_length(),
            bound: format!("< {slice:.6} (circle {circle:.6})"),
            passed: traj.path_length() < slice,
        });
    }
    Ok(out)
}

/// Runs the given criteria in order, calling `each` as soon as one
/// finishes.
pub fn run_many(ids: &[u8], mut each: impl FnMut(&Outcome)) -> Result<Vec<Outcome>> {
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let o = run(id)?;
        each(&o);
        out.push(o);
    }
    Ok(out)
}

pub fn csv(outcomes: &[Outcome]) -> String {
    let mut s = String::from("criterion,check,value,bound,passed\n");
    for o in outcomes {
        for c in &o.checks {
            s.push_str(&format!(
                "{},{},{},\"{}\",{}\n",
                o.id,
                c.label,
                shortpath::export::num(c.value),
                c.bound,
                c.passed
            ));
        }
    }
    s
}
