//! One function per subcommand. Each writes its CSV files into the output
//! directory and returns what it wrote plus a few `key=value` facts.

use std::fs;
use std::path::{Path, PathBuf};

use shortpath::bloch_path::{BetaSchedule, PathSpec, DEFAULT_GRID_POINTS};
use shortpath::dynamics::{error_inject, Dissipator, ThreeLevel, TwoLevel, TwoQubitDrive, TWO_QUBIT_COMPUTATIONAL};
use shortpath::export;
use shortpath::fidelity::{
    average_gate_fidelity_1q, dynamical_comparator, fidelity_dynamics, robustness_scan, two_qubit_dynamics,
    two_qubit_gate_fidelity, ScanAxis, ScanVariant, SingleQubitModel, TwoQubitModel,
};
use shortpath::optimizer::{optimize, two_qubit_drive};
use shortpath::pulse::{drag_correct, synthesize, target_unitary, AmplitudeBudget, DrivePulse};
use shortpath::Complex64;

use crate::config::{ModelKind, ScenarioConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub outputs: Vec<String>,
    pub facts: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl Report {
    fn fact(&mut self, key: &str, value: impl ToString) {
        self.facts.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.facts.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let meta = fs::metadata(dir)?;
    if meta.permissions().readonly() {
        return Err(CliError::Io(format!(
            "{}: output directory is not writable",
            dir.display()
        )));
    }
    Ok(())
}

fn write(dir: &Path, name: String, text: &str, report: &mut Report) -> Result<(), CliError> {
    let path: PathBuf = dir.join(&name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    report.outputs.push(name);
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

/// The bare drive for the configured loop and coefficients.
pub fn build_pulse(cfg: &ScenarioConfig, spec: &PathSpec, budget: &AmplitudeBudget) -> Result<DrivePulse, CliError> {
    let schedule = BetaSchedule::new(spec.schedule_base(), cfg.coeffs.clone())?;
    Ok(synthesize(spec, &schedule, budget, DEFAULT_GRID_POINTS)?)
}

fn qubit_state(cfg: &ScenarioConfig) -> [Complex64; 2] {
    let s = cfg.initial_state;
    [
        Complex64::new((s.theta / 2.0).cos(), 0.0),
        Complex64::from_polar((s.theta / 2.0).sin(), s.phi),
    ]
}

pub fn synth(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let dir = cfg.out_dir();
    prepare_out_dir(&dir)?;
    let spec = cfg.gate.spec();
    let budget = cfg.budget()?;
    let mut pulse = build_pulse(cfg, &spec, &budget)?;
    if cfg.drag_enabled() {
        pulse = drag_correct(&pulse, cfg.transmon().anharmonicity)?;
    }
    let mut report = Report::default();
    write(
        &dir,
        format!("pulse_{}.csv", cfg.gate.label()),
        &export::pulse_csv(&pulse),
        &mut report,
    )?;
    report.fact("tau_ns", fmt(pulse.tau));
    report.fact("peak_rabi_rad_per_ns", fmt(pulse.peak_envelope()));
    report.fact("drag", pulse.drag.is_some());
    Ok(report)
}

fn single_qubit_model(cfg: &ScenarioConfig) -> Result<SingleQubitModel, CliError> {
    match cfg.model {
        ModelKind::TwoLevel => Ok(SingleQubitModel::TwoLevel),
        ModelKind::ThreeLevel => Ok(SingleQubitModel::ThreeLevel(cfg.transmon())),
        _ => Err(CliError::Config(
            "two-qubit models are handled by the two-qubit command".into(),
        )),
    }
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let model = single_qubit_model(cfg)?;
    let dir = cfg.out_dir();
    prepare_out_dir(&dir)?;
    let mut report = Report::default();
    let spec = cfg.gate.spec();
    let budget = cfg.budget()?;
    let rates = cfg.rates()?;
    let bare = build_pulse(cfg, &spec, &budget)?;
    let three = matches!(model, SingleQubitModel::ThreeLevel(_));
    if three && !cfg.coeffs.is_empty() {
        report.warnings.push(
            "optimized schedules do not keep the DRAG leakage suppression; three-level results may show extra leakage"
                .into(),
        );
    }
    let pulse = if three && cfg.drag_enabled() {
        drag_correct(&bare, cfg.transmon().anharmonicity)?
    } else {
        bare.clone()
    };
    let target = target_unitary(&spec);
    let settings = cfg.fidelity_settings();
    let fidelity = average_gate_fidelity_1q(&pulse, &target, model, &rates, cfg.errors, budget.omega0, &settings)?;

    let perturbed = error_inject(&pulse, cfg.errors, budget.omega0);
    let ideal = TwoLevel::new(&bare);
    let psi0 = qubit_state(cfg);
    let trace = if three {
        let h = ThreeLevel::new(&perturbed, cfg.transmon());
        let d = Dissipator::single(3, &rates, cfg.collapse)?;
        fidelity_dynamics(&h, &d, &ideal, psi0, &settings.integrator, cfg.record_stride)?
    } else {
        let h = TwoLevel::new(&perturbed);
        let d = Dissipator::single(2, &rates, cfg.collapse)?;
        fidelity_dynamics(&h, &d, &ideal, psi0, &settings.integrator, cfg.record_stride)?
    };
    let label = cfg.gate.label();
    let model_name = if three { "three_level" } else { "two_level" };
    write(
        &dir,
        format!("simulate_{label}_{model_name}.csv"),
        &export::trace_csv(&trace, None),
        &mut report,
    )?;
    let summary = format!(
        "gate,model,epsilon,delta,tau_ns,fidelity\n{label},{model_name},{},{},{},{}\n",
        export::num(cfg.errors.epsilon),
        export::num(cfg.errors.delta),
        export::num(pulse.tau),
        export::num(fidelity),
    );
    write(
        &dir,
        format!("simulate_{label}_{model_name}_summary.csv"),
        &summary,
        &mut report,
    )?;
    report.fact("tau_ns", fmt(pulse.tau));
    report.fact("fidelity", format!("{fidelity:.8}"));
    report.fact(
        "final_trace_fidelity",
        format!("{:.8}", trace.fidelity.last().copied().unwrap_or(1.0)),
    );
    if cfg.errors.outside_validated_range() {
        report.warnings.push("error fractions outside [-0.1, 0.1]".into());
    }
    Ok(report)
}

fn axis_name(axis: ScanAxis) -> &'static str {
    match axis {
        ScanAxis::EpsilonX => "epsilon",
        ScanAxis::DeltaZ => "delta",
        ScanAxis::Grid2D => "grid",
    }
}

pub fn scan(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    if cfg.model != ModelKind::TwoLevel {
        return Err(CliError::Config("robustness scans use the two_level model".into()));
    }
    let dir = cfg.out_dir();
    prepare_out_dir(&dir)?;
    let mut report = Report::default();
    let spec = cfg.gate.spec();
    let budget = cfg.budget()?;
    let rates = cfg.rates()?;
    let target = target_unitary(&spec);
    let geometric = build_pulse(
        &ScenarioConfig {
            coeffs: Vec::new(),
            ..cfg.clone()
        },
        &spec,
        &budget,
    )?;
    let optimized = if cfg.coeffs.is_empty() {
        None
    } else {
        Some(build_pulse(cfg, &spec, &budget)?)
    };
    let (comparator, comparator_target) = dynamical_comparator(&spec, &budget)?;
    let mut variants = vec![ScanVariant {
        name: "geometric".into(),
        drive: &geometric,
        target: target.clone(),
    }];
    if let Some(p) = &optimized {
        variants.push(ScanVariant {
            name: "optimized".into(),
            drive: p,
            target: target.clone(),
        });
    }
    variants.push(ScanVariant {
        name: "dynamical".into(),
        drive: &comparator,
        target: comparator_target,
    });
    let result = robustness_scan(
        &variants,
        cfg.scan.axis,
        cfg.scan.points,
        cfg.scan.range,
        &rates,
        budget.omega0,
        &cfg.fidelity_settings(),
    )?;
    write(
        &dir,
        format!("scan_{}_{}.csv", cfg.gate.label(), axis_name(cfg.scan.axis)),
        &export::scan_csv(&result),
        &mut report,
    )?;
    for (name, curve) in result.names.iter().zip(&result.fidelities) {
        let lo = curve.first().copied().unwrap_or(f64::NAN);
        let hi = curve.last().copied().unwrap_or(f64::NAN);
        report.fact(&format!("{name}_at_min"), format!("{lo:.8}"));
        report.fact(&format!("{name}_at_max"), format!("{hi:.8}"));
    }
    Ok(report)
}

fn two_qubit_model(cfg: &ScenarioConfig) -> TwoQubitModel {
    match cfg.model {
        ModelKind::TwoQubitEffective => TwoQubitModel::Effective,
        _ => TwoQubitModel::Full,
    }
}

pub fn two_qubit(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let dir = cfg.out_dir();
    prepare_out_dir(&dir)?;
    let mut report = Report::default();
    let model = two_qubit_model(cfg);
    let model_name = match model {
        TwoQubitModel::Full => "full",
        TwoQubitModel::Effective => "effective",
    };
    let gamma = cfg.pair.gamma_prime;
    if gamma == 0.0 {
        // no loop to traverse: the gate is the identity and nothing is driven
        let summary = format!(
            "model,gamma_prime,tau_ns,fidelity\n{model_name},{},{},{}\n",
            export::num(0.0),
            export::num(0.0),
            export::num(1.0)
        );
        write(
            &dir,
            format!("two_qubit_{model_name}_summary.csv"),
            &summary,
            &mut report,
        )?;
        report.fact("tau_ns", fmt(0.0));
        report.fact("fidelity", format!("{:.8}", 1.0));
        return Ok(report);
    }
    let pair = cfg.pair.transmons();
    let drive = if cfg.coeffs.is_empty() {
        two_qubit_drive(pair, cfg.pair.g_prime_max(), gamma, cfg.seed)?.0
    } else {
        let spec = PathSpec::pole_start(gamma)?;
        let pulse = build_pulse(cfg, &spec, &AmplitudeBudget::new(cfg.pair.g_prime_max())?)?;
        TwoQubitDrive::new(pulse, pair)?
    };
    let rates = cfg.rates()?;
    let settings = cfg.fidelity_settings();
    let fidelity = two_qubit_gate_fidelity(&drive, model, &rates, &settings)?;

    let q = qubit_state(cfg);
    let mut psi = vec![Complex64::new(0.0, 0.0); 9];
    for (k, &idx) in TWO_QUBIT_COMPUTATIONAL.iter().enumerate() {
        psi[idx] = q[k / 2] * q[k % 2];
    }
    let trace = two_qubit_dynamics(
        &drive,
        model,
        &rates,
        cfg.collapse,
        &psi,
        &settings.integrator,
        cfg.record_stride,
    )?;
    let labels = ["00", "01", "02", "10", "11", "12", "20", "21", "22"];
    write(
        &dir,
        "two_qubit_drive.csv".into(),
        &export::two_qubit_drive_csv(&drive),
        &mut report,
    )?;
    write(
        &dir,
        format!("two_qubit_{model_name}_trace.csv"),
        &export::trace_csv(&trace, Some(&labels)),
        &mut report,
    )?;
    let summary = format!(
        "model,gamma_prime,tau_ns,fidelity\n{model_name},{},{},{}\n",
        export::num(gamma),
        export::num(drive.duration()),
        export::num(fidelity)
    );
    write(
        &dir,
        format!("two_qubit_{model_name}_summary.csv"),
        &summary,
        &mut report,
    )?;
    report.fact("tau_ns", fmt(drive.duration()));
    report.fact("fidelity", format!("{fidelity:.8}"));
    Ok(report)
}

pub fn optimize_cmd(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let dir = cfg.out_dir();
    prepare_out_dir(&dir)?;
    let mut report = Report::default();
    let problem = cfg.optimization_problem()?;
    let result = optimize(&problem)?;
    let label = cfg.gate.label();
    write(
        &dir,
        format!("optimize_{label}.csv"),
        &export::optimization_csv(&label, &result),
        &mut report,
    )?;
    write(
        &dir,
        format!("optimize_{label}_history.csv"),
        &export::history_csv(&result),
        &mut report,
    )?;
    report.fact("tau_ns", fmt(result.tau));
    report.fact("baseline_tau_ns", fmt(result.baseline_tau));
    let coeffs: Vec<String> = result.coeffs.iter().map(|a| format!("{a:.6}")).collect();
    report.fact("coeffs", coeffs.join(","));
    Ok(report)
}
