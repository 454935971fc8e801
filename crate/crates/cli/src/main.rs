use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shortpath::fidelity::ScanAxis;
use shortpath::pulse::CatalogGate;
use shortpath::units::rad_per_ns_to_mhz;
use shortpath_cli::commands::{self, prepare_out_dir, Report};
use shortpath_cli::config::{GateChoice, ModelKind};
use shortpath_cli::manifest::Manifest;
use shortpath_cli::{init_pool, thread_count, CliError, ScenarioConfig};
use shortpath_validation::{self as acceptance, CRITERIA};

#[derive(Parser)]
#[command(
    name = "shortpath",
    version,
    about = "Shortest-path geometric gates: pulses, fidelities, scans"
)]
struct Cli {
    /// Scenario file (JSON); frequencies in MHz, times in ns.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Integrator step, ns.
    #[arg(long, global = true, allow_hyphen_values = true)]
    dt: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pulse and write its waveform.
    Synth(Overrides),
    /// Average fidelity and a fidelity/population trace for one gate.
    Simulate(Overrides),
    /// Fidelity against Rabi or detuning error, geometric vs dynamical.
    Scan(Overrides),
    /// Control-phase gate on two coupled transmons.
    TwoQubit(Overrides),
    /// Search schedule coefficients for the shortest gate.
    Optimize(Overrides),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Args, Default)]
struct Overrides {
    /// pi8, phase or hadamard.
    #[arg(long)]
    gate: Option<CatalogGate>,
    /// Schedule coefficients a1,a2,...
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    /// Amplitude budget, rad/ns.
    #[arg(long)]
    omega0: Option<f64>,
    /// two_level, three_level, two_qubit_full or two_qubit_effective.
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    /// Apply the DRAG correction.
    #[arg(long)]
    drag: bool,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Disable decay and dephasing.
    #[arg(long)]
    closed: bool,
    /// epsilon, delta or grid.
    #[arg(long, value_parser = parse_axis)]
    axis: Option<ScanAxis>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    range: Option<f64>,
    /// Conditional phase of the two-qubit gate, rad.
    #[arg(long, allow_hyphen_values = true)]
    gamma_prime: Option<f64>,
    #[arg(long)]
    starts: Option<usize>,
    /// Reject the run unless halving dt changes fidelities by < 1e-6.
    #[arg(long)]
    check_convergence: bool,
}

#[derive(Args)]
struct AcceptArgs {
    /// Criteria to run (default: all).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u8>>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown model {s:?}"))
}

fn parse_axis(s: &str) -> Result<ScanAxis, String> {
    match s {
        "epsilon" | "epsilon_x" => Ok(ScanAxis::EpsilonX),
        "delta" | "delta_z" => Ok(ScanAxis::DeltaZ),
        "grid" | "grid_2d" => Ok(ScanAxis::Grid2D),
        _ => Err(format!("unknown axis {s:?}")),
    }
}

fn apply(cfg: &mut ScenarioConfig, o: &Overrides) {
    if let Some(g) = o.gate {
        cfg.gate = GateChoice::Catalog(g);
    }
    if let Some(c) = &o.coeffs {
        cfg.coeffs = c.clone();
    }
    if let Some(w) = o.omega0 {
        cfg.omega0_mhz = rad_per_ns_to_mhz(w);
    }
    if let Some(m) = o.model {
        cfg.model = m;
    }
    if o.drag {
        cfg.drag = Some(true);
    }
    if let Some(e) = o.epsilon {
        cfg.errors.epsilon = e;
    }
    if let Some(d) = o.delta {
        cfg.errors.delta = d;
    }
    if o.closed {
        cfg.decay_mhz = 0.0;
        cfg.dephase_mhz = 0.0;
    }
    if let Some(a) = o.axis {
        cfg.scan.axis = a;
    }
    if let Some(n) = o.points {
        cfg.scan.points = n;
    }
    if let Some(r) = o.range {
        cfg.scan.range = r;
    }
    if let Some(g) = o.gamma_prime {
        cfg.pair.gamma_prime = g;
    }
    if let Some(s) = o.starts {
        cfg.optimizer.starts = s;
    }
    if o.check_convergence {
        cfg.convergence_check = true;
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(dt) = cli.dt {
        cfg.dt_ns = dt;
    }
    let (name, overrides) = match &cli.command {
        Command::Synth(o) => ("synth", Some(o)),
        Command::Simulate(o) => ("simulate", Some(o)),
        Command::Scan(o) => ("scan", Some(o)),
        Command::TwoQubit(o) => ("two-qubit", Some(o)),
        Command::Optimize(o) => ("optimize", Some(o)),
        Command::Accept(_) => ("accept", None),
    };
    if let Some(o) = overrides {
        apply(&mut cfg, o);
    }
    cfg.validate()?;
    let threads = init_pool(thread_count(&cfg)?);

    let report = match &cli.command {
        Command::Synth(_) => commands::synth(&cfg)?,
        Command::Simulate(_) => commands::simulate(&cfg)?,
        Command::Scan(_) => commands::scan(&cfg)?,
        Command::TwoQubit(_) => commands::two_qubit(&cfg)?,
        Command::Optimize(_) => commands::optimize_cmd(&cfg)?,
        Command::Accept(a) => accept(&cfg, a.only.as_deref().unwrap_or(&CRITERIA))?,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let dir = cfg.out_dir();
    let manifest = Manifest::new(&name.replace('-', "_"), &cfg, threads, report.outputs.clone());
    let manifest_name = manifest.write(&dir)?;
    for (k, v) in &report.facts {
        println!("{k}={v}");
    }
    for f in report.outputs.iter().chain(std::iter::once(&manifest_name)) {
        println!("wrote {}", dir.join(f).display());
    }
    let failed = report.get("failed").and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    if failed > 0 {
        return Err(CliError::AcceptanceFailed {
            failed,
            total: report.get("total").and_then(|v| v.parse().ok()).unwrap_or(0),
        });
    }
    Ok(())
}

fn accept(cfg: &ScenarioConfig, ids: &[u8]) -> Result<Report, CliError> {
    let dir = cfg.out_dir();
    prepare_out_dir(&dir)?;
    let outcomes = acceptance::run_many(ids, |o| println!("{o}"))?;
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    std::fs::write(dir.join("acceptance.csv"), acceptance::csv(&outcomes))?;
    Ok(Report {
        outputs: vec!["acceptance.csv".into()],
        facts: vec![
            ("passed".into(), (outcomes.len() - failed).to_string()),
            ("failed".into(), failed.to_string()),
            ("total".into(), outcomes.len().to_string()),
        ],
        warnings: Vec::new(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
