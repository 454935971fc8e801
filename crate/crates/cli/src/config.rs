//! Scenario files.
//!
//! One JSON object per file. Frequencies are ordinary frequencies in MHz and
//! are converted to rad/ns on load; times are in ns. Every field is optional.

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shortpath::bloch_path::PathSpec;
use shortpath::dynamics::{
    CollapseOperators, CoupledTransmons, DecoherenceRates, ErrorFractions, IntegratorOptions, TransmonParams,
    DEFAULT_DT,
};
use shortpath::fidelity::{
    FidelitySettings, ScanAxis, DEFAULT_SCAN_POINTS, DEFAULT_THETA_GRID_2Q, DEFAULT_THETA_POINTS,
};
use shortpath::optimizer::OptimizationProblem;
use shortpath::pulse::{AmplitudeBudget, CatalogGate};
use shortpath::units::mhz_to_rad_per_ns;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateChoice {
    Catalog(CatalogGate),
    Explicit(PathSpec),
}

impl GateChoice {
    pub fn spec(&self) -> PathSpec {
        match self {
            GateChoice::Catalog(g) => g.spec(),
            GateChoice::Explicit(s) => *s,
        }
    }

    /// Used in file names and CSV cells.
    pub fn label(&self) -> String {
        match self {
            GateChoice::Catalog(g) => g.name().to_string(),
            GateChoice::Explicit(s) => format!("custom_{:.6}", s.gamma_g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoLevel,
    ThreeLevel,
    TwoQubitFull,
    TwoQubitEffective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub axis: ScanAxis,
    pub points: usize,
    /// Largest |error fraction| on the axis.
    pub range: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            axis: ScanAxis::EpsilonX,
            points: DEFAULT_SCAN_POINTS,
            range: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub n_terms: usize,
    pub bounds: [f64; 2],
    pub monotone: bool,
    pub zero_endpoint_amplitude: bool,
    pub starts: usize,
    pub evals_per_start: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_terms: 3,
            bounds: [-0.2, 0.2],
            monotone: true,
            zero_endpoint_amplitude: true,
            starts: 16,
            evals_per_start: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairConfig {
    pub g_mhz: f64,
    pub delta_mhz: f64,
    pub anh_a_mhz: f64,
    pub anh_b_mhz: f64,
    pub g_prime_max_mhz: f64,
    /// Conditional phase, rad.
    pub gamma_prime: f64,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            g_mhz: 10.0,
            delta_mhz: 500.0,
            anh_a_mhz: 220.0,
            anh_b_mhz: 200.0,
            g_prime_max_mhz: 15.0,
            gamma_prime: FRAC_PI_4,
        }
    }
}

impl PairConfig {
    pub fn transmons(&self) -> CoupledTransmons {
        CoupledTransmons {
            g: mhz_to_rad_per_ns(self.g_mhz),
            delta: mhz_to_rad_per_ns(self.delta_mhz),
            anh_a: mhz_to_rad_per_ns(self.anh_a_mhz),
            anh_b: mhz_to_rad_per_ns(self.anh_b_mhz),
        }
    }

    pub fn g_prime_max(&self) -> f64 {
        mhz_to_rad_per_ns(self.g_prime_max_mhz)
    }
}

/// Qubit state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`; the two-qubit commands
/// use the product of this state with itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialState {
    pub theta: f64,
    pub phi: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Free-form note; conventionally states the units.
    pub units: String,
    pub gate: GateChoice,
    pub model: ModelKind,
    pub omega0_mhz: f64,
    pub decay_mhz: f64,
    pub dephase_mhz: f64,
    pub anharmonicity_mhz: f64,
    /// DRAG correction of the three-level drive. Defaults to on for the
    /// three-level model.
    pub drag: Option<bool>,
    pub errors: ErrorFractions,
    pub coeffs: Vec<f64>,
    pub scan: ScanConfig,
    pub optimizer: OptimizerConfig,
    pub pair: PairConfig,
    pub dt_ns: f64,
    pub convergence_check: bool,
    pub theta_points: usize,
    pub theta_grid_2q: usize,
    pub collapse: CollapseOperators,
    pub initial_state: InitialState,
    pub record_stride: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            units: "frequencies in MHz, times in ns, angles in rad".into(),
            gate: GateChoice::Catalog(CatalogGate::PiOver8),
            model: ModelKind::TwoLevel,
            omega0_mhz: 30.0,
            decay_mhz: 0.003,
            dephase_mhz: 0.003,
            anharmonicity_mhz: 220.0,
            drag: None,
            errors: ErrorFractions::default(),
            coeffs: Vec::new(),
            scan: ScanConfig::default(),
            optimizer: OptimizerConfig::default(),
            pair: PairConfig::default(),
            dt_ns: DEFAULT_DT,
            convergence_check: false,
            theta_points: DEFAULT_THETA_POINTS,
            theta_grid_2q: DEFAULT_THETA_GRID_2Q,
            collapse: CollapseOperators::Qubit,
            initial_state: InitialState::default(),
            record_stride: 100,
            seed: 0,
            threads: None,
            out_dir: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if !(self.omega0_mhz > 0.0) {
            return bad("omega0_mhz must be positive");
        }
        if !(self.decay_mhz >= 0.0 && self.dephase_mhz >= 0.0) {
            return bad("decoherence rates must be non-negative");
        }
        if !(self.anharmonicity_mhz > 0.0) {
            return bad("anharmonicity_mhz must be positive");
        }
        if !(self.dt_ns > 0.0) {
            return bad("dt_ns must be positive");
        }
        if self.theta_points < 2 || self.theta_grid_2q < 2 {
            return bad("theta grids need at least two points");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        if self.scan.points < 2 || !(self.scan.range > 0.0) {
            return bad("scan needs at least two points and a positive range");
        }
        if !(self.errors.epsilon.is_finite() && self.errors.delta.is_finite()) {
            return bad("error fractions must be finite");
        }
        if self.coeffs.iter().any(|a| !a.is_finite()) {
            return bad("coefficients must be finite");
        }
        Ok(())
    }

    pub fn budget(&self) -> Result<AmplitudeBudget, CliError> {
        Ok(AmplitudeBudget::from_mhz(self.omega0_mhz)?)
    }

    pub fn rates(&self) -> Result<DecoherenceRates, CliError> {
        Ok(DecoherenceRates::new(
            mhz_to_rad_per_ns(self.decay_mhz),
            mhz_to_rad_per_ns(self.dephase_mhz),
        )?)
    }

    pub fn transmon(&self) -> TransmonParams {
        TransmonParams {
            anharmonicity: mhz_to_rad_per_ns(self.anharmonicity_mhz),
        }
    }

    pub fn drag_enabled(&self) -> bool {
        self.drag.unwrap_or(self.model == ModelKind::ThreeLevel)
    }

    pub fn integrator(&self) -> IntegratorOptions {
        IntegratorOptions {
            dt: self.dt_ns,
            convergence_check: self.convergence_check,
        }
    }

    pub fn fidelity_settings(&self) -> FidelitySettings {
        FidelitySettings {
            theta_points: self.theta_points,
            theta_grid_2q: self.theta_grid_2q,
            integrator: self.integrator(),
            collapse: self.collapse,
        }
    }

    pub fn optimization_problem(&self) -> Result<OptimizationProblem, CliError> {
        let o = &self.optimizer;
        let mut p = OptimizationProblem::new(self.gate.spec(), self.budget()?);
        p.n_terms = o.n_terms;
        p.bounds = (o.bounds[0], o.bounds[1]);
        p.monotone = o.monotone;
        p.zero_endpoint_amplitude = o.zero_endpoint_amplitude;
        p.starts = o.starts;
        p.evals_per_start = o.evals_per_start;
        p.seed = self.seed;
        p.validate()?;
        Ok(p)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Canonical serialisation, hashed into the run manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}
