//! WebAssembly bindings for the static page in `www/`.
//!
//! Three operations are exposed: the drive waveform of a gate, its loop on
//! the Bloch sphere, and a robustness curve against the dynamical
//! comparator. Each has a plain Rust counterpart so it can be tested
//! natively.

use shortpath::bloch_path::{sample_trajectory, BetaSchedule, DEFAULT_GRID_POINTS};
use shortpath::dynamics::{DecoherenceRates, IntegratorOptions};
use shortpath::fidelity::{dynamical_comparator, robustness_scan, FidelitySettings, ScanAxis, ScanVariant};
use shortpath::pulse::{synthesize_catalog, target_unitary, AmplitudeBudget, CatalogGate};
use shortpath::units::khz_to_rad_per_ns;
use wasm_bindgen::prelude::*;

fn gate(name: &str) -> Result<CatalogGate, String> {
    name.parse().map_err(|e: shortpath::Error| e.to_string())
}

fn coeffs(a1: f64, a2: f64, a3: f64) -> Vec<f64> {
    if a1 == 0.0 && a2 == 0.0 && a3 == 0.0 {
        Vec::new()
    } else {
        vec![a1, a2, a3]
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct PulseView {
    tau: f64,
    times: Vec<f64>,
    envelope: Vec<f64>,
    detuning: Vec<f64>,
    phase: Vec<f64>,
}

#[wasm_bindgen]
impl PulseView {
    #[wasm_bindgen(getter)]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn envelope(&self) -> Vec<f64> {
        self.envelope.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn detuning(&self) -> Vec<f64> {
        self.detuning.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn phase(&self) -> Vec<f64> {
        self.phase.clone()
    }
}

/// Every `stride`-th sample plus the last one.
fn thin(v: &[f64], stride: usize) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().step_by(stride).copied().collect();
    if (v.len() - 1) % stride != 0 {
        out.push(*v.last().unwrap());
    }
    out
}

pub fn pulse_view(name: &str, a1: f64, a2: f64, a3: f64, omega0_mhz: f64) -> Result<PulseView, String> {
    let budget = AmplitudeBudget::from_mhz(omega0_mhz).map_err(|e| e.to_string())?;
    let p = synthesize_catalog(gate(name)?, &coeffs(a1, a2, a3), &budget).map_err(|e| e.to_string())?;
    let stride = 10;
    Ok(PulseView {
        tau: p.tau,
        times: thin(&p.times, stride),
        envelope: thin(&p.envelope, stride),
        detuning: thin(&p.detuning, stride),
        phase: thin(&p.phase, stride),
    })
}

#[wasm_bindgen(js_name = pulseCurves)]
pub fn pulse_curves(name: &str, a1: f64, a2: f64, a3: f64, omega0_mhz: f64) -> Result<PulseView, JsError> {
    pulse_view(name, a1, a2, a3, omega0_mhz).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct LoopView {
    points: Vec<f64>,
    geometric_phase: f64,
    length: f64,
}

#[wasm_bindgen]
impl LoopView {
    /// Bloch vectors as `x0, y0, z0, x1, …`.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    #[wasm_bindgen(getter, js_name = geometricPhase)]
    pub fn geometric_phase(&self) -> f64 {
        self.geometric_phase
    }

    #[wasm_bindgen(getter)]
    pub fn length(&self) -> f64 {
        self.length
    }
}

pub fn loop_view(name: &str, a1: f64, a2: f64, a3: f64, samples: usize) -> Result<LoopView, String> {
    let spec = gate(name)?.spec();
    let sched = BetaSchedule::new(spec.schedule_base(), coeffs(a1, a2, a3)).map_err(|e| e.to_string())?;
    let traj = sample_trajectory(&spec, &sched, DEFAULT_GRID_POINTS).map_err(|e| e.to_string())?;
    let stride = (DEFAULT_GRID_POINTS / samples.max(2)).max(1);
    let mut points = Vec::new();
    for (i, p) in traj.samples.iter().enumerate() {
        if i % stride == 0 || i + 1 == traj.samples.len() {
            points.extend_from_slice(&p.bloch_vector());
        }
    }
    Ok(LoopView {
        points,
        geometric_phase: traj.geometric_phase(),
        length: traj.path_length(),
    })
}

#[wasm_bindgen(js_name = blochLoop)]
pub fn bloch_loop(name: &str, a1: f64, a2: f64, a3: f64, samples: usize) -> Result<LoopView, JsError> {
    loop_view(name, a1, a2, a3, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct RobustnessView {
    errors: Vec<f64>,
    geometric: Vec<f64>,
    dynamical: Vec<f64>,
}

#[wasm_bindgen]
impl RobustnessView {
    #[wasm_bindgen(getter)]
    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn geometric(&self) -> Vec<f64> {
        self.geometric.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn dynamical(&self) -> Vec<f64> {
        self.dynamical.clone()
    }
}

/// `axis` is `"epsilon"` or `"delta"`; rates in kHz. A coarse state grid
/// and step keep this interactive.
pub fn robustness_view(name: &str, axis: &str, points: usize, rate_khz: f64) -> Result<RobustnessView, String> {
    let axis = match axis {
        "epsilon" => ScanAxis::EpsilonX,
        "delta" => ScanAxis::DeltaZ,
        other => return Err(format!("unknown axis '{other}'")),
    };
    let budget = AmplitudeBudget::reference();
    let p = synthesize_catalog(gate(name)?, &[], &budget).map_err(|e| e.to_string())?;
    let (cmp, cmp_target) = dynamical_comparator(&p.spec, &budget).map_err(|e| e.to_string())?;
    let rate = khz_to_rad_per_ns(rate_khz);
    let rates = DecoherenceRates::new(rate, rate).map_err(|e| e.to_string())?;
    let settings = FidelitySettings {
        theta_points: 201,
        integrator: IntegratorOptions::with_dt(0.01),
        ..FidelitySettings::default()
    };
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
    let scan =
        robustness_scan(&variants, axis, points, 0.1, &rates, budget.omega0, &settings).map_err(|e| e.to_string())?;
    let errors = scan
        .points
        .iter()
        .map(|e| if axis == ScanAxis::EpsilonX { e.epsilon } else { e.delta })
        .collect();
    Ok(RobustnessView {
        errors,
        geometric: scan.fidelities[0].clone(),
        dynamical: scan.fidelities[1].clone(),
    })
}

#[wasm_bindgen(js_name = robustnessCurve)]
pub fn robustness_curve(name: &str, axis: &str, points: usize, rate_khz: f64) -> Result<RobustnessView, JsError> {
    robustness_view(name, axis, points, rate_khz).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_view_is_thinned_and_ends_at_tau() {
        let v = pulse_view("pi8", 0.0, 0.0, 0.0, 30.0).unwrap();
        assert!((v.tau - 19.6667).abs() < 1e-3);
        assert_eq!(v.times.len(), 401);
        assert_eq!(*v.times.last().unwrap(), v.tau);
        assert_eq!(v.envelope.len(), v.times.len());
        assert!(v
            .envelope
            .iter()
            .all(|x| *x <= 2.0 * std::f64::consts::PI * 0.03 * (1.0 + 1e-9)));
    }

    #[test]
    fn loop_view_has_the_target_phase() {
        let v = loop_view("hadamard", 0.0, 0.0, 0.0, 200).unwrap();
        assert!((v.geometric_phase - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
        assert_eq!(v.points.len() % 3, 0);
        let first = &v.points[..3];
        let last = &v.points[v.points.len() - 3..];
        assert!(first.iter().zip(last).all(|(a, b)| (a - b).abs() < 1e-9));
        assert!(loop_view("nope", 0.0, 0.0, 0.0, 10).is_err());
    }

    #[test]
    fn robustness_view_peaks_at_zero_error() {
        let v = robustness_view("pi8", "delta", 5, 3.0).unwrap();
        let want = [-0.1, -0.05, 0.0, 0.05, 0.1];
        assert!(v.errors.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(v.geometric[2] > v.geometric[0] && v.geometric[2] > v.geometric[4]);
        assert!(v.geometric[0] > v.dynamical[0]);
        assert!(robustness_view("pi8", "sideways", 5, 3.0).is_err());
    }
}
