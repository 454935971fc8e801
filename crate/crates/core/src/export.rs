//! CSV rendering with a fixed number format, so reruns are byte-identical.

use crate::dynamics::TwoQubitDrive;
use crate::fidelity::{FidelityTrace, ScanAxis, ScanResult};
use crate::optimizer::OptimizationResult;
use crate::pulse::DrivePulse;

/// Twelve significant digits in scientific notation.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0.00000000000e0"
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let row: Vec<String> = cells.into_iter().collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Generic numeric table.
pub fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    push_row(&mut out, header.iter().map(|s| s.to_string()));
    for r in rows {
        push_row(&mut out, r.into_iter().map(num));
    }
    out
}

/// Columns: time, detuning, envelope, phase and the DRAG-corrected envelope
/// (equal to the plain envelope when no correction was applied).
pub fn pulse_csv(pulse: &DrivePulse) -> String {
    let header = [
        "t_ns",
        "delta_rad_per_ns",
        "omega_s_rad_per_ns",
        "phase_rad",
        "drag_re_rad_per_ns",
        "drag_im_rad_per_ns",
    ];
    let rows = (0..pulse.times.len()).map(|i| {
        let (re, im) = match &pulse.drag {
            Some(d) => (d.envelope[i].re, d.envelope[i].im),
            None => (pulse.envelope[i], 0.0),
        };
        vec![
            pulse.times[i],
            pulse.detuning[i],
            pulse.envelope[i],
            pulse.phase[i],
            re,
            im,
        ]
    });
    table(&header, rows)
}

/// Columns: time, one population per level (`p0`, `p1`, … or the given
/// labels), and the fidelity.
pub fn trace_csv(trace: &FidelityTrace, labels: Option<&[&str]>) -> String {
    let levels = trace.populations.first().map_or(0, |p| p.len());
    let mut header = vec!["t_ns".to_string()];
    for k in 0..levels {
        let name = labels
            .and_then(|l| l.get(k))
            .map_or_else(|| k.to_string(), |s| s.to_string());
        header.push(format!("p{name}"));
    }
    header.push("fidelity".into());
    let mut out = String::new();
    push_row(&mut out, header);
    for (i, t) in trace.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(trace.populations[i].iter().map(|p| num(*p)));
        row.push(num(trace.fidelity[i]));
        push_row(&mut out, row);
    }
    out
}

/// Columns: the error value(s), then one fidelity column per variant.
pub fn scan_csv(scan: &ScanResult) -> String {
    let mut header = match scan.axis {
        ScanAxis::EpsilonX => vec!["epsilon".to_string()],
        ScanAxis::DeltaZ => vec!["delta".to_string()],
        ScanAxis::Grid2D => vec!["epsilon".to_string(), "delta".to_string()],
    };
    header.extend(scan.names.iter().map(|n| format!("fidelity_{n}")));
    let mut out = String::new();
    push_row(&mut out, header);
    for (p, e) in scan.points.iter().enumerate() {
        let mut row = match scan.axis {
            ScanAxis::EpsilonX => vec![num(e.epsilon)],
            ScanAxis::DeltaZ => vec![num(e.delta)],
            ScanAxis::Grid2D => vec![num(e.epsilon), num(e.delta)],
        };
        row.extend(scan.fidelities.iter().map(|f| num(f[p])));
        push_row(&mut out, row);
    }
    out
}

/// One row: gate, coefficients, duration.
pub fn optimization_csv(gate: &str, result: &OptimizationResult) -> String {
    let mut header = vec!["gate".to_string()];
    header.extend((1..=result.coeffs.len()).map(|k| format!("a{k}")));
    header.push("tau_ns".into());
    let mut out = String::new();
    push_row(&mut out, header);
    let mut row = vec![gate.to_string()];
    row.extend(result.coeffs.iter().map(|a| num(*a)));
    row.push(num(result.tau));
    push_row(&mut out, row);
    out
}

/// Every objective evaluation, in order.
pub fn history_csv(result: &OptimizationResult) -> String {
    let n = result.coeffs.len();
    let mut out = String::new();
    let mut header = vec!["start".to_string()];
    header.extend((1..=n).map(|k| format!("a{k}")));
    header.push("tau_ns".into());
    push_row(&mut out, header);
    for e in &result.history {
        let mut row = vec![e.start.to_string()];
        row.extend(e.coeffs.iter().map(|a| num(*a)));
        row.push(if e.tau.is_finite() { num(e.tau) } else { "inf".into() });
        push_row(&mut out, row);
    }
    out
}

/// Modulation samples of a two-qubit drive.
pub fn two_qubit_drive_csv(drive: &TwoQubitDrive) -> String {
    let header = [
        "t_ns",
        "eta",
        "nu_rad_per_ns",
        "varphi_rad",
        "g_prime_rad_per_ns",
        "delta_prime_rad_per_ns",
    ];
    let rows = (0..drive.times.len()).map(|i| {
        vec![
            drive.times[i],
            drive.eta[i],
            drive.nu[i],
            drive.varphi[i],
            drive.g_prime[i],
            drive.delta_prime[i],
        ]
    });
    table(&header, rows)
}
