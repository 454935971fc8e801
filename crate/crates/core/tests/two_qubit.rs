use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::sync::OnceLock;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use shortpath::bessel::j1;
use shortpath::dynamics::{
    evolve_states, jacobi_anger_sideband, propagate_unitary, two_qubit_index, CollapseOperators, CoupledTransmons,
    DecoherenceRates, Hamiltonian, IntegratorOptions, TwoLevel, TwoQubitDrive, TwoQubitEffective, TwoQubitFull,
    TWO_QUBIT_02, TWO_QUBIT_11, TWO_QUBIT_COMPUTATIONAL,
};
use shortpath::fidelity::{two_qubit_dynamics, TwoQubitModel};
use shortpath::linalg::{frobenius, phase_aligned_distance, unitarity_error};
use shortpath::optimizer::two_qubit_drive;
use shortpath::pulse::{synthesize_catalog, AmplitudeBudget, CatalogGate};

fn drive() -> &'static TwoQubitDrive {
    static DRIVE: OnceLock<TwoQubitDrive> = OnceLock::new();
    DRIVE.get_or_init(|| {
        two_qubit_drive(
            CoupledTransmons::reference(),
            CoupledTransmons::reference_g_prime_max(),
            FRAC_PI_4,
            0,
        )
        .unwrap()
        .0
    })
}

#[test]
fn optimized_drive_duration() {
    let d = drive();
    assert!((d.duration() - 43.50).abs() < 0.5, "{}", d.duration());
    assert!(d.g_prime.iter().cloned().fold(0.0, f64::max) <= CoupledTransmons::reference_g_prime_max() * (1.0 + 1e-9));
}

#[test]
fn frequency_matching_holds_at_every_sample() {
    let d = drive();
    let p = d.pair;
    for (nu, dp) in d.nu.iter().zip(&d.delta_prime) {
        assert_eq!(*nu, dp + p.anh_b + p.delta);
    }
    for (eta, gp) in d.eta.iter().zip(&d.g_prime) {
        assert!((2.0 * SQRT_2 * p.g * j1(*eta) - gp).abs() < 1e-10);
        assert!(*eta >= 0.0 && *eta < 1.8412);
    }
}

#[test]
fn jacobi_anger_sideband_matches_modulation_amplitude() {
    let d = drive();
    for &eta in d.eta.iter().step_by(97) {
        assert_abs_diff_eq!(jacobi_anger_sideband(eta, 256), j1(eta), epsilon = 1e-6);
    }
}

#[test]
fn zero_coupling_gives_zero_hamiltonian() {
    let mut d = drive().clone();
    d.pair.g = 0.0;
    let h = TwoQubitFull { drive: &d }.matrix(10.0);
    assert!(frobenius(&h) == 0.0);
}

#[test]
fn without_modulation_only_bare_coupling_remains() {
    let budget = AmplitudeBudget::new(CoupledTransmons::reference_g_prime_max()).unwrap();
    let pulse = synthesize_catalog(CatalogGate::PiOver8, &[], &budget).unwrap();
    let d = TwoQubitDrive::new(pulse, CoupledTransmons::reference()).unwrap();
    // the envelope vanishes at t = 0, so η = 0 there
    let h = TwoQubitFull { drive: &d }.matrix(0.0);
    let p = d.pair;
    let i10 = two_qubit_index(1, 0);
    let i01 = two_qubit_index(0, 1);
    let i20 = two_qubit_index(2, 0);
    assert_abs_diff_eq!(h[(i10, i01)].re, p.g, epsilon = 1e-15);
    assert_abs_diff_eq!(h[(TWO_QUBIT_11, TWO_QUBIT_02)].re, SQRT_2 * p.g, epsilon = 1e-15);
    assert_abs_diff_eq!(h[(i20, TWO_QUBIT_11)].re, SQRT_2 * p.g, epsilon = 1e-15);
    let nonzero = h.iter().filter(|z| z.norm() > 0.0).count();
    assert_eq!(nonzero, 6);
}

#[test]
fn effective_block_has_single_qubit_form() {
    let d = drive();
    let eff = TwoQubitEffective { drive: &d.pulse };
    for t in [1.0, 20.0, 40.0] {
        let b = eff.block(t);
        let single = TwoLevel::new(&d.pulse).matrix(t);
        assert!(frobenius(&(b - single)) < 1e-15);
    }
}

#[test]
fn effective_model_imprints_the_phase_on_11() {
    let d = drive();
    let u = propagate_unitary(&TwoQubitEffective { drive: &d.pulse }, &IntegratorOptions::default()).unwrap();
    assert!(unitarity_error(&u) < 1e-9);
    let phase = u[(TWO_QUBIT_11, TWO_QUBIT_11)];
    assert_abs_diff_eq!(phase.norm(), 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(phase.arg(), -FRAC_PI_4, epsilon = 1e-6);
    for i in [0, 1, 3] {
        assert!((u[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

fn population_deviation(pair: CoupledTransmons) -> f64 {
    let d = two_qubit_drive(pair, CoupledTransmons::reference_g_prime_max(), FRAC_PI_4, 0)
        .unwrap()
        .0;
    let opts = IntegratorOptions::default();
    let mut psi = DMatrix::zeros(9, 1);
    psi[(TWO_QUBIT_11, 0)] = Complex64::new(1.0, 0.0);
    let (_, full) = evolve_states(&TwoQubitFull { drive: &d }, &psi, &opts, 200).unwrap();
    let (_, eff) = evolve_states(&TwoQubitEffective { drive: &d.pulse }, &psi, &opts, 200).unwrap();
    assert_eq!(full.len(), eff.len());
    // peak transfer to |02⟩ is substantial, so the comparison is not vacuous
    let peak = eff.iter().map(|e| e[(TWO_QUBIT_02, 0)].norm_sqr()).fold(0.0, f64::max);
    assert!(peak > 0.1);
    let mut worst: f64 = 0.0;
    for (f, e) in full.iter().zip(&eff) {
        for idx in [TWO_QUBIT_11, TWO_QUBIT_02] {
            worst = worst.max((f[(idx, 0)].norm_sqr() - e[(idx, 0)].norm_sqr()).abs());
        }
    }
    worst
}

#[test]
fn full_model_populations_converge_to_effective_model() {
    // the residual comes from off-resonant sidebands and falls off as 1/Δ;
    // a frequency-matching error would not
    let base = CoupledTransmons::reference();
    let mut devs = Vec::new();
    for scale in [1.0, 3.0, 10.0] {
        let mut pair = base;
        pair.delta *= scale;
        devs.push(population_deviation(pair));
    }
    assert!(devs[0] < 5e-2, "{devs:?}");
    assert!(devs[1] < 2e-2, "{devs:?}");
    assert!(devs[2] < 1e-2, "{devs:?}");
    assert!(devs[0] * 3.0 > devs[1] * 2.0 && devs[1] > devs[2], "{devs:?}");
}

#[test]
fn full_model_imprints_the_phase_on_11() {
    let d = drive();
    let u = propagate_unitary(&TwoQubitFull { drive: d }, &IntegratorOptions::default()).unwrap();
    let u = d.frame_correction() * u;
    let comp = [0usize, 1, 3, 4];
    let mut sub = DMatrix::zeros(4, 4);
    for (r, &i) in comp.iter().enumerate() {
        for (c, &j) in comp.iter().enumerate() {
            sub[(r, c)] = u[(i, j)];
        }
    }
    let mut target = DMatrix::identity(4, 4);
    target[(3, 3)] = Complex64::from_polar(1.0, -FRAC_PI_4);
    let dist = phase_aligned_distance(&sub, &target);
    assert!(dist < 0.1, "{dist}");
    let rel = sub[(3, 3)] / sub[(0, 0)];
    assert!((rel.arg() + FRAC_PI_4).abs() < 0.1, "{}", rel.arg());
    assert!(rel.norm() > 0.98);
}

#[test]
fn full_model_trace_follows_the_effective_reference() {
    let d = drive();
    let mut psi = vec![Complex64::new(0.0, 0.0); 9];
    for i in TWO_QUBIT_COMPUTATIONAL {
        psi[i] = Complex64::new(0.5, 0.0);
    }
    let opts = IntegratorOptions::default();
    let rates = DecoherenceRates::none();
    let eff = two_qubit_dynamics(
        d,
        TwoQubitModel::Effective,
        &rates,
        CollapseOperators::Qubit,
        &psi,
        &opts,
        500,
    )
    .unwrap();
    assert!(eff.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-9));
    let full = two_qubit_dynamics(
        d,
        TwoQubitModel::Full,
        &rates,
        CollapseOperators::Qubit,
        &psi,
        &opts,
        500,
    )
    .unwrap();
    assert_eq!(full.times, eff.times);
    assert!((full.fidelity[0] - 1.0).abs() < 1e-12);
    let worst = full.fidelity.iter().cloned().fold(1.0, f64::min);
    assert!(worst > 0.95, "{worst}");
    assert!(*full.fidelity.last().unwrap() > 0.99);
}
