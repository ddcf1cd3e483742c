use num_complex::Complex64;

use twm_core::adiabatic::{Branch, Process, ProcessKind};
use twm_core::bloch_geometry::{
    gen_bloch, geodesic_check, reduce_to_linear, Reduction, WeightTriple,
};
use twm_core::coupled_wave::{integrate, Envelope, MrConstants, SimOptions};
use twm_core::integrate::linspace;
use twm_core::linear_twolevel::{bloch_map, integrate_linear, LinearKind, TwoLevelState};
use twm_core::profile::MismatchProfile;
use twm_core::Sign;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn opts() -> SimOptions {
    SimOptions::with_tolerances(1e-12, 1e-14)
}

#[test]
fn weak_depletion_matches_linear_bloch_vector() {
    let pump = 1e3;
    let dgamma = 700.0;
    let profile = MismatchProfile::constant(dgamma);
    let grid = linspace(0.0, 4e-3, 201);
    let env0 = Envelope::new(c(pump), c(1.0), c(0.0));
    let full = integrate(&env0, &profile, &grid, &opts()).unwrap();

    // (A_i, A_s) = (A3, A2) in the frame co-rotating with the pump.
    let psi0 = TwoLevelState::new(c(0.0), c(1.0));
    let lin = integrate_linear(
        &psi0,
        LinearKind::Hermitian,
        2.0 * pump,
        &profile,
        &grid,
        &opts(),
    )
    .unwrap();

    let red = reduce_to_linear(&WeightTriple::LINEAR_BLOCH);
    assert_eq!(red, Reduction::LinearBloch);
    let mut worst: f64 = 0.0;
    let mut depletion: f64 = 0.0;
    for (f, l) in full.samples.iter().zip(&lin.samples) {
        let a1 = f.env.a1.norm();
        depletion = depletion.max(1.0 - a1 * a1 / (pump * pump));
        let img = red
            .linear_image(&gen_bloch(&f.env, &WeightTriple::LINEAR_BLOCH), a1)
            .unwrap();
        let want = l.bloch;
        for (x, y) in img.as_array().iter().zip(want.as_array()) {
            worst = worst.max((x - y).abs());
        }
    }
    assert!(depletion < 1e-6, "depletion {depletion}");
    assert!(worst < 1e-4, "deviation {worst}");
}

#[test]
fn pseudo_bloch_image_stays_on_hyperboloid() {
    // OPA: strong pump A3, weak signal/idler pair.
    let env0 = Envelope::new(c(0.1), c(1.0), c(30.0));
    let profile = MismatchProfile::linear(-4.0, 5.0);
    let grid = linspace(0.0, 1.0, 101);
    let full = integrate(&env0, &profile, &grid, &opts()).unwrap();
    let red = reduce_to_linear(&WeightTriple::PSEUDO_BLOCH);
    let k3 = 0.01 - 1.0;
    for s in &full.samples {
        let v = gen_bloch(&s.env, &WeightTriple::PSEUDO_BLOCH);
        let img = red.linear_image(&v, s.env.a3.norm()).unwrap();
        assert!(
            (img.hyperboloid_invariant() - k3 * k3).abs() < 1e-8,
            "{} {}",
            img.hyperboloid_invariant(),
            k3 * k3
        );
    }
    let psi = TwoLevelState::new(env0.a1, env0.a2.conj());
    let lin = bloch_map(&psi, LinearKind::Opa);
    let img = red
        .linear_image(&gen_bloch(&env0, &WeightTriple::PSEUDO_BLOCH), 30.0)
        .unwrap();
    assert!((lin.u - img.u).abs() < 1e-12 && (lin.v - img.v).abs() < 1e-12);
}

#[test]
fn diabatic_sweep_leaves_the_generatrix() {
    let p = Process::new(ProcessKind::Sfg, MrConstants::new(10.0, 1.0)).unwrap();
    let rate = 100.0;
    let profile = MismatchProfile::linear(rate, 9.0 / rate);
    let grid = linspace(0.0, 18.0 / rate, 401);
    let st = p
        .stationary_state(Branch::Plus, profile.value(0.0), Sign::Plus, None)
        .unwrap();
    let traj = integrate(&p.envelope(st).unwrap(), &profile, &grid, &opts()).unwrap();
    let pts: Vec<_> = traj
        .samples
        .iter()
        .map(|s| gen_bloch(&s.env, &WeightTriple::LINEAR_BLOCH))
        .collect();
    let dev = geodesic_check(&pts, 0.0, 0.05).unwrap();
    assert!(dev > 0.5, "deviation {dev}");
}

#[test]
fn amplifier_scenario_amplifies_signal() {
    let p = Process::new(ProcessKind::Opa, MrConstants::new(10.0, 11.0)).unwrap();
    let profile = MismatchProfile::linear(-4.0, 5.0);
    let grid = linspace(0.0, 10.0, 1001);
    let st = p
        .stationary_state(Branch::Minus, profile.value(0.0), Sign::Plus, None)
        .unwrap();
    let env0 = p.envelope(st).unwrap();
    let i0 = env0.intensities();
    assert!((i0[2] / i0[1] - 10.0).abs() < 0.5, "{i0:?}");
    let traj = integrate(&env0, &profile, &grid, &SimOptions::default()).unwrap();
    let last = traj.last().unwrap().intensities;
    assert!(last[1] / i0[1] > 9.0, "gain {}", last[1] / i0[1]);
    assert!(last[0] / 10.0 > 0.95);
}

#[test]
fn difference_frequency_branch_converts() {
    let p = Process::new(ProcessKind::Dfg, MrConstants::new(1.0, 10.0)).unwrap();
    let profile = MismatchProfile::linear(3.0, 3.0);
    let grid = linspace(0.0, 6.0, 601);
    let ad = p
        .adiabatic_trajectory(&profile, &grid, Branch::Plus, Sign::Plus)
        .unwrap();
    assert!(ad.breakdown.is_none());
    let st = p
        .stationary_state(Branch::Plus, profile.value(0.0), Sign::Plus, None)
        .unwrap();
    let traj = integrate(
        &p.envelope(st).unwrap(),
        &profile,
        &grid,
        &SimOptions::default(),
    )
    .unwrap();
    let eff = traj.last().unwrap().intensities[2] / 1.0;
    let ad_eff = ad.samples.last().unwrap().intensities[2];
    assert!(ad_eff > 0.9, "{ad_eff} {eff}");
    assert!((eff - ad_eff).abs() < 0.05, "{eff} vs {ad_eff}");
}
