use dicke_rap::propagator::propagate_to_end;
use dicke_rap::{
    dicke_protocol, dicke_state, fidelity, initial_state, IntegratorSettings, SpinSystem,
};

fn fig2_fidelity(omega_max: f64, settings: &IntegratorSettings) -> f64 {
    let system = SpinSystem::new(10).unwrap();
    let schedule = dicke_protocol(&system, 0.1, omega_max, 0).unwrap();
    let out = propagate_to_end(&system, &schedule, &initial_state(&system), settings).unwrap();
    fidelity(&out, &dicke_state(system, 0).unwrap()).unwrap()
}

#[test]
fn result_is_converged_in_tolerance() {
    let base = IntegratorSettings::default();
    let tighter = IntegratorSettings {
        rtol: base.rtol / 2.0,
        atol: base.atol / 2.0,
        ..base
    };
    let a = fig2_fidelity(0.88, &base);
    let b = fig2_fidelity(0.88, &tighter);
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn stronger_coupling_is_more_adiabatic() {
    let st = IntegratorSettings::default();
    assert!(fig2_fidelity(0.88, &st) >= fig2_fidelity(0.4, &st));
}

#[test]
fn passage_reaches_every_dicke_target() {
    let system = SpinSystem::new(6).unwrap();
    let st = IntegratorSettings::default();
    for target in 0..3 {
        let schedule = dicke_protocol(&system, 0.1, 0.88, target).unwrap();
        let out = propagate_to_end(&system, &schedule, &initial_state(&system), &st).unwrap();
        let f = fidelity(&out, &dicke_state(system, target).unwrap()).unwrap();
        assert!(f > 0.99, "target {target}: {f}");
    }
}
