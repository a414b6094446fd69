mod support;

use dicke_rap::propagator::{hamiltonian, propagate};
use dicke_rap::{
    coherent_state, dicke_state, qfi, Axis, ChirpSchedule, CouplingSchedule, IntegratorSettings,
    Observable, Schedule, SpinState, SpinSystem, C64,
};
use nalgebra::DMatrix;
use support::{expm_propagate, phase_invariant_distance, ProductSpace};

fn column(op: impl Fn(&SpinState) -> Vec<C64>, system: SpinSystem) -> DMatrix<C64> {
    let d = system.dim();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for (j, m) in system.m_values().enumerate() {
        let v = op(&dicke_state(system, m).unwrap());
        for i in 0..d {
            out[(i, j)] = v[i];
        }
    }
    out
}

#[test]
fn operators_match_symmetric_projection() {
    for n in [2u32, 4] {
        let system = SpinSystem::new(n).unwrap();
        let ps = ProductSpace::new(n as usize);
        let sx = column(|s| s.apply_sx(), system);
        let sy = column(|s| s.apply_sy(), system);
        assert!((sx - ps.project(&ps.sx)).norm() < 1e-13, "Sx, N={n}");
        assert!((sy - ps.project(&ps.sy)).norm() < 1e-13, "Sy, N={n}");
        let sz = ps.project(&ps.sz);
        for (i, m) in system.m_values().enumerate() {
            assert!((sz[(i, i)] - C64::new(m.into(), 0.0)).norm() < 1e-13);
        }
    }
}

#[test]
fn hamiltonian_matches_product_space() {
    for n in [2u32, 4] {
        let system = SpinSystem::new(n).unwrap();
        let ps = ProductSpace::new(n as usize);
        for (beta, omega) in [(0.0, 0.0), (-1.3, 0.4), (2.5, 1.7)] {
            let full =
                &ps.sz * &ps.sz + &ps.sz * C64::new(beta, 0.0) + &ps.sx * C64::new(omega, 0.0);
            let projected = ps.project(&full);
            let op = hamiltonian(&system, beta, omega);
            let d = system.dim();
            let ours = DMatrix::from_fn(d, d, |i, j| {
                let v = if i == j {
                    op.diag()[i]
                } else if i + 1 == j {
                    op.off()[i]
                } else if j + 1 == i {
                    op.off()[j]
                } else {
                    0.0
                };
                C64::new(v, 0.0)
            });
            assert!((ours - &projected).norm() < 1e-12);

            let mut expected: Vec<f64> = projected
                .map(|c| c.re)
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            expected.sort_by(f64::total_cmp);
            let got = op.eigenvalues().unwrap();
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "N={n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn coherent_state_is_a_product_state() {
    for n in [2u32, 4] {
        let system = SpinSystem::new(n).unwrap();
        let ps = ProductSpace::new(n as usize);
        for (theta, phi) in [(0.3, 0.0), (1.2, 2.1), (2.9, -0.7)] {
            let product = ps.product_state(theta, phi);
            let ours = coherent_state(system, theta, phi);
            let d = phase_invariant_distance(ours.amplitudes(), &ps.to_dicke(&product));
            assert!(d < 1e-13, "N={n} theta={theta} phi={phi}: {d}");
            // The projection loses no weight: the product state is symmetric.
            let kept: f64 = ps.to_dicke(&product).iter().map(|a| a.norm_sqr()).sum();
            assert!((kept - 1.0).abs() < 1e-13);
        }
    }
}

#[test]
fn expectations_match_product_space() {
    let ps = ProductSpace::new(4);
    let system = SpinSystem::new(4).unwrap();
    let psi = coherent_state(system, 1.1, 0.6);
    let v = ps.product_state(1.1, 0.6);
    for (op, obs) in [
        (&ps.sx, Observable::Sx),
        (&ps.sy, Observable::Sy),
        (&ps.sz, Observable::Sz),
    ] {
        let full = v.dotc(&(op * &v)).re;
        assert!(
            (psi.expectation(obs).unwrap() - full).abs() < 1e-13,
            "{obs:?}"
        );
    }
    // Every coherent state sits at the standard quantum limit along any
    // axis orthogonal to its mean spin.
    let pole = coherent_state(system, 0.0, 0.0);
    assert!((qfi(&pole, Axis::X).unwrap() - 4.0).abs() < 1e-12);
}

fn matches_oracle(system: SpinSystem, schedule: &Schedule, initial: &SpinState) {
    let trace = propagate(
        &system,
        schedule,
        initial,
        &[schedule.t_end],
        &IntegratorSettings::default(),
    )
    .unwrap();
    let ours = trace.final_state().unwrap();
    let reference = expm_propagate(&system, schedule, initial, 1e-4);
    let d = phase_invariant_distance(ours.amplitudes(), &reference);
    assert!(d < 1e-6, "distance {d}");
    assert!(trace.max_norm_drift() < 1e-9);
}

#[test]
fn propagator_matches_exponential_oracle() {
    let two = SpinSystem::new(2).unwrap();
    let chirp = ChirpSchedule::new(1.0, 0.5).unwrap();
    let coupling = CouplingSchedule::new(1.2, -2.0, 1.0, 0.7, 1.1).unwrap();
    let schedule = Schedule::new(chirp, coupling, -3.5, 3.0).unwrap();
    matches_oracle(two, &schedule, &dicke_state(two, 1).unwrap());

    let four = SpinSystem::new(4).unwrap();
    let chirp = ChirpSchedule::new(1.7, -0.5).unwrap();
    let coupling = CouplingSchedule::new(0.8, -3.0, 0.0, 1.0, 1.5).unwrap();
    let schedule = Schedule::new(chirp, coupling, -4.5, 2.0).unwrap();
    matches_oracle(four, &schedule, &coherent_state(four, 0.9, 0.3));
}

#[test]
fn oracle_converges_on_a_known_exponential() {
    // With constant fields the oracle is exact for any step.
    let system = SpinSystem::new(4).unwrap();
    let op = hamiltonian(&system, 0.6, 0.9);
    let psi = coherent_state(system, 0.7, 0.2);
    let one = support::expm_apply(op.diag(), op.off(), psi.amplitudes(), 2.0);
    let mut many = psi.amplitudes().to_vec();
    for _ in 0..8 {
        many = support::expm_apply(op.diag(), op.off(), &many, 0.25);
    }
    assert!(phase_invariant_distance(&one, &many) < 1e-13);
}
