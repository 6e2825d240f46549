use std::sync::Arc;

use super::*;
use crate::levy_noise::{Atom, LevyModel, NoiseRealization, TimeGrid};
use crate::measure_metrics::{FlowData, MeasureFlow};
use crate::rng::{Purpose, SeedLineage};

fn zero_coeffs(dim: usize) -> FnCoefficients {
    FnCoefficients::new(dim, MeasureDependence::None, vec![0.0; dim * dim], |_, _, _, out| {
        out.iter_mut().for_each(|o| *o = 0.0)
    })
}

fn stable() -> LevyModel {
    LevyModel::isotropic_stable(1.5, 1).unwrap()
}

#[test]
fn zero_coefficients_leave_state_unchanged() {
    let state = EnsembleState {
        time: 0.0,
        dim: 1,
        positions: vec![1.0, -2.0],
    };
    let slice = NoiseSlice {
        dt: 0.1,
        small: vec![0.3, 0.4],
        drift: vec![0.0],
        jumps: vec![(1, vec![5.0])],
    };
    let next = step_particle_system(&state, &zero_coeffs(1), &slice).unwrap();
    assert_eq!(next.positions, state.positions);
}

#[test]
fn pure_noise_step() {
    let c = StableOuCoefficients::scalar(1, 0.0, 0.0);
    let state = EnsembleState {
        time: 0.0,
        dim: 1,
        positions: vec![1.0, -2.0],
    };
    let slice = NoiseSlice {
        dt: 0.1,
        small: vec![0.25, 0.5],
        drift: vec![0.0],
        jumps: vec![(1, vec![3.0])],
    };
    let next = step_particle_system(&state, &c, &slice).unwrap();
    assert_eq!(next.positions, vec![1.25, 1.5]);
}

#[test]
fn hand_euler_step_with_mean_drift() {
    let c = FnCoefficients::new(1, MeasureDependence::MeanOnly, vec![0.0], |_, _, m, out| out[0] = m[0]);
    let state = EnsembleState {
        time: 0.0,
        dim: 1,
        positions: vec![0.0, 2.0],
    };
    let slice = NoiseSlice {
        dt: 0.5,
        small: vec![0.0, 0.0],
        drift: vec![0.0],
        jumps: vec![],
    };
    let next = step_particle_system(&state, &c, &slice).unwrap();
    assert_eq!(next.positions, vec![0.5, 2.5]);
}

fn setup<'a>(model: &'a LevyModel, grid: &'a TimeGrid, xi: &'a InitialLaw, n: usize) -> EnsembleSetup<'a> {
    EnsembleSetup {
        model,
        grid,
        initial: xi,
        particles: n,
        master_seed: 17,
        replication: 3,
        placement: JumpPlacement::Snapped,
    }
}

#[test]
fn pure_noise_particles_equal_initial_plus_noise() {
    let m = stable();
    let g = TimeGrid::uniform(1.0, 20).unwrap();
    let xi = InitialLaw::Gaussian { mean: vec![1.0], sd: 1.0 };
    let paths = simulate_particle_system(&StableOuCoefficients::scalar(1, 0.0, 0.0), &setup(&m, &g, &xi, 5)).unwrap();
    for i in 0..5u64 {
        let lin = SeedLineage::new(17, i, 3);
        let mut x0 = [0.0];
        xi.sample(&mut lin.stream(Purpose::InitialCondition), &mut x0);
        let z = NoiseRealization::generate(&m, &g, lin, false).unwrap().path_at_nodes();
        for (k, s) in paths.states.iter().enumerate() {
            assert!((s.positions[i as usize] - (x0[0] + z[k])).abs() < 1e-12);
        }
    }
}

#[test]
fn single_particle_matches_reference_sde() {
    let m = stable();
    let g = TimeGrid::uniform(1.0, 25).unwrap();
    let xi = InitialLaw::PointMass { at: vec![0.5] };
    let c = StableOuCoefficients::scalar(1, -1.0, 0.0);
    let paths = simulate_particle_system(&c, &setup(&m, &g, &xi, 1)).unwrap();
    let noise = NoiseRealization::generate(&m, &g, SeedLineage::new(17, 0, 3), false).unwrap();
    let mut x = 0.5;
    let mut next = 0;
    for k in 0..g.steps() {
        x += -x * g.dt(k);
        x += noise.small_increment(k)[0];
        while next < noise.big_jumps().len() && noise.big_jumps()[next].time <= g.nodes()[k + 1] {
            x += noise.big_jumps()[next].size[0];
            next += 1;
        }
        assert_eq!(paths.states[k + 1].positions[0], x);
    }
}

#[test]
fn adapted_grid_holds_every_jump() {
    let m = stable();
    let g = TimeGrid::uniform(1.0, 10).unwrap();
    let xi = InitialLaw::PointMass { at: vec![0.0] };
    let mut s = setup(&m, &g, &xi, 20);
    s.placement = JumpPlacement::Adapted;
    let c = StableOuCoefficients::scalar(1, -1.0, 0.5);
    let run = Lockstep::new(&c, &s, &[SystemSpec::interacting()]).unwrap();
    assert!(run.grid().steps() > 10);
}

#[test]
fn coupling_vanishes_without_interaction() {
    let m = stable();
    let g = TimeGrid::uniform(1.0, 20).unwrap();
    let xi = InitialLaw::Gaussian { mean: vec![1.0], sd: 0.5 };
    let s = setup(&m, &g, &xi, 50);
    let flow = Arc::new(MeasureFlow::new(g.clone(), FlowData::Mean(vec![vec![123.0]; 21])).unwrap());
    let c = StableOuCoefficients::scalar(1, -0.5, 0.0);
    let out = simulate_coupled_limit_copies(&c, flow, &s).unwrap();
    assert!(out.coupling_sup.iter().all(|x| *x == 0.0));
    assert_eq!(out.bound_violations, 0);
}

#[test]
fn coupling_error_decreases_with_n() {
    let m = stable();
    let g = TimeGrid::uniform(1.0, 20).unwrap();
    let xi = InitialLaw::PointMass { at: vec![1.0] };
    let c = StableOuCoefficients::scalar(1, 0.0, 1.0);
    let flow = Arc::new(euler_mean_flow(&c, &[1.0], &m, &g).unwrap());
    let err = |n: usize| {
        let mut total = 0.0;
        for r in 0..20 {
            let mut s = setup(&m, &g, &xi, n);
            s.replication = r;
            let out = simulate_coupled_limit_copies(&c, flow.clone(), &s).unwrap();
            assert_eq!(out.bound_violations, 0);
            total += out.coupling_sup.iter().sum::<f64>() / n as f64;
        }
        total / 20.0
    };
    let (e16, e256) = (err(16), err(256));
    assert!(e16 > 0.0 && e256 < e16, "{e16} {e256}");
}

#[test]
fn mean_flow_examples() {
    let g = TimeGrid::uniform(1.0, 10).unwrap();
    let f = stable_ou_mean_flow(&[0.0], &[0.5], &[2.0], &g).unwrap();
    assert!((f.mean_at_node(10)[0] - 2.0 * 0.5f64.exp()).abs() < 1e-12);
    assert!((f.mean_at_node(10)[0] - 3.2974).abs() < 1e-4);
    let ode = crate::linalg::rk4(|_, y| vec![0.5 * y[0]], &[2.0], g.nodes());
    assert!((ode[10][0] - f.mean_at_node(10)[0]).abs() < 1e-6);
    let c = stable_ou_mean_flow(&[1.0], &[-1.0], &[2.0], &g).unwrap();
    assert!((0..=10).all(|k| c.mean_at_node(k) == vec![2.0]));
}

#[test]
fn euler_mean_flow_converges_to_closed_form() {
    let m = stable();
    let c = StableOuCoefficients::scalar(1, 0.0, 1.0);
    let fine = TimeGrid::uniform(1.0, 4000).unwrap();
    let e = euler_mean_flow(&c, &[1.0], &m, &fine).unwrap();
    assert!((e.mean_at_node(4000)[0] - 1f64.exp()).abs() < 1e-3);
    // asymmetric jumps push the mean
    let cp = LevyModel::compound_poisson(vec![Atom { jump: vec![2.0], rate: 0.5 }]).unwrap();
    let zero = StableOuCoefficients::scalar(1, 0.0, 0.0);
    let g = TimeGrid::uniform(1.0, 4).unwrap();
    let p = euler_mean_flow(&zero, &[0.0], &cp, &g).unwrap();
    assert!((p.mean_at_node(4)[0] - 1.0).abs() < 1e-12);
}

#[test]
fn explosive_drift_reports_blow_up() {
    let m = LevyModel::compound_poisson(vec![Atom { jump: vec![1.5], rate: 1.0 }]).unwrap();
    let g = TimeGrid::uniform(1.0, 50).unwrap();
    let xi = InitialLaw::PointMass { at: vec![10.0] };
    let c = FnCoefficients::new(1, MeasureDependence::None, vec![1.0], |_, x, _, out| out[0] = x[0].powi(4));
    let err = simulate_particle_system(&c, &setup(&m, &g, &xi, 3)).unwrap_err();
    assert!(matches!(err, crate::Error::BlowUp { .. }));
}

#[test]
fn frozen_mean_flow_rejected_for_general_coefficients() {
    let m = stable();
    let g = TimeGrid::uniform(1.0, 4).unwrap();
    let xi = InitialLaw::PointMass { at: vec![0.0] };
    let flow = Arc::new(MeasureFlow::new(g.clone(), FlowData::Mean(vec![vec![0.0]; 5])).unwrap());
    let c = PowerMomentDrift { beta: 0.5 };
    assert!(Lockstep::new(&c, &setup(&m, &g, &xi, 2), &[SystemSpec::frozen(flow)]).is_err());
    let other = Arc::new(MeasureFlow::new(TimeGrid::uniform(2.0, 4).unwrap(), FlowData::Mean(vec![vec![0.0]; 5])).unwrap());
    let c2 = StableOuCoefficients::scalar(1, 0.0, 1.0);
    assert!(matches!(
        Lockstep::new(&c2, &setup(&m, &g, &xi, 2), &[SystemSpec::frozen(other)]),
        Err(crate::Error::GridMismatch(_))
    ));
}
