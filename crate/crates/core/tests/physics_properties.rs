use proptest::prelude::*;
use rand::Rng;
use voxelsoft::grid::{Morphology, RobotDesign, StiffnessField};
use voxelsoft::physics::{settle, step, Ground, MassSpringSystem, SimParams, SimState, SpringKind};
use voxelsoft::rng;

fn design(rows: &[&[u8]], s: f64) -> RobotDesign {
    let m = Morphology::from_rows_top_down(rows).unwrap();
    let stiffness = StiffnessField::uniform(m.width(), m.height(), s);
    RobotDesign {
        morphology: m,
        stiffness,
        id: "p".into(),
        parent_id: None,
    }
}

/// Perturbed, moving block far from any external influence.
fn isolated_block(seed: u64) -> (MassSpringSystem, SimState) {
    let d = design(&[&[2, 3, 2], &[2, 4, 2]], 1.0);
    let sys = MassSpringSystem::assemble(&d, &SimParams::isolated()).unwrap();
    let mut st = SimState::at_rest(&sys, [0.0, 10.0]);
    let mut r = rng::seeded(seed);
    for (p, v) in st.positions.iter_mut().zip(st.velocities.iter_mut()) {
        p[0] += r.random_range(-0.004..0.004);
        p[1] += r.random_range(-0.004..0.004);
        v[0] = 0.3 + r.random_range(-0.05..0.05);
        v[1] = -0.1 + r.random_range(-0.05..0.05);
    }
    (sys, st)
}

#[test]
fn momentum_is_conserved_without_external_forces() {
    let (mut sys, mut st) = isolated_block(1);
    let params = SimParams::isolated();
    let ground = Ground::flat(-1e9);
    let p0 = sys.momentum(&st.velocities);
    let n0 = (p0[0] * p0[0] + p0[1] * p0[1]).sqrt();
    for _ in 0..1000 {
        step(&mut sys, &mut st, &[1.0, 1.0], &params, &ground).unwrap();
    }
    let p = sys.momentum(&st.velocities);
    let drift = ((p[0] - p0[0]).powi(2) + (p[1] - p0[1]).powi(2)).sqrt() / n0;
    assert!(drift < 1e-9, "drift {drift:e}");
}

/// Semi-implicit Euler stores velocities half a step out of phase with
/// positions; energy is evaluated with the time-centred velocity
/// `(v_n + v_{n+1}) / 2` so the measure tracks the integrator, not the stagger.
fn centred_energies(sys: &mut MassSpringSystem, mut st: SimState, params: &SimParams, steps: usize) -> Vec<f64> {
    let ground = Ground::flat(-1e9);
    let act = vec![1.0; sys.n_actuators()];
    let mut states = vec![st.clone()];
    for _ in 0..=steps {
        step(sys, &mut st, &act, params, &ground).unwrap();
        states.push(st.clone());
    }
    (0..=steps)
        .map(|n| {
            let v: Vec<[f64; 2]> = states[n]
                .velocities
                .iter()
                .zip(&states[n + 1].velocities)
                .map(|(a, b)| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
                .collect();
            sys.kinetic_energy(&v) + sys.elastic_energy(&states[n].positions)
        })
        .collect()
}

#[test]
fn undamped_energy_drift_is_bounded() {
    let (mut sys, st) = isolated_block(2);
    let e = centred_energies(&mut sys, st, &SimParams::isolated(), 1000);
    let worst = e.iter().map(|x| (x - e[0]).abs() / e[0]).fold(0.0, f64::max);
    assert!(worst < 0.01, "max relative drift {worst}");
}

#[test]
fn damped_energy_decreases() {
    let (mut sys, mut st) = isolated_block(3);
    let params = SimParams {
        spring_damping: 2.0,
        ..SimParams::isolated()
    };
    let ground = Ground::flat(-1e9);
    let e0 = sys.kinetic_energy(&st.velocities) + sys.elastic_energy(&st.positions);
    for _ in 0..1000 {
        step(&mut sys, &mut st, &[1.0, 1.0], &params, &ground).unwrap();
    }
    let e1 = sys.kinetic_energy(&st.velocities) + sys.elastic_energy(&st.positions);
    assert!(e1 < e0, "{e1} !< {e0}");
}

fn cantilever_tip_deflection(s: f64) -> f64 {
    let d = design(&[&[3, 2, 2]], s);
    let params = SimParams::default();
    let mut sys = MassSpringSystem::assemble(&d, &params).unwrap();
    for c in sys.voxels[0].corners {
        sys.fix_mass(c);
    }
    let st = SimState::at_rest(&sys, [0.0, 1.0]);
    let tip = sys.voxels[2].corners[1];
    let y0 = st.positions[tip][1];
    let out = settle(&mut sys, st, &params, &Ground::flat(0.0), 400_000, 1e-7).unwrap();
    assert!(out.converged, "S={s} did not settle");
    y0 - out.state.positions[tip][1]
}

#[test]
fn softer_cantilever_sags_more() {
    let d: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&s| cantilever_tip_deflection(s)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn doubling_stiffness_doubles_spring_forces() {
    let (mut sys, st) = isolated_block(4);
    let n = sys.n_occupied();
    let before: Vec<[f64; 2]> = (0..sys.springs.len()).map(|i| sys.spring_force(i, &st.positions, &st.velocities, 0.0)).collect();
    sys.set_reactive_stiffness(&vec![2.0; n]).unwrap();
    for (i, f) in before.iter().enumerate() {
        let g = sys.spring_force(i, &st.positions, &st.velocities, 0.0);
        assert!((g[0] - 2.0 * f[0]).abs() <= 1e-12 * f[0].abs().max(1e-12));
        assert!((g[1] - 2.0 * f[1]).abs() <= 1e-12 * f[1].abs().max(1e-12));
    }
}

fn run(sys: &mut MassSpringSystem, reactive: bool, ticks: usize) -> Vec<SimState> {
    let params = SimParams::default();
    let ground = Ground::flat(0.0);
    let mut st = SimState::at_rest(sys, [0.0, 0.0]);
    let mut out = Vec::new();
    let ones = vec![1.0; sys.n_occupied()];
    for t in 0..ticks {
        let act: Vec<f64> = (0..sys.n_actuators()).map(|a| 1.0 + 0.4 * ((t + a) as f64 * 0.3).sin()).collect();
        if reactive {
            sys.set_reactive_stiffness(&ones).unwrap();
        }
        for _ in 0..params.control_decimation {
            step(sys, &mut st, &act, &params, &ground).unwrap();
        }
        out.push(st.clone());
    }
    out
}

#[test]
fn unit_reactive_field_matches_invariant_bit_for_bit() {
    let d = design(&[&[3, 2, 4], &[1, 3, 2]], 1.0);
    let mut a = MassSpringSystem::assemble(&d, &SimParams::default()).unwrap();
    let mut b = a.clone();
    assert_eq!(run(&mut a, false, 60), run(&mut b, true, 60));
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let d = design(&[&[3, 2, 4], &[1, 3, 2]], 1.3);
    let mut a = MassSpringSystem::assemble(&d, &SimParams::default()).unwrap();
    let mut b = MassSpringSystem::assemble(&d, &SimParams::default()).unwrap();
    assert_eq!(run(&mut a, false, 40), run(&mut b, false, 40));
}

fn random_design(seed: u64) -> RobotDesign {
    let mut r = rng::seeded(seed);
    loop {
        let (w, h) = (r.random_range(1..6), r.random_range(1..6));
        let cells: Vec<u8> = (0..w * h).map(|_| if r.random_bool(0.7) { r.random_range(1..5) } else { 0 }).collect();
        let m = Morphology::new(w, h, cells).unwrap();
        let s = StiffnessField::new(w, h, (0..w * h).map(|_| r.random_range(0.5..=2.0)).collect()).unwrap();
        let d = RobotDesign {
            morphology: m,
            stiffness: s,
            id: "r".into(),
            parent_id: None,
        };
        if voxelsoft::grid::validate_design(&d).unwrap().is_ok() {
            return d;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spring_forces_are_exactly_antisymmetric(seed in 0u64..10_000) {
        let d = random_design(seed);
        let sys = MassSpringSystem::assemble(&d, &SimParams::default()).unwrap();
        let mut st = SimState::at_rest(&sys, [0.0, 0.0]);
        let mut r = rng::seeded(seed ^ 0xABCD);
        for p in st.positions.iter_mut() {
            p[0] += r.random_range(-0.01..0.01);
            p[1] += r.random_range(-0.01..0.01);
        }
        for i in 0..sys.springs.len() {
            let s = &sys.springs[i];
            let fa = sys.spring_force(i, &st.positions, &st.velocities, 2.0);
            // force on b is computed by swapping roles
            let mut swapped = sys.clone();
            let (a, b) = (s.a, s.b);
            swapped.springs[i].a = b;
            swapped.springs[i].b = a;
            let fb = swapped.spring_force(i, &st.positions, &st.velocities, 2.0);
            prop_assert_eq!(fa[0], -fb[0]);
            prop_assert_eq!(fa[1], -fb[1]);
        }
    }

    #[test]
    fn assembled_constants_follow_the_scaling_rule(seed in 0u64..10_000) {
        let d = random_design(seed);
        let sys = MassSpringSystem::assemble(&d, &SimParams::default()).unwrap();
        for s in &sys.springs {
            let own = |o: usize| { let v = &sys.voxels[o]; d.stiffness.get(v.x, v.y) };
            let expected = match (s.kind, s.owners) {
                (SpringKind::Diagonal, [Some(o), None]) => own(o) * s.k_base,
                (SpringKind::Edge, [Some(a), Some(b)]) => 0.5 * (own(a) + own(b)) * s.k_base,
                (SpringKind::Edge, [Some(o), None]) => own(o) * s.k_base,
                other => panic!("unexpected ownership {other:?}"),
            };
            prop_assert!((s.k_effective - expected).abs() <= 1e-12 * expected);
        }
    }
}
