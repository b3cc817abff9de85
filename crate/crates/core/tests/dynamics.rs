use num_complex::Complex64;
use proptest::prelude::*;
use wentzell::disc::{assemble, discrete_energy, DiscretePencil};
use wentzell::special::BesselEvaluator;
use wentzell::time::{
    fit_exponential_rate, modal_solution, packet_modes, project_kernel, simulate, simulate_from,
    InitialData, ModalEnergy, ModePacket, Newmark, Phase, SimulationConfig,
};

fn conserved(p: &DiscretePencil, u: &[Complex64], v: &[Complex64]) -> Complex64 {
    v.iter().zip(p.mass()).map(|(v, m)| v * m).sum::<Complex64>() + p.damping * u[p.boundary()]
}

fn packet_config(n: u32, dt: f64, t_max: f64) -> SimulationConfig {
    SimulationConfig {
        n,
        grid_n: 600,
        dt,
        t_max,
        sample_stride: 1,
        initial: InitialData::Packet(ModePacket { k_min: 1, k_max: 4, s: 3.0, phase: Phase::Random(5) }),
    }
}

#[test]
fn energy_identity_converges_at_second_order() {
    let ev = BesselEvaluator::default();
    for n in [0u32, 2] {
        let p = assemble(n, 600).unwrap();
        let r: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&dt| simulate(&ev, &p, &packet_config(n, dt, 5.0)).unwrap().identity_residual())
            .collect();
        let order = (r[0] / r[1]).log2();
        assert!(order > 1.7, "n = {n}: {r:?}");
    }
}

#[test]
fn energy_is_monotone() {
    let ev = BesselEvaluator::default();
    let p = assemble(1, 600).unwrap();
    let tr = simulate(&ev, &p, &packet_config(1, 0.01, 8.0)).unwrap();
    assert!(tr.max_increase() <= 1e-10 * tr.rows[0].e);
    assert!(tr.rows.last().unwrap().e < tr.rows[0].e);
}

#[test]
fn constants_are_neutral() {
    let p = assemble(0, 300).unwrap();
    let u = vec![Complex64::new(2.5, -1.0); p.dim()];
    let v = vec![Complex64::new(0.0, 0.0); p.dim()];
    let nm = Newmark::new(&p, 0.05).unwrap();
    let (u1, v1) = nm.step(&p, &u, &v);
    assert!(u1.iter().zip(&u).all(|(a, b)| (a - b).norm() < 1e-12));
    assert!(v1.iter().all(|x| x.norm() < 1e-12));
    let tr = simulate_from(&p, 0.05, 2.0, 1, u, v).unwrap();
    assert!(tr.rows.iter().all(|r| r.e.abs() < 1e-20));
}

#[test]
fn kernel_invariant_is_conserved_and_projected_out() {
    let p = assemble(0, 300).unwrap();
    let mut u = p.grid.sample(|r| Complex64::new(1.0 + r * r, 0.3 * r));
    let v = p.grid.sample(|r| Complex64::new(r.powi(3), -1.0));
    let q0 = conserved(&p, &u, &v);
    let nm = Newmark::new(&p, 0.01).unwrap();
    let (mut a, mut b) = (u.clone(), v.clone());
    for _ in 0..200 {
        (a, b) = nm.step(&p, &a, &b);
    }
    assert!((conserved(&p, &a, &b) - q0).norm() < 1e-10 * q0.norm());
    project_kernel(&p, &mut u, &v);
    assert!(conserved(&p, &u, &v).norm() < 1e-12);
}

#[test]
fn adding_a_constant_changes_no_energy_sample() {
    let p = assemble(0, 300).unwrap();
    let u = p.grid.sample(|r| Complex64::new((3.0 * r).cos(), r * r));
    let v = p.grid.sample(|r| Complex64::new(r, 0.5 - r));
    let shifted: Vec<Complex64> = u.iter().map(|x| x + Complex64::new(4.0, -2.0)).collect();
    let run = |u: Vec<Complex64>| {
        let cfg = SimulationConfig {
            n: 0,
            grid_n: 300,
            dt: 0.02,
            t_max: 4.0,
            sample_stride: 10,
            initial: InitialData::Raw { u, v: v.clone() },
        };
        simulate(&BesselEvaluator::default(), &p, &cfg).unwrap()
    };
    let a = run(u);
    let b = run(shifted);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((x.e - y.e).abs() <= 1e-12 * a.rows[0].e, "{} vs {}", x.e, y.e);
    }
}

#[test]
fn single_mode_decays_at_twice_real_part() {
    let ev = BesselEvaluator::default();
    let p = assemble(0, 800).unwrap();
    let packet = ModePacket { k_min: 3, k_max: 3, s: 3.0, phase: Phase::Aligned };
    let sigma = packet_modes(&ev, &p, &packet).unwrap()[0].eig.sigma();
    let t_max = 2.0 / sigma.abs();
    let cfg = SimulationConfig {
        n: 0,
        grid_n: 800,
        dt: 0.01,
        t_max,
        sample_stride: 20,
        initial: InitialData::Packet(packet),
    };
    let tr = simulate(&ev, &p, &cfg).unwrap();
    let rate = fit_exponential_rate(&tr, 0.0, t_max).unwrap();
    assert!((rate / (2.0 * sigma) - 1.0).abs() < 0.01, "{rate} vs {}", 2.0 * sigma);
}

#[test]
fn newmark_matches_modal_synthesis_for_low_modes() {
    let ev = BesselEvaluator::default();
    let p = assemble(0, 1000).unwrap();
    let packet = ModePacket { k_min: 1, k_max: 3, s: 3.0, phase: Phase::Random(9) };
    let modes = packet_modes(&ev, &p, &packet).unwrap();
    let (mut u, mut v) = modal_solution(&modes, 0.0);
    let dt = 1e-3;
    let nm = Newmark::new(&p, dt).unwrap();
    for _ in 0..2000 {
        (u, v) = nm.step(&p, &u, &v);
    }
    let (ue, ve) = modal_solution(&modes, 2.0);
    let diff_u: Vec<Complex64> = u.iter().zip(&ue).map(|(a, b)| a - b).collect();
    let diff_v: Vec<Complex64> = v.iter().zip(&ve).map(|(a, b)| a - b).collect();
    let (e_diff, _) = discrete_energy(&p, &diff_u, &diff_v);
    let (e, _) = discrete_energy(&p, &ue, &ve);
    assert!((e_diff / e).sqrt() < 1e-3, "relative error {}", (e_diff / e).sqrt());
    let me = ModalEnergy::new(&p, &modes);
    let row = me.at(2.0);
    assert!((row.e - e).abs() < 1e-8 * e);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn newmark_never_creates_energy(seed in 0u64..1000, n in 0u32..4) {
        let p = assemble(n, 120).unwrap();
        let u = p.grid.sample(|r| Complex64::new((seed as f64 * r).sin(), r.powi(n as i32 + 1)));
        let v = p.grid.sample(|r| Complex64::new(r * (1.0 - r), (seed as f64).cos() * r));
        let tr = simulate_from(&p, 0.02, 0.6, 1, u, v).unwrap();
        prop_assert!(tr.max_increase() <= 1e-10 * tr.rows[0].e.max(1e-300));
    }
}
