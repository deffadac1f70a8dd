mod common;

use std::f64::consts::PI;

use chdbc::linsolve::LinearSolver;
use chdbc::runner::simulate;
use chdbc::stepper::{
    limit_jacobian, limit_residual, limit_step, robin_jacobian, robin_residual, robin_step,
};
use chdbc::{Discretization, LimitState, ModelParams, RobinState, RunConfig, Transmission};
use common::{energy_increase, mass_drift};

fn robin_stationary(disc: &Discretization) -> RobinState {
    RobinState::initial(vec![1.0; disc.n_nodes()], vec![1.0; disc.n_boundary()])
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn robin_stationary_state() {
    let disc = Discretization::unit_square(5).unwrap();
    let params = ModelParams::double_well(0.02, 0.02, 1.0, 0.1, 1e-5, 1.0, 0.0);
    let s = robin_stationary(&disc);
    assert!(max_abs(&robin_residual(&s, &s, &params, &disc).unwrap()) <= 1e-14);
    let mut lu = LinearSolver::new();
    lu.factorize(&robin_jacobian(&s, &params, &disc).unwrap()).unwrap();
    let next = robin_step(&s, &params, &disc, Default::default()).unwrap();
    assert!(max_diff(&next.state.pack(), &s.pack()) <= 1e-10);
    assert!(next.newton_iters <= 2);
}

#[test]
fn robin_block_sums_and_locality() {
    let disc = Discretization::unit_square(5).unwrap();
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    let params = ModelParams {
        transmission: Transmission::Sin,
        ..ModelParams::double_well(0.1, 0.2, 1.0, 0.1, 1e-3, 1.0, 0.0)
    };
    let wave = |k: f64, len: usize| (0..len).map(|i| (i as f64 * k).sin() * 0.8).collect::<Vec<_>>();
    let prev = RobinState::initial(wave(0.3, n), wave(0.2, nb));
    let mut next = prev.clone();
    next.u = wave(0.31, n);
    next.xi = wave(1.7, n);
    next.phi = wave(0.9, nb);
    let r = robin_residual(&next, &prev, &params, &disc).unwrap();
    let mass_change: f64 = disc.ops.m.diagonal().iter().zip(next.u.iter().zip(&prev.u)).map(|(w, (a, b))| w * (a - b)).sum();
    assert!((r[..n].iter().sum::<f64>() - mass_change).abs() < 1e-14);

    let i = 2 * 6 + 3;
    assert!(!disc.mesh.chi(i));
    let mut bumped = next.clone();
    bumped.u[i] += 0.25;
    let r2 = robin_residual(&bumped, &prev, &params, &disc).unwrap();
    let neighbours: Vec<usize> = disc.ops.a.row(i).map(|(c, _)| c).collect();
    for row in 0..r.len() {
        let allowed = row == i || (row >= n + nb && row < 2 * n + nb && neighbours.contains(&(row - n - nb)));
        assert!(allowed || r[row] == r2[row], "row {row}");
    }
    assert_ne!(r[i], r2[i]);
    assert_ne!(r[n + nb + i], r2[n + nb + i]);
}

#[test]
fn limit_residual_examples() {
    let disc = Discretization::unit_square(5).unwrap();
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    let params = ModelParams::double_well(0.02, 0.02, 1.0, 1.0, 1e-5, 1.0, 0.0);
    let s = LimitState::initial(vec![1.0; n], nb);
    assert!(max_abs(&limit_residual(&s, &s, &params, &disc).unwrap()) <= 1e-14);
    let next = limit_step(&s, &params, &disc, Default::default()).unwrap();
    assert!(max_diff(&next.state.pack(), &s.pack()) <= 1e-10);

    let eps = 0.3;
    let params = ModelParams::double_well(eps, 0.02, 1.0, 1.0, 1e-5, 2.0, -4.0);
    let s = LimitState::initial(vec![-2.0; n], nb);
    let r = limit_residual(&s, &s, &params, &disc).unwrap();
    assert!(r[..n + nb].iter().all(|x| *x == 0.0));
    for (i, w) in disc.ops.m.diagonal().iter().enumerate() {
        assert!((r[n + nb + i] - (-6.0) * w / eps).abs() < 1e-13);
    }

    let prev = LimitState::initial((0..n).map(|i| (i as f64).sin()).collect(), nb);
    let mut next = prev.clone();
    next.u.iter_mut().for_each(|x| *x *= 0.9);
    next.phi = (0..nb).map(|b| (b as f64).cos()).collect();
    let r = limit_residual(&next, &prev, &params, &disc).unwrap();
    let surf_change: f64 = disc.mesh.boundary_nodes().iter().zip(disc.ops.m_gamma.diagonal()).map(|(&i, w)| w * (next.u[i] - prev.u[i])).sum();
    assert!((r[n..n + nb].iter().sum::<f64>() - surf_change).abs() < 1e-14);
}

#[test]
fn limit_jacobian_structure() {
    let disc = Discretization::unit_square(4).unwrap();
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    let s = LimitState {
        u: (0..n).map(|i| (i as f64 * 0.4).sin()).collect(),
        xi: vec![0.0; n],
        phi: vec![0.0; nb],
        step_index: 0,
        time: 0.0,
    };
    let eps = 0.2;
    let params = ModelParams::double_well(eps, 0.3, 0.0, 1.0, 1e-5, 1.5, 0.2);
    let j = limit_jacobian(&s, &params, &disc).unwrap().to_dense();
    let row3 = n + nb;
    for r in 0..n {
        for c in 0..n {
            assert!((j[row3 + r][c] - j[row3 + c][r]).abs() <= 1e-13);
            // κ = 0: off-diagonal entries come from εA only
            if r != c {
                assert!((j[row3 + r][c] - eps * disc.ops.a.get(r, c)).abs() <= 1e-15);
            }
        }
    }
}

fn config(text: &str) -> RunConfig {
    RunConfig::parse(&format!("{text}\ninitial_data = sine_product\n")).unwrap()
}

fn cases() -> Vec<(&'static str, RunConfig)> {
    let robin = "model = robin\nn_cells = 8\ntau = 1e-5\nn_steps = 100\neps = 0.05\ndelta = 0.05\nK = 0.01";
    let limit = "model = limit\nn_cells = 8\ntau = 1e-5\nn_steps = 100\neps = 0.05\ndelta = 0.05";
    vec![
        ("robin affine kappa 1", config(&format!("{robin}\nkappa = 1\ntransmission = affine"))),
        ("robin affine kappa 0", config(&format!("{robin}\nkappa = 0\ntransmission = affine\nalpha = 2\nbeta = -4"))),
        ("robin sin kappa 1", config(&format!("{robin}\nkappa = 1\ntransmission = sin"))),
        ("robin sin kappa 0", config(&format!("{robin}\nkappa = 0\ntransmission = sin"))),
        ("robin cos3p2 kappa 1", config(&format!("{robin}\nkappa = 1\ntransmission = cos3p2"))),
        ("limit kappa 1", config(&format!("{limit}\nkappa = 1"))),
        ("limit kappa 0", config(&format!("{limit}\nkappa = 0\nalpha = 2\nbeta = 0.5"))),
    ]
}

#[test]
fn mass_conservation_and_energy_decay() {
    for (name, cfg) in cases() {
        let disc = Discretization::unit_square(cfg.n_cells).unwrap();
        let record = simulate(&cfg, &disc, |_| Ok(())).unwrap();
        assert_eq!(record.steps.len(), 101);
        let drift = mass_drift(&cfg, &disc, &record);
        assert!(drift <= 1e-9, "{name}: mass drift {drift:e}");
        let rise = energy_increase(&record);
        assert!(rise <= 1e-9, "{name}: energy rise {rise:e}");
    }
}

#[test]
fn newton_converges_quadratically() {
    let (_, cfg) = &cases()[2];
    let disc = Discretization::unit_square(cfg.n_cells).unwrap();
    let params = cfg.params();
    let u0 = chdbc::initial::bulk_datum(&cfg.initial_data, &disc.mesh);
    let v0 = chdbc::initial::surface_datum(&u0, &disc.mesh, &params.transmission).unwrap();
    let mut state = RobinState::initial(u0, v0);
    let floor = 1e-9;
    let mut checked = 0;
    for _ in 0..10 {
        let out = robin_step(&state, &params, &disc, cfg.newton).unwrap();
        let h = &out.residual_history;
        for w in h.windows(3) {
            let (r1, r2, r3) = (w[0], w[1], w[2]);
            if r2 > floor && r1 > r2 && r2 > r3 {
                assert!(r3 <= 10.0 * r2 * r2 / r1, "history {h:?}");
                checked += 1;
            }
        }
        state = out.state;
    }
    assert!(checked > 0);
}

#[test]
fn small_time_step_barely_moves_smooth_data() {
    let disc = Discretization::unit_square(10).unwrap();
    let base = ModelParams::double_well(1.0, 1.0, 1.0, 0.1, 1e-8, 1.0, 0.0);
    let u0: Vec<f64> = disc
        .mesh
        .nodes()
        .iter()
        .map(|&[x, y]| 0.5 * (PI * x).cos() * (PI * y).cos())
        .collect();
    let state = RobinState::initial(u0.clone(), disc.mesh.trace(&u0));
    let coarse = robin_step(&state, &base, &disc, Default::default()).unwrap().state;
    let fine = robin_step(&state, &ModelParams { tau: 1e-9, ..base.clone() }, &disc, Default::default())
        .unwrap()
        .state;
    // The corners owning a single triangle see an inconsistent lumped
    // Laplacian and move faster than the continuous flow.
    let lone_corner = |i: usize| {
        let [x, y] = disc.mesh.nodes()[i];
        (x == 1.0 && y == 0.0) || (x == 0.0 && y == 1.0)
    };
    let change: Vec<f64> = coarse.u.iter().zip(&u0).map(|(a, b)| a - b).collect();
    let regular = change
        .iter()
        .enumerate()
        .filter(|(i, _)| !lone_corner(*i))
        .fold(0.0f64, |m, (_, d)| m.max(d.abs()));
    assert!(regular <= 1e-5, "{regular:e}");
    // first order in the step: U(τ) − U⁰ ≈ 10 (U(τ/10) − U⁰)
    let scaled: Vec<f64> = fine.u.iter().zip(&u0).map(|(a, b)| 10.0 * (a - b)).collect();
    assert!(max_diff(&change, &scaled) <= 0.05 * max_abs(&change));
}

#[test]
fn robin_approaches_limit_for_small_penalty() {
    let disc = Discretization::unit_square(20).unwrap();
    let params = ModelParams::double_well(0.02, 0.02, 1.0, 1e-6, 1e-5, 1.0, 0.0);
    let u0 = chdbc::initial::bulk_datum(&chdbc::InitialData::SineProduct, &disc.mesh);
    let robin = RobinState::initial(u0.clone(), disc.mesh.trace(&u0));
    let limit = LimitState::initial(u0, disc.n_boundary());
    let r = robin_step(&robin, &params, &disc, Default::default()).unwrap().state;
    let l = limit_step(&limit, &params, &disc, Default::default()).unwrap().state;
    let gap = max_diff(&r.u, &l.u);
    assert!(gap <= 1e-4, "{gap:e}");
    assert!(max_abs(&r.u) > 0.5);
}
