#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chdbc::initial::make_initial_data;
use chdbc::runner::RunRecord;
use chdbc::stepper::{limit_jacobian, limit_residual, robin_jacobian, robin_residual};
use chdbc::{
    CsrMatrix, Discretization, LimitState, Mesh, ModelKind, ModelParams, RobinState, RunConfig, SweepConfig,
    Transmission,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Operators integrated element by element from barycentric gradients,
/// with the boundary found as the edges owned by a single triangle.
pub struct OracleOperators {
    pub a: Vec<Vec<f64>>,
    pub m: Vec<f64>,
    pub a_gamma: Vec<Vec<f64>>,
    pub m_gamma: Vec<f64>,
}

fn barycentric_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    // Rows of the inverse of [[1, x_k, y_k]] give the gradients.
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut grads = [[0.0; 2]; 3];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        grads[k] = [(p[i][1] - p[j][1]) / det, (p[j][0] - p[i][0]) / det];
    }
    (grads, det.abs() / 2.0)
}

pub fn oracle_operators(mesh: &Mesh) -> OracleOperators {
    let n = mesh.n_nodes();
    let nb = mesh.n_boundary();
    let mut a = vec![vec![0.0; n]; n];
    let mut m = vec![0.0; n];
    let mut edges: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    for tri in mesh.triangles() {
        let p = tri.map(|i| mesh.nodes()[i]);
        let (g, area) = barycentric_gradients(p);
        for r in 0..3 {
            m[tri[r]] += area / 3.0;
            for c in 0..3 {
                a[tri[r]][tri[c]] += area * (g[r][0] * g[c][0] + g[r][1] * g[c][1]);
            }
            let (s, t) = (tri[r], tri[(r + 1) % 3]);
            *edges.entry((s.min(t), s.max(t))).or_default() += 1;
        }
    }
    let mut a_gamma = vec![vec![0.0; nb]; nb];
    let mut m_gamma = vec![0.0; nb];
    for (&(s, t), &count) in &edges {
        if count != 1 {
            continue;
        }
        let (ps, pt) = (mesh.nodes()[s], mesh.nodes()[t]);
        let len = ((ps[0] - pt[0]).powi(2) + (ps[1] - pt[1]).powi(2)).sqrt();
        let (bs, bt) = (mesh.bnd_of_node(s).unwrap(), mesh.bnd_of_node(t).unwrap());
        a_gamma[bs][bs] += 1.0 / len;
        a_gamma[bt][bt] += 1.0 / len;
        a_gamma[bs][bt] -= 1.0 / len;
        a_gamma[bt][bs] -= 1.0 / len;
        m_gamma[bs] += len / 2.0;
        m_gamma[bt] += len / 2.0;
    }
    OracleOperators { a, m, a_gamma, m_gamma }
}

pub fn dense_diff(dense: &[Vec<f64>], sparse: &CsrMatrix) -> f64 {
    let other = sparse.to_dense();
    assert_eq!(other.len(), dense.len());
    dense
        .iter()
        .flatten()
        .zip(other.iter().flatten())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn diag_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Largest entrywise gap between the assembled operators and the oracle.
pub fn assembly_oracle_gap(n_cells: usize) -> f64 {
    let disc = Discretization::unit_square(n_cells).unwrap();
    let oracle = oracle_operators(&disc.mesh);
    let ops = &disc.ops;
    [
        dense_diff(&oracle.a, &ops.a),
        diag_diff(&oracle.m, ops.m.diagonal()),
        dense_diff(&oracle.a_gamma, &ops.a_gamma),
        diag_diff(&oracle.m_gamma, ops.m_gamma.diagonal()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// `‖J d − central difference‖₂ / ‖J d‖₂`.
fn directional_error(jd: &[f64], plus: &[f64], minus: &[f64], h: f64) -> f64 {
    let diff: Vec<f64> = jd
        .iter()
        .zip(plus.iter().zip(minus))
        .map(|(j, (p, m))| j - (p - m) / (2.0 * h))
        .collect();
    norm2(&diff) / norm2(jd).max(1e-300)
}

pub const FD_STATES: usize = 20;

/// Worst directional-derivative mismatch of the Robin jacobian over
/// random states with `V` drawn inside the transmission's interval.
pub fn robin_jacobian_error(transmission: Transmission, kappa: f64, seed: u64) -> f64 {
    let disc = Discretization::unit_square(4).unwrap();
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    let params = ModelParams {
        transmission,
        ..ModelParams::double_well(0.3, 0.4, kappa, 0.5, 1e-3, 1.0, 0.0)
    };
    let (lo, hi) = transmission.interval();
    let (lo, hi) = (lo.max(-2.0), hi.min(2.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prev = RobinState::initial(random_vec(&mut rng, n, -1.0, 1.0), random_vec(&mut rng, nb, lo, hi));
    let mut worst: f64 = 0.0;
    for _ in 0..FD_STATES {
        let x = RobinState {
            u: random_vec(&mut rng, n, -1.2, 1.2),
            v: random_vec(&mut rng, nb, lo, hi),
            xi: random_vec(&mut rng, n, -2.0, 2.0),
            phi: random_vec(&mut rng, nb, -2.0, 2.0),
            step_index: 1,
            time: params.tau,
        };
        let d = random_vec(&mut rng, 2 * (n + nb), -1.0, 1.0);
        let jd = robin_jacobian(&x, &params, &disc).unwrap().mul_vec(&d);
        let h = 1e-6;
        let shifted = |s: f64| {
            let packed: Vec<f64> = x.pack().iter().zip(&d).map(|(a, b)| a + s * b).collect();
            let y = RobinState::unpack(&packed, n, nb, 1, params.tau);
            robin_residual(&y, &prev, &params, &disc).unwrap()
        };
        worst = worst.max(directional_error(&jd, &shifted(h), &shifted(-h), h));
    }
    worst
}

pub fn limit_jacobian_error(alpha: f64, beta: f64, kappa: f64, seed: u64) -> f64 {
    let disc = Discretization::unit_square(4).unwrap();
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    let params = ModelParams::double_well(0.3, 0.4, kappa, 1.0, 1e-3, alpha, beta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prev = LimitState::initial(random_vec(&mut rng, n, -1.0, 1.0), nb);
    let mut worst: f64 = 0.0;
    for _ in 0..FD_STATES {
        let x = LimitState {
            u: random_vec(&mut rng, n, -1.5, 1.5),
            xi: random_vec(&mut rng, n, -2.0, 2.0),
            phi: random_vec(&mut rng, nb, -2.0, 2.0),
            step_index: 1,
            time: params.tau,
        };
        let d = random_vec(&mut rng, 2 * n + nb, -1.0, 1.0);
        let jd = limit_jacobian(&x, &params, &disc).unwrap().mul_vec(&d);
        let h = 1e-6;
        let shifted = |s: f64| {
            let packed: Vec<f64> = x.pack().iter().zip(&d).map(|(a, b)| a + s * b).collect();
            let y = LimitState::unpack(&packed, n, nb, 1, params.tau);
            limit_residual(&y, &prev, &params, &disc).unwrap()
        };
        worst = worst.max(directional_error(&jd, &shifted(h), &shifted(-h), h));
    }
    worst
}

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Shipped example configs, split into single runs and sweeps.
pub fn shipped_configs() -> (Vec<(String, RunConfig)>, Vec<(String, SweepConfig)>) {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cfg"))
        .collect();
    paths.sort();
    let mut runs = Vec::new();
    let mut sweeps = Vec::new();
    for path in paths {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(&path).unwrap();
        if text.lines().any(|l| l.trim_start().starts_with("K_list")) {
            sweeps.push((name, SweepConfig::parse(&text).unwrap()));
        } else {
            runs.push((name, RunConfig::parse(&text).unwrap()));
        }
    }
    (runs, sweeps)
}

/// Every single run that the shipped configs perform, sweeps expanded.
pub fn shipped_runs() -> Vec<(String, RunConfig)> {
    let (mut runs, sweeps) = shipped_configs();
    for (name, sweep) in sweeps {
        runs.push((format!("{name} reference"), sweep.reference_run()));
        for &k in &sweep.k_list {
            runs.push((format!("{name} K={k:e}"), sweep.robin_run(k)));
        }
    }
    runs
}

/// Largest mass drift over a run, bulk and surface, relative to
/// `max(|m₀|, lumped L¹ norm of the initial field)`.
pub fn mass_drift(config: &RunConfig, disc: &Discretization, record: &RunRecord) -> f64 {
    let (u0, v0) = make_initial_data(config, &disc.mesh, &config.transmission()).unwrap();
    let v0 = match config.model {
        ModelKind::Robin => v0.unwrap(),
        ModelKind::Limit => disc.mesh.trace(&u0),
    };
    let l1 = |w: &[f64], f: &[f64]| w.iter().zip(f).map(|(a, b)| a * b.abs()).sum::<f64>();
    let bulk_scale = l1(disc.ops.m.diagonal(), &u0);
    let surf_scale = l1(disc.ops.m_gamma.diagonal(), &v0);
    let first = &record.steps[0];
    record.steps.iter().fold(0.0, |acc: f64, s| {
        let db = (s.mass_bulk - first.mass_bulk).abs() / first.mass_bulk.abs().max(bulk_scale);
        let ds = (s.mass_surf - first.mass_surf).abs() / first.mass_surf.abs().max(surf_scale);
        acc.max(db).max(ds)
    })
}

/// Largest `(E^{k+1} − E^k) / (1 + |E^k|)` over a run.
pub fn energy_increase(record: &RunRecord) -> f64 {
    record
        .steps
        .windows(2)
        .map(|w| (w[1].energy.total - w[0].energy.total) / (1.0 + w[0].energy.total.abs()))
        .fold(f64::NEG_INFINITY, f64::max)
}
