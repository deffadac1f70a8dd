//! Fully discrete Robin-regularised scheme.
//!
//! Unknowns are stacked as `[U | V | Ξ | Φ]` with `U, Ξ` on all nodes and
//! `V, Φ` on the compressed boundary index set; residual rows follow the
//! same block order.

use crate::assembly::Discretization;
use crate::error::{check_len, Error, Result};
use crate::model::{eval_nonlinearities, ModelParams};
use crate::sparse::CsrMatrix;

use super::newton::{NewtonConfig, NewtonSolver};
use super::StepOutcome;

#[derive(Debug, Clone, PartialEq)]
pub struct RobinState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub step_index: usize,
    pub time: f64,
}

impl RobinState {
    /// State at step 0; the potentials start at zero.
    pub fn initial(u: Vec<f64>, v: Vec<f64>) -> Self {
        let (n, nb) = (u.len(), v.len());
        RobinState {
            u,
            v,
            xi: vec![0.0; n],
            phi: vec![0.0; nb],
            step_index: 0,
            time: 0.0,
        }
    }

    pub fn pack(&self) -> Vec<f64> {
        [&self.u[..], &self.v, &self.xi, &self.phi].concat()
    }

    /// Inverse of [`pack`](Self::pack) for the given layout.
    pub fn unpack(x: &[f64], n: usize, nb: usize, step_index: usize, time: f64) -> Self {
        assert_eq!(x.len(), 2 * (n + nb));
        RobinState {
            u: x[..n].to_vec(),
            v: x[n..n + nb].to_vec(),
            xi: x[n + nb..2 * n + nb].to_vec(),
            phi: x[2 * n + nb..].to_vec(),
            step_index,
            time,
        }
    }

    fn check(&self, disc: &Discretization) -> Result<()> {
        let (n, nb) = (disc.n_nodes(), disc.n_boundary());
        check_len("U", n, self.u.len())?;
        check_len("V", nb, self.v.len())?;
        check_len("Xi", n, self.xi.len())?;
        check_len("Phi", nb, self.phi.len())
    }

    pub fn bulk_mass(&self, disc: &Discretization) -> f64 {
        disc.ops.m.integrate(&self.u)
    }

    pub fn surface_mass(&self, disc: &Discretization) -> f64 {
        disc.ops.m_gamma.integrate(&self.v)
    }
}

fn check_penalty(params: &ModelParams) -> Result<()> {
    if params.k_penalty > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("K must be positive, got {}", params.k_penalty)))
    }
}

/// Residual of the nonlinear system at `next`, given the previous step.
pub fn robin_residual(
    next: &RobinState,
    prev: &RobinState,
    params: &ModelParams,
    disc: &Discretization,
) -> Result<Vec<f64>> {
    check_penalty(params)?;
    next.check(disc)?;
    prev.check(disc)?;
    let x = next.pack();
    residual_packed(&x, prev, params, disc)
}

fn residual_packed(x: &[f64], prev: &RobinState, params: &ModelParams, disc: &Discretization) -> Result<Vec<f64>> {
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    check_len("Robin unknown vector", 2 * (n + nb), x.len())?;
    let (u, rest) = x.split_at(n);
    let (v, rest) = rest.split_at(nb);
    let (xi, phi) = rest.split_at(n);
    let ops = &disc.ops;
    let (m, mg) = (ops.m.diagonal(), ops.m_gamma.diagonal());
    let (tau, eps, delta, kinv) = (params.tau, params.eps, params.delta, 1.0 / params.k_penalty);
    let nl = eval_nonlinearities(u, v, params, disc)?;

    let mut res = Vec::with_capacity(x.len());

    let a_xi = ops.a.mul_vec(xi);
    res.extend((0..n).map(|i| m[i] * (u[i] - prev.u[i]) + tau * a_xi[i]));

    let ag_phi = ops.a_gamma.mul_vec(phi);
    res.extend((0..nb).map(|b| mg[b] * (v[b] - prev.v[b]) + tau * ag_phi[b]));

    let a_u = ops.a.mul_vec(u);
    let mut block3: Vec<f64> = (0..n)
        .map(|i| eps * a_u[i] + nl.f[i] / eps - m[i] * xi[i])
        .collect();
    for (b, &node) in disc.mesh.boundary_nodes().iter().enumerate() {
        block3[node] += kinv * (mg[b] * u[node] - nl.h[b]);
    }
    res.extend(block3);

    let ag_v = ops.a_gamma.mul_vec(v);
    let kd = params.kappa * delta;
    res.extend((0..nb).map(|b| kd * ag_v[b] + nl.g[b] / delta - mg[b] * phi[b] + kinv * nl.j[b]));
    Ok(res)
}

/// Analytic jacobian of [`robin_residual`] with respect to `[U | V | Ξ | Φ]`.
/// The sparsity pattern does not depend on the state or on `κ`.
pub fn robin_jacobian(next: &RobinState, params: &ModelParams, disc: &Discretization) -> Result<CsrMatrix> {
    check_penalty(params)?;
    next.check(disc)?;
    jacobian_packed(&next.pack(), params, disc)
}

fn jacobian_packed(x: &[f64], params: &ModelParams, disc: &Discretization) -> Result<CsrMatrix> {
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    check_len("Robin unknown vector", 2 * (n + nb), x.len())?;
    let (u, v) = (&x[..n], &x[n..n + nb]);
    let (v0, xi0, phi0) = (n, n + nb, 2 * n + nb);
    let ops = &disc.ops;
    let (m, mg) = (ops.m.diagonal(), ops.m_gamma.diagonal());
    let (tau, eps, delta, kinv) = (params.tau, params.eps, params.delta, 1.0 / params.k_penalty);
    let kd = params.kappa * delta;
    let tr = params.transmission;
    let bnodes = disc.mesh.boundary_nodes();

    let mut t = Vec::with_capacity(2 * ops.a.nnz() + 2 * ops.a_gamma.nnz() + 4 * n + 8 * nb);

    // (i)
    for i in 0..n {
        t.push((i, i, m[i]));
    }
    t.extend(ops.a.triplets().map(|(r, c, a)| (r, xi0 + c, tau * a)));

    // (ii)
    for b in 0..nb {
        t.push((v0 + b, v0 + b, mg[b]));
    }
    t.extend(ops.a_gamma.triplets().map(|(r, c, a)| (v0 + r, phi0 + c, tau * a)));

    // (iii)
    t.extend(ops.a.triplets().map(|(r, c, a)| (xi0 + r, c, eps * a)));
    for i in 0..n {
        t.push((xi0 + i, i, m[i] * params.potential_f.deriv2(u[i]) / eps));
        t.push((xi0 + i, xi0 + i, -m[i]));
    }
    for (b, &node) in bnodes.iter().enumerate() {
        t.push((xi0 + node, node, kinv * mg[b]));
        t.push((xi0 + node, v0 + b, -kinv * mg[b] * tr.deriv1(v[b])));
    }

    // (iv)
    t.extend(ops.a_gamma.triplets().map(|(r, c, a)| (phi0 + r, v0 + c, kd * a)));
    for (b, &node) in bnodes.iter().enumerate() {
        let (vb, w) = (v[b], mg[b]);
        let (h, h1, h2) = (tr.value(vb), tr.deriv1(vb), tr.deriv2(vb));
        t.push((phi0 + b, node, -kinv * w * h1));
        let diag = w * params.potential_g.deriv2(vb) / delta + kinv * w * (h2 * (h - u[node]) + h1 * h1);
        t.push((phi0 + b, v0 + b, diag));
        t.push((phi0 + b, phi0 + b, -w));
    }

    Ok(CsrMatrix::from_triplets(x.len(), x.len(), &t))
}

/// Advances a Robin run by one step, reusing the Newton solver's symbolic
/// factorization between calls.
#[derive(Debug)]
pub struct RobinStepper<'a> {
    disc: &'a Discretization,
    params: ModelParams,
    newton: NewtonSolver,
}

impl<'a> RobinStepper<'a> {
    pub fn new(disc: &'a Discretization, params: ModelParams, config: NewtonConfig) -> Result<Self> {
        params.check_robin()?;
        config.validate()?;
        Ok(RobinStepper {
            disc,
            params,
            newton: NewtonSolver::new(config),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn step(&mut self, prev: &RobinState) -> Result<StepOutcome<RobinState>> {
        let step = prev.step_index + 1;
        let annotate = |e: Error| Error::Step {
            step,
            source: Box::new(e),
        };
        prev.check(self.disc).map_err(annotate)?;
        let (disc, params) = (self.disc, &self.params);
        let out = self
            .newton
            .solve(
                |x| residual_packed(x, prev, params, disc),
                |x| jacobian_packed(x, params, disc),
                prev.pack(),
            )
            .map_err(annotate)?;
        let state = RobinState::unpack(
            &out.solution,
            disc.n_nodes(),
            disc.n_boundary(),
            step,
            step as f64 * params.tau,
        );
        Ok(StepOutcome {
            state,
            newton_iters: out.iterations,
            residual: out.final_residual_norm,
            residual_history: out.residual_history,
        })
    }
}

/// One implicit step of the Robin scheme, warm-started from `prev`.
pub fn robin_step(
    prev: &RobinState,
    params: &ModelParams,
    disc: &Discretization,
    config: NewtonConfig,
) -> Result<StepOutcome<RobinState>> {
    RobinStepper::new(disc, params.clone(), config)?.step(prev)
}
