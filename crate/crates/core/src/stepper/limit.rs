//! Fully discrete scheme for the limit model `u|_Γ = α v + β`.
//!
//! Unknowns are `[U | Ξ | Φ]`; residual rows are the bulk mass balance
//! (`n` rows), the surface mass balance (`n_bnd` rows) and the bulk
//! chemical potential equation with boundary terms lifted into the boundary
//! rows (`n` rows).

use crate::assembly::Discretization;
use crate::error::{check_len, Error, Result};
use crate::model::{bulk_potential_vector, eval_limit_nonlinearity, ModelParams};
use crate::sparse::CsrMatrix;

use super::newton::{NewtonConfig, NewtonSolver};
use super::StepOutcome;

#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub u: Vec<f64>,
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub step_index: usize,
    pub time: f64,
}

impl LimitState {
    pub fn initial(u: Vec<f64>, n_boundary: usize) -> Self {
        let n = u.len();
        LimitState {
            u,
            xi: vec![0.0; n],
            phi: vec![0.0; n_boundary],
            step_index: 0,
            time: 0.0,
        }
    }

    pub fn pack(&self) -> Vec<f64> {
        [&self.u[..], &self.xi, &self.phi].concat()
    }

    pub fn unpack(x: &[f64], n: usize, nb: usize, step_index: usize, time: f64) -> Self {
        assert_eq!(x.len(), 2 * n + nb);
        LimitState {
            u: x[..n].to_vec(),
            xi: x[n..2 * n].to_vec(),
            phi: x[2 * n..].to_vec(),
            step_index,
            time,
        }
    }

    fn check(&self, disc: &Discretization) -> Result<()> {
        let (n, nb) = (disc.n_nodes(), disc.n_boundary());
        check_len("U", n, self.u.len())?;
        check_len("Xi", n, self.xi.len())?;
        check_len("Phi", nb, self.phi.len())
    }

    pub fn bulk_mass(&self, disc: &Discretization) -> f64 {
        disc.ops.m.integrate(&self.u)
    }

    /// Lumped surface mass of the trace `U|_Γ`.
    pub fn surface_mass(&self, disc: &Discretization) -> f64 {
        disc.ops.m_gamma.integrate(&disc.mesh.trace(&self.u))
    }

    /// Surface phase `(U|_Γ − β)/α`.
    pub fn surface_phase(&self, disc: &Discretization, alpha: f64, beta: f64) -> Vec<f64> {
        disc.mesh
            .boundary_nodes()
            .iter()
            .map(|&i| (self.u[i] - beta) / alpha)
            .collect()
    }
}

fn check_alpha(params: &ModelParams) -> Result<()> {
    if params.alpha == 0.0 {
        Err(Error::InvalidParameter("alpha must be nonzero".into()))
    } else {
        Ok(())
    }
}

pub fn limit_residual(
    next: &LimitState,
    prev: &LimitState,
    params: &ModelParams,
    disc: &Discretization,
) -> Result<Vec<f64>> {
    check_alpha(params)?;
    next.check(disc)?;
    prev.check(disc)?;
    residual_packed(&next.pack(), prev, params, disc)
}

fn residual_packed(x: &[f64], prev: &LimitState, params: &ModelParams, disc: &Discretization) -> Result<Vec<f64>> {
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    check_len("limit unknown vector", 2 * n + nb, x.len())?;
    let (u, rest) = x.split_at(n);
    let (xi, phi) = rest.split_at(n);
    let ops = &disc.ops;
    let (m, mg) = (ops.m.diagonal(), ops.m_gamma.diagonal());
    let (tau, eps, delta, alpha) = (params.tau, params.eps, params.delta, params.alpha);
    let bnodes = disc.mesh.boundary_nodes();

    let mut res = Vec::with_capacity(x.len());

    let a_xi = ops.a.mul_vec(xi);
    res.extend((0..n).map(|i| m[i] * (u[i] - prev.u[i]) + tau * a_xi[i]));

    let ag_phi = ops.a_gamma.mul_vec(phi);
    res.extend(
        bnodes
            .iter()
            .enumerate()
            .map(|(b, &node)| mg[b] * (u[node] - prev.u[node]) + tau * ag_phi[b]),
    );

    let f = bulk_potential_vector(u, params, &ops.m);
    let g_tilde = eval_limit_nonlinearity(u, params, disc)?;
    let a_u = ops.a.mul_vec(u);
    let ag_trace = ops.a_gamma.mul_vec(&disc.mesh.trace(u));
    let surf_stiff = params.kappa * delta / (alpha * alpha);
    let mut block3: Vec<f64> = (0..n).map(|i| eps * a_u[i] + f[i] / eps - m[i] * xi[i]).collect();
    for (b, &node) in bnodes.iter().enumerate() {
        block3[node] += surf_stiff * ag_trace[b] + g_tilde[b] / (alpha * delta) - mg[b] * phi[b] / (alpha * alpha);
    }
    res.extend(block3);
    Ok(res)
}

/// Analytic jacobian of [`limit_residual`] with respect to `[U | Ξ | Φ]`.
pub fn limit_jacobian(next: &LimitState, params: &ModelParams, disc: &Discretization) -> Result<CsrMatrix> {
    check_alpha(params)?;
    next.check(disc)?;
    jacobian_packed(&next.pack(), params, disc)
}

fn jacobian_packed(x: &[f64], params: &ModelParams, disc: &Discretization) -> Result<CsrMatrix> {
    let (n, nb) = (disc.n_nodes(), disc.n_boundary());
    check_len("limit unknown vector", 2 * n + nb, x.len())?;
    let u = &x[..n];
    let (xi0, phi0) = (n, 2 * n);
    let (row2, row3) = (n, n + nb);
    let ops = &disc.ops;
    let (m, mg) = (ops.m.diagonal(), ops.m_gamma.diagonal());
    let (tau, eps, delta, alpha, beta) = (params.tau, params.eps, params.delta, params.alpha, params.beta);
    let alpha2 = alpha * alpha;
    let surf_stiff = params.kappa * delta / alpha2;
    let bnodes = disc.mesh.boundary_nodes();

    let mut t = Vec::with_capacity(2 * ops.a.nnz() + 2 * ops.a_gamma.nnz() + 4 * n + 4 * nb);

    // (i)
    for i in 0..n {
        t.push((i, i, m[i]));
    }
    t.extend(ops.a.triplets().map(|(r, c, a)| (r, xi0 + c, tau * a)));

    // (ii)
    for (b, &node) in bnodes.iter().enumerate() {
        t.push((row2 + b, node, mg[b]));
    }
    t.extend(ops.a_gamma.triplets().map(|(r, c, a)| (row2 + r, phi0 + c, tau * a)));

    // (iii)
    t.extend(ops.a.triplets().map(|(r, c, a)| (row3 + r, c, eps * a)));
    t.extend(
        ops.a_gamma
            .triplets()
            .map(|(r, c, a)| (row3 + bnodes[r], bnodes[c], surf_stiff * a)),
    );
    for i in 0..n {
        t.push((row3 + i, i, m[i] * params.potential_f.deriv2(u[i]) / eps));
        t.push((row3 + i, xi0 + i, -m[i]));
    }
    for (b, &node) in bnodes.iter().enumerate() {
        let g2 = params.potential_g.deriv2((u[node] - beta) / alpha);
        t.push((row3 + node, node, mg[b] * g2 / (alpha2 * delta)));
        t.push((row3 + node, phi0 + b, -mg[b] / alpha2));
    }

    Ok(CsrMatrix::from_triplets(x.len(), x.len(), &t))
}

#[derive(Debug)]
pub struct LimitStepper<'a> {
    disc: &'a Discretization,
    params: ModelParams,
    newton: NewtonSolver,
}

impl<'a> LimitStepper<'a> {
    pub fn new(disc: &'a Discretization, params: ModelParams, config: NewtonConfig) -> Result<Self> {
        params.check_limit()?;
        config.validate()?;
        Ok(LimitStepper {
            disc,
            params,
            newton: NewtonSolver::new(config),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn step(&mut self, prev: &LimitState) -> Result<StepOutcome<LimitState>> {
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
        let state = LimitState::unpack(
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

/// One implicit step of the limit scheme, warm-started from `prev`.
pub fn limit_step(
    prev: &LimitState,
    params: &ModelParams,
    disc: &Discretization,
    config: NewtonConfig,
) -> Result<StepOutcome<LimitState>> {
    LimitStepper::new(disc, params.clone(), config)?.step(prev)
}
