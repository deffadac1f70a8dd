//! Potentials, transmission functions, parameters, nonlinearity vectors and
//! discrete energies for the Robin-regularised and the limit model.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::assembly::{Discretization, LumpedMass};
use crate::error::{check_len, Error, Result};

/// Bulk or surface potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// `¼ (s² − 1)²`
    DoubleWell,
}

impl Potential {
    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "double_well" => Some(Potential::DoubleWell),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Potential::DoubleWell => "double_well",
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Potential::DoubleWell => 0.25 * (s * s - 1.0).powi(2),
        }
    }

    pub fn deriv1(&self, s: f64) -> f64 {
        match self {
            Potential::DoubleWell => s * s * s - s,
        }
    }

    pub fn deriv2(&self, s: f64) -> f64 {
        match self {
            Potential::DoubleWell => 3.0 * s * s - 1.0,
        }
    }
}

/// Transmission relation `u|_Γ = H(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmission {
    /// `α s + β`
    Affine { alpha: f64, beta: f64 },
    /// `sin s`, inverted on `[−π/2, π/2]`
    Sin,
    /// `3 cos s + 2`, inverted on `[arccos(−1/3), π]`
    Cos3p2,
}

impl Transmission {
    pub fn from_label(label: &str, alpha: f64, beta: f64) -> Option<Self> {
        match label {
            "affine" => Some(Transmission::Affine { alpha, beta }),
            "sin" => Some(Transmission::Sin),
            "cos3p2" => Some(Transmission::Cos3p2),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Transmission::Affine { .. } => "affine",
            Transmission::Sin => "sin",
            Transmission::Cos3p2 => "cos3p2",
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Transmission::Affine { alpha, beta } => alpha * s + beta,
            Transmission::Sin => s.sin(),
            Transmission::Cos3p2 => 3.0 * s.cos() + 2.0,
        }
    }

    pub fn deriv1(&self, s: f64) -> f64 {
        match *self {
            Transmission::Affine { alpha, .. } => alpha,
            Transmission::Sin => s.cos(),
            Transmission::Cos3p2 => -3.0 * s.sin(),
        }
    }

    pub fn deriv2(&self, s: f64) -> f64 {
        match *self {
            Transmission::Affine { .. } => 0.0,
            Transmission::Sin => -s.sin(),
            Transmission::Cos3p2 => -3.0 * s.cos(),
        }
    }

    /// Interval `I` on which `H` is inverted.
    pub fn interval(&self) -> (f64, f64) {
        match self {
            Transmission::Affine { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Transmission::Sin => (-FRAC_PI_2, FRAC_PI_2),
            Transmission::Cos3p2 => ((-1.0f64 / 3.0).acos(), PI),
        }
    }

    /// Image `H(I)`.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Transmission::Affine { alpha, .. } if alpha != 0.0 => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Transmission::Affine { beta, .. } => (beta, beta),
            Transmission::Sin | Transmission::Cos3p2 => (-1.0, 1.0),
        }
    }

    /// Inverse of `H|_I`; `None` outside the range.
    pub fn inverse_on_interval(&self, u: f64) -> Option<f64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&u) {
            return None;
        }
        match *self {
            Transmission::Affine { alpha, beta } => {
                (alpha != 0.0).then(|| (u - beta) / alpha)
            }
            Transmission::Sin => Some(u.asin()),
            Transmission::Cos3p2 => Some(((u - 2.0) / 3.0).acos()),
        }
    }
}

/// Physical and numerical parameters shared by both models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub eps: f64,
    pub delta: f64,
    pub kappa: f64,
    /// Robin penalty `K`; unused by the limit model.
    pub k_penalty: f64,
    pub tau: f64,
    /// Affine coefficients of the limit model's transmission `u = α v + β`.
    pub alpha: f64,
    pub beta: f64,
    pub potential_f: Potential,
    pub potential_g: Potential,
    /// Transmission of the Robin model.
    pub transmission: Transmission,
}

impl ModelParams {
    /// Double-well potentials with affine transmission built from `alpha`/`beta`.
    pub fn double_well(eps: f64, delta: f64, kappa: f64, k_penalty: f64, tau: f64, alpha: f64, beta: f64) -> Self {
        ModelParams {
            eps,
            delta,
            kappa,
            k_penalty,
            tau,
            alpha,
            beta,
            potential_f: Potential::DoubleWell,
            potential_g: Potential::DoubleWell,
            transmission: Transmission::Affine { alpha, beta },
        }
    }

    fn check_common(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("eps", self.eps)?;
        positive("delta", self.delta)?;
        positive("tau", self.tau)?;
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be nonnegative, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    pub fn check_robin(&self) -> Result<()> {
        self.check_common()?;
        if !(self.k_penalty > 0.0 && self.k_penalty.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "K must be positive, got {}",
                self.k_penalty
            )));
        }
        if let Transmission::Affine { alpha: 0.0, .. } = self.transmission {
            return Err(Error::InvalidParameter("affine transmission needs alpha != 0".into()));
        }
        Ok(())
    }

    pub fn check_limit(&self) -> Result<()> {
        self.check_common()?;
        if self.alpha == 0.0 || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be nonzero".into()));
        }
        Ok(())
    }
}

/// Lumped nonlinearity vectors of the Robin system.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearities {
    /// `M_ii F′(U_i)`
    pub f: Vec<f64>,
    /// `M^Γ_ii G′(V_i)`
    pub g: Vec<f64>,
    /// `M^Γ_ii H(V_i)`
    pub h: Vec<f64>,
    /// `M^Γ_ii H′(V_i) (H(V_i) − U_i|_Γ)`
    pub j: Vec<f64>,
}

pub fn eval_nonlinearities(
    u: &[f64],
    v: &[f64],
    params: &ModelParams,
    disc: &Discretization,
) -> Result<Nonlinearities> {
    let (m, mg) = (&disc.ops.m, &disc.ops.m_gamma);
    check_len("bulk vector", m.len(), u.len())?;
    check_len("surface vector", mg.len(), v.len())?;
    let f = bulk_potential_vector(u, params, m);
    let tr = params.transmission;
    let mut g = Vec::with_capacity(v.len());
    let mut h = Vec::with_capacity(v.len());
    let mut j = Vec::with_capacity(v.len());
    for ((&node, &vi), &w) in disc.mesh.boundary_nodes().iter().zip(v).zip(mg.diagonal()) {
        let hv = tr.value(vi);
        g.push(w * params.potential_g.deriv1(vi));
        h.push(w * hv);
        j.push(w * tr.deriv1(vi) * (hv - u[node]));
    }
    Ok(Nonlinearities { f, g, h, j })
}

pub(crate) fn bulk_potential_vector(u: &[f64], params: &ModelParams, m: &LumpedMass) -> Vec<f64> {
    m.diagonal()
        .iter()
        .zip(u)
        .map(|(w, &ui)| w * params.potential_f.deriv1(ui))
        .collect()
}

/// `G̃(U)_i = M^Γ_ii G′((U_i − β)/α)` on boundary indices.
pub fn eval_limit_nonlinearity(u: &[f64], params: &ModelParams, disc: &Discretization) -> Result<Vec<f64>> {
    if params.alpha == 0.0 {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    check_len("bulk vector", disc.n_nodes(), u.len())?;
    let (alpha, beta) = (params.alpha, params.beta);
    Ok(disc
        .mesh
        .boundary_nodes()
        .iter()
        .zip(disc.ops.m_gamma.diagonal())
        .map(|(&node, w)| w * params.potential_g.deriv1((u[node] - beta) / alpha))
        .collect())
}

/// Parts of a discrete energy. `penalty` is zero for the limit model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Energy {
    pub bulk_grad: f64,
    pub bulk_pot: f64,
    pub surf_grad: f64,
    pub surf_pot: f64,
    pub penalty: f64,
    pub total: f64,
}

impl Energy {
    fn from_parts(bulk_grad: f64, bulk_pot: f64, surf_grad: f64, surf_pot: f64, penalty: f64) -> Self {
        Energy {
            bulk_grad,
            bulk_pot,
            surf_grad,
            surf_pot,
            penalty,
            total: bulk_grad + bulk_pot + surf_grad + surf_pot + penalty,
        }
    }
}

fn bulk_parts(u: &[f64], params: &ModelParams, disc: &Discretization) -> (f64, f64) {
    let grad = 0.5 * params.eps * disc.ops.a.quad_form(u);
    let pot: f64 = disc
        .ops
        .m
        .diagonal()
        .iter()
        .zip(u)
        .map(|(w, &s)| w * params.potential_f.value(s))
        .sum();
    (grad, pot / params.eps)
}

/// Energy of the Robin model: stiffness forms for the gradient terms,
/// lumped quadrature for potentials and penalty.
pub fn energy_robin(u: &[f64], v: &[f64], params: &ModelParams, disc: &Discretization) -> Result<Energy> {
    check_len("bulk vector", disc.n_nodes(), u.len())?;
    check_len("surface vector", disc.n_boundary(), v.len())?;
    let (bulk_grad, bulk_pot) = bulk_parts(u, params, disc);
    let surf_grad = 0.5 * params.delta * params.kappa * disc.ops.a_gamma.quad_form(v);
    let tr = params.transmission;
    let mut surf_pot = 0.0;
    let mut penalty = 0.0;
    for ((&node, &vi), &w) in disc
        .mesh
        .boundary_nodes()
        .iter()
        .zip(v)
        .zip(disc.ops.m_gamma.diagonal())
    {
        surf_pot += w * params.potential_g.value(vi);
        penalty += w * (tr.value(vi) - u[node]).powi(2);
    }
    Ok(Energy::from_parts(
        bulk_grad,
        bulk_pot,
        surf_grad,
        surf_pot / params.delta,
        penalty / (2.0 * params.k_penalty),
    ))
}

/// Energy of the limit model, with the surface phase `(u − β)/α`.
pub fn energy_limit(u: &[f64], params: &ModelParams, disc: &Discretization) -> Result<Energy> {
    if params.alpha == 0.0 {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    check_len("bulk vector", disc.n_nodes(), u.len())?;
    let (bulk_grad, bulk_pot) = bulk_parts(u, params, disc);
    let trace = disc.mesh.trace(u);
    let alpha2 = params.alpha * params.alpha;
    let surf_grad = 0.5 * params.delta * params.kappa / alpha2 * disc.ops.a_gamma.quad_form(&trace);
    let surf_pot: f64 = trace
        .iter()
        .zip(disc.ops.m_gamma.diagonal())
        .map(|(&s, w)| w * params.potential_g.value((s - params.beta) / params.alpha))
        .sum();
    Ok(Energy::from_parts(
        bulk_grad,
        bulk_pot,
        surf_grad,
        surf_pot / params.delta,
        0.0,
    ))
}
