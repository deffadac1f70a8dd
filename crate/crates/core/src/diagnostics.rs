//! Discrete space-time norms, experimental orders of convergence, the
//! K-sweep error table and dual norms from discrete Neumann problems.

use crate::assembly::{Discretization, LumpedMass};
use crate::error::{check_len, Error, Result};
use crate::linsolve;
use crate::mesh::Mesh;
use crate::model::Transmission;
use crate::sparse::{CsrMatrix, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Bulk,
    Surface,
}

/// Nodal snapshots at steps `1..=N` of a run with step `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    pub tau: f64,
    pub snapshots: Vec<Vec<f64>>,
    pub location: Location,
}

impl FieldSeries {
    pub fn new(tau: f64, location: Location) -> Self {
        FieldSeries {
            tau,
            snapshots: Vec::new(),
            location,
        }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.snapshots.is_empty() {
            return Err(Error::EmptySeries);
        }
        for s in &self.snapshots {
            check_len("snapshot", dim, s.len())?;
        }
        Ok(())
    }

    /// Snapshot-wise `self − other`.
    pub fn difference(&self, other: &FieldSeries) -> Result<FieldSeries> {
        if self.len() != other.len() || self.location != other.location {
            return Err(Error::GridMismatch(format!(
                "series of {} and {} snapshots",
                self.len(),
                other.len()
            )));
        }
        if self.tau != other.tau {
            return Err(Error::GridMismatch(format!("tau {} vs {}", self.tau, other.tau)));
        }
        let snapshots = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| {
                check_len("snapshot", a.len(), b.len())?;
                Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
            })
            .collect::<Result<_>>()?;
        Ok(FieldSeries {
            tau: self.tau,
            snapshots,
            location: self.location,
        })
    }

    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> FieldSeries {
        FieldSeries {
            tau: self.tau,
            snapshots: self.snapshots.iter().map(|s| f(s)).collect(),
            location: self.location,
        }
    }
}

/// `τ^{1/p} [Σ_i (f_iᵀ M f_i)^{p/2}]^{1/p}` for `p ∈ {2, 4}`.
pub fn lp_l2_norm(series: &FieldSeries, p: u32, mass: &LumpedMass) -> Result<f64> {
    if p != 2 && p != 4 {
        return Err(Error::InvalidParameter(format!("time exponent must be 2 or 4, got {p}")));
    }
    series.check(mass.len())?;
    let pf = f64::from(p);
    let sum: f64 = series
        .snapshots
        .iter()
        .map(|f| {
            let sq: f64 = mass.diagonal().iter().zip(f).map(|(m, x)| m * x * x).sum();
            sq.powf(pf / 2.0)
        })
        .sum();
    Ok(series.tau.powf(1.0 / pf) * sum.powf(1.0 / pf))
}

/// `√(τ Σ_i [f_iᵀ M f_i + f_iᵀ A f_i])`: lumped L² part plus stiffness seminorm.
pub fn l2_h1_norm(series: &FieldSeries, mass: &LumpedMass, stiffness: &SparseOperator) -> Result<f64> {
    series.check(mass.len())?;
    check_len("stiffness", mass.len(), stiffness.nrows())?;
    let sum: f64 = series
        .snapshots
        .iter()
        .map(|f| {
            let l2: f64 = mass.diagonal().iter().zip(f).map(|(m, x)| m * x * x).sum();
            l2 + stiffness.quad_form(f)
        })
        .sum();
    Ok((series.tau * sum).sqrt())
}

/// `log(e1/e2) / log(K1/K2)`.
pub fn eoc(e1: f64, k1: f64, e2: f64, k2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0 && k2 > 0.0 && k1 > k2) {
        return Err(Error::InvalidParameter(format!(
            "eoc needs positive errors and K1 > K2 > 0 (e1={e1}, K1={k1}, e2={e2}, K2={k2})"
        )));
    }
    Ok((e1 / e2).ln() / (k1 / k2).ln())
}

/// Bulk and surface series of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub u: FieldSeries,
    pub v: FieldSeries,
}

impl RunSeries {
    /// Reference series of a limit run, with `v = (U|_Γ − β)/α`.
    pub fn from_limit(u: FieldSeries, alpha: f64, beta: f64, mesh: &Mesh) -> Self {
        let v = FieldSeries {
            tau: u.tau,
            snapshots: u
                .snapshots
                .iter()
                .map(|s| mesh.trace(s).iter().map(|x| (x - beta) / alpha).collect())
                .collect(),
            location: Location::Surface,
        };
        RunSeries { u, v }
    }

    /// Transmission defect `U|_Γ − H(V)` per snapshot.
    fn defect(&self, transmission: &Transmission, mesh: &Mesh) -> FieldSeries {
        FieldSeries {
            tau: self.u.tau,
            snapshots: self
                .u
                .snapshots
                .iter()
                .zip(&self.v.snapshots)
                .map(|(u, v)| {
                    mesh.boundary_nodes()
                        .iter()
                        .zip(v)
                        .map(|(&i, &vb)| u[i] - transmission.value(vb))
                        .collect()
                })
                .collect(),
            location: Location::Surface,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobinRun {
    pub k: f64,
    pub series: RunSeries,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTableRow {
    pub k: f64,
    pub err_l2h1_bulk: f64,
    pub eoc_1: Option<f64>,
    pub err_l4l2_bulk: f64,
    pub eoc_2: Option<f64>,
    pub err_l2_sigma: f64,
    pub eoc_3: Option<f64>,
    pub err_l2h1_surf: f64,
    pub eoc_4: Option<f64>,
    pub err_l4l2_surf: f64,
    pub eoc_5: Option<f64>,
}

impl ErrorTableRow {
    pub fn errors(&self) -> [f64; 5] {
        [
            self.err_l2h1_bulk,
            self.err_l4l2_bulk,
            self.err_l2_sigma,
            self.err_l2h1_surf,
            self.err_l4l2_surf,
        ]
    }

    pub fn eocs(&self) -> [Option<f64>; 5] {
        [self.eoc_1, self.eoc_2, self.eoc_3, self.eoc_4, self.eoc_5]
    }
}

/// Errors of each Robin run against the reference, one row per run, with
/// EOCs between consecutive rows.
///
/// The bulk columns measure `u^K − u`, the surface columns `v^K − v`. The
/// L²(Σ_T) column measures the change of the transmission defect
/// `u|_Γ − H(v)` relative to the reference; for a limit reference the
/// reference defect vanishes and the column is `u^K − (α v^K + β)`.
pub fn error_table(
    reference: &RunSeries,
    runs: &[RobinRun],
    transmission: &Transmission,
    disc: &Discretization,
) -> Result<Vec<ErrorTableRow>> {
    let ops = &disc.ops;
    let ref_defect = reference.defect(transmission, &disc.mesh);
    let mut rows: Vec<ErrorTableRow> = Vec::with_capacity(runs.len());
    for run in runs {
        let du = run.series.u.difference(&reference.u)?;
        let dv = run.series.v.difference(&reference.v)?;
        let dd = run.series.defect(transmission, &disc.mesh).difference(&ref_defect)?;
        let mut row = ErrorTableRow {
            k: run.k,
            err_l2h1_bulk: l2_h1_norm(&du, &ops.m, &ops.a)?,
            eoc_1: None,
            err_l4l2_bulk: lp_l2_norm(&du, 4, &ops.m)?,
            eoc_2: None,
            err_l2_sigma: lp_l2_norm(&dd, 2, &ops.m_gamma)?,
            eoc_3: None,
            err_l2h1_surf: l2_h1_norm(&dv, &ops.m_gamma, &ops.a_gamma)?,
            eoc_4: None,
            err_l4l2_surf: lp_l2_norm(&dv, 4, &ops.m_gamma)?,
            eoc_5: None,
        };
        if let Some(prev) = rows.last() {
            let rate = |e1: f64, e2: f64| eoc(e1, prev.k, e2, row.k).ok();
            row.eoc_1 = rate(prev.err_l2h1_bulk, row.err_l2h1_bulk);
            row.eoc_2 = rate(prev.err_l4l2_bulk, row.err_l4l2_bulk);
            row.eoc_3 = rate(prev.err_l2_sigma, row.err_l2_sigma);
            row.eoc_4 = rate(prev.err_l2h1_surf, row.err_l2h1_surf);
            row.eoc_5 = rate(prev.err_l4l2_surf, row.err_l4l2_surf);
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualNorm {
    pub theta: Vec<f64>,
    pub dual_norm: f64,
}

/// Solves the discrete Neumann problem `A θ = M φ` with lumped mean of `θ`
/// fixed to zero (one bordering row/column) and returns `√(θᵀ A θ)`.
pub fn neumann_dual_norm(phi: &[f64], mass: &LumpedMass, stiffness: &SparseOperator) -> Result<DualNorm> {
    let n = mass.len();
    check_len("dual norm data", n, phi.len())?;
    check_len("stiffness", n, stiffness.nrows())?;
    let mean = mass.integrate(phi);
    let scale = phi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if mean.abs() > 1e-10 * scale {
        return Err(Error::MeanNotZero { mean });
    }
    if scale == 0.0 {
        return Ok(DualNorm {
            theta: vec![0.0; n],
            dual_norm: 0.0,
        });
    }
    let mut triplets: Vec<(usize, usize, f64)> = stiffness.triplets().collect();
    for (i, &m) in mass.diagonal().iter().enumerate() {
        triplets.push((i, n, m));
        triplets.push((n, i, m));
    }
    let bordered = CsrMatrix::from_triplets(n + 1, n + 1, &triplets);
    let mut rhs = mass.apply(phi);
    rhs.push(0.0);
    let mut theta = linsolve::solve(&bordered, &rhs)?;
    theta.truncate(n);
    let dual_norm = stiffness.quad_form(&theta).max(0.0).sqrt();
    Ok(DualNorm { theta, dual_norm })
}

/// Norm of the mean-free pair `(u, v)` in the dual of the coupled
/// bulk-surface space: `√(‖∇N(u)‖² + ‖∇_Γ N_Γ(v)‖²)`.
pub fn h0dual_norm(u_err: &[f64], v_err: &[f64], disc: &Discretization) -> Result<f64> {
    let bulk = neumann_dual_norm(u_err, &disc.ops.m, &disc.ops.a)?;
    let surf = neumann_dual_norm(v_err, &disc.ops.m_gamma, &disc.ops.a_gamma)?;
    Ok(bulk.dual_norm.hypot(surf.dual_norm))
}
