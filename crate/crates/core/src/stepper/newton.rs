use crate::error::{Error, Result};
use crate::linsolve::LinearSolver;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Absolute threshold on `‖r‖∞`.
    pub abs_tol: f64,
    /// Reduction factor relative to the initial residual.
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Step halvings tried before giving up on an iteration.
    pub max_halvings: usize,
    /// A correction with `‖Δ‖∞ ≤ step_tol (1 + ‖x‖∞)` means the iteration
    /// has reached the rounding floor and is accepted as converged.
    pub step_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            abs_tol: 1e-11,
            rel_tol: 1e-12,
            max_iters: 50,
            max_halvings: 10,
            step_tol: 1e-13,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.step_tol >= 0.0) {
            return Err(Error::InvalidParameter("newton tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("newton max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub final_residual_norm: f64,
    /// `‖r‖∞` before the first and after every accepted iteration.
    pub residual_history: Vec<f64>,
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Residual level below which evaluation rounding dominates, estimated as
/// a multiple of `eps · max_i Σ_j |J_ij x_j|`.
fn rounding_floor(jac: &CsrMatrix, x: &[f64]) -> f64 {
    let mut rows = vec![0.0; jac.nrows()];
    for (r, c, a) in jac.triplets() {
        rows[r] += (a * x[c]).abs();
    }
    10.0 * f64::EPSILON * max_norm(&rows)
}

/// Damped Newton iteration holding a reusable sparse factorization.
///
/// A trial step `x + λΔ` is accepted when it lowers `‖r‖∞`, or when the
/// simplified correction `J(x)⁻¹ r(x + λΔ)` is at most `(1 − λ/2) ‖Δ‖∞`.
/// The second test does not depend on how the residual rows are scaled.
/// Iteration stops once `‖r‖∞` falls below the tolerances or below the
/// rounding floor of the current jacobian, whichever is larger.
#[derive(Debug, Default)]
pub struct NewtonSolver {
    pub config: NewtonConfig,
    linear: LinearSolver,
}

impl NewtonSolver {
    fn contracts(&mut self, r_trial: &[f64], lambda: f64, delta_norm: f64) -> Result<bool> {
        let rhs: Vec<f64> = r_trial.iter().map(|v| -v).collect();
        match self.linear.solve(&rhs) {
            Ok(simplified) => Ok(max_norm(&simplified) <= (1.0 - 0.5 * lambda) * delta_norm),
            Err(Error::SingularJacobian) => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub fn new(config: NewtonConfig) -> Self {
        NewtonSolver {
            config,
            linear: LinearSolver::new(),
        }
    }

    pub fn solve<R, J>(&mut self, mut residual: R, mut jacobian: J, initial_guess: Vec<f64>) -> Result<NewtonOutcome>
    where
        R: FnMut(&[f64]) -> Result<Vec<f64>>,
        J: FnMut(&[f64]) -> Result<CsrMatrix>,
    {
        let cfg = self.config;
        cfg.validate()?;
        let mut x = initial_guess;
        let mut r = residual(&x)?;
        let mut norm = max_norm(&r);
        let threshold = cfg.abs_tol.max(cfg.rel_tol * norm);
        let mut history = vec![norm];

        let done = |x: Vec<f64>, iterations, norm, history| {
            Ok(NewtonOutcome {
                solution: x,
                iterations,
                final_residual_norm: norm,
                residual_history: history,
            })
        };

        if norm <= threshold {
            return done(x, 0, norm, history);
        }
        for iter in 1..=cfg.max_iters {
            if !norm.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: iter - 1,
                    residual: norm,
                });
            }
            let jac = jacobian(&x)?;
            if jac.nrows() != x.len() || jac.ncols() != x.len() {
                return Err(Error::mismatch("jacobian", x.len(), jac.nrows()));
            }
            let floor = threshold.max(rounding_floor(&jac, &x));
            self.linear.factorize(&jac)?;
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = self.linear.solve(&rhs)?;
            let tiny = max_norm(&delta) <= cfg.step_tol * (1.0 + max_norm(&x));

            let delta_norm = max_norm(&delta);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=cfg.max_halvings {
                let trial: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + lambda * di).collect();
                let r_trial = residual(&trial)?;
                let n_trial = max_norm(&r_trial);
                if n_trial < norm || (n_trial.is_finite() && self.contracts(&r_trial, lambda, delta_norm)?) {
                    accepted = Some((trial, r_trial, n_trial));
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((trial, r_trial, n_trial)) => {
                    x = trial;
                    r = r_trial;
                    norm = n_trial;
                    history.push(norm);
                    if norm <= floor || tiny {
                        return done(x, iter, norm, history);
                    }
                }
                None if tiny || norm <= floor => return done(x, iter, norm, history),
                None => {
                    return Err(Error::LineSearchStalled {
                        iteration: iter,
                        residual: norm,
                    })
                }
            }
        }
        Err(Error::NoConvergence {
            iterations: cfg.max_iters,
            residual: norm,
        })
    }
}

/// Solves `residual(x) = 0` from `initial_guess`; each iteration solves
/// `J Δ = −r` by sparse LU and damps the step as described on [`NewtonSolver`].
pub fn newton_solve<R, J>(residual: R, jacobian: J, initial_guess: Vec<f64>, config: NewtonConfig) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<CsrMatrix>,
{
    NewtonSolver::new(config).solve(residual, jacobian, initial_guess)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_jac(d: f64) -> CsrMatrix {
        CsrMatrix::from_triplets(1, 1, &[(0, 0, d)])
    }

    #[test]
    fn square_root_of_four() {
        let out = newton_solve(
            |x| Ok(vec![x[0] * x[0] - 4.0]),
            |x| Ok(scalar_jac(2.0 * x[0])),
            vec![3.0],
            NewtonConfig::default(),
        )
        .unwrap();
        assert!((out.solution[0] - 2.0).abs() < 1e-11);
        assert!(out.iterations <= 6, "took {}", out.iterations);
    }

    #[test]
    fn affine_map_takes_one_iteration() {
        let b = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)],
        );
        let rhs = [1.0, 2.0, 3.0];
        let out = newton_solve(
            |x| Ok(b.mul_vec(x).iter().zip(rhs).map(|(a, c)| a - c).collect()),
            |_| Ok(b.clone()),
            vec![0.0; 3],
            NewtonConfig::default(),
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn no_real_root_is_an_error() {
        let res = newton_solve(
            |x| Ok(vec![x[0] * x[0] + 1.0]),
            |x| Ok(scalar_jac(2.0 * x[0])),
            vec![0.7],
            NewtonConfig::default(),
        );
        assert!(matches!(
            res,
            Err(Error::NoConvergence { .. }) | Err(Error::LineSearchStalled { .. })
        ));
    }

    #[test]
    fn zero_jacobian_is_singular() {
        let res = newton_solve(
            |x| Ok(vec![x[0] * x[0] * x[0] + 1.0]),
            |x| Ok(scalar_jac(3.0 * x[0] * x[0])),
            vec![0.0],
            NewtonConfig::default(),
        );
        assert!(matches!(res, Err(Error::SingularJacobian)));
    }

    #[test]
    fn already_converged_guess_returns_immediately() {
        let out = newton_solve(
            |x| Ok(vec![x[0] - 1.0]),
            |_| Ok(scalar_jac(1.0)),
            vec![1.0],
            NewtonConfig::default(),
        )
        .unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = NewtonConfig {
            max_iters: 0,
            ..NewtonConfig::default()
        };
        assert!(newton_solve(|x| Ok(x.to_vec()), |_| Ok(scalar_jac(1.0)), vec![1.0], cfg).is_err());
    }
}
