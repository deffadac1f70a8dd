//! Sparse direct solves (LU with partial pivoting, backed by `faer`).
//!
//! The symbolic analysis is cached and reused while the sparsity pattern of
//! the incoming matrices stays the same, which is the case across Newton
//! iterations and time steps of one run.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::ColMut;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Column-compressed copy of a [`CsrMatrix`].
struct Csc {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Csc {
    fn from_csr(a: &CsrMatrix) -> Self {
        let (nrows, ncols) = (a.nrows(), a.ncols());
        let mut col_ptr = vec![0usize; ncols + 1];
        for &c in a.col_idx() {
            col_ptr[c + 1] += 1;
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut next = col_ptr.clone();
        let mut row_idx = vec![0usize; a.nnz()];
        let mut values = vec![0.0; a.nnz()];
        for (r, c, v) in a.triplets() {
            row_idx[next[c]] = r;
            values[next[c]] = v;
            next[c] += 1;
        }
        Csc {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    fn symbolic(&self) -> SymbolicSparseColMatRef<'_, usize> {
        SymbolicSparseColMatRef::new_checked(self.nrows, self.ncols, &self.col_ptr, None, &self.row_idx)
    }
}

#[derive(Default)]
pub struct LinearSolver {
    cached: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    factor: Option<Lu<usize, f64>>,
}

impl std::fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSolver")
            .field("has_symbolic", &self.cached.is_some())
            .field("has_factor", &self.factor.is_some())
            .finish()
    }
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Factorizes `a`, replacing any previous factorization.
    pub fn factorize(&mut self, a: &CsrMatrix) -> Result<()> {
        if a.nrows() != a.ncols() {
            return Err(Error::mismatch("square matrix", a.nrows(), a.ncols()));
        }
        self.factor = None;
        let csc = Csc::from_csr(a);
        let reuse = matches!(&self.cached, Some((p, r, _)) if *p == csc.col_ptr && *r == csc.row_idx);
        if !reuse {
            let symbolic = SymbolicLu::try_new(csc.symbolic()).map_err(|_| Error::SingularJacobian)?;
            self.cached = Some((csc.col_ptr.clone(), csc.row_idx.clone(), symbolic));
        }
        let symbolic = self.cached.as_ref().map(|(_, _, s)| s.clone()).expect("symbolic cached");
        let mat = SparseColMatRef::new(csc.symbolic(), &csc.values);
        let lu = Lu::try_new_with_symbolic(symbolic, mat).map_err(|_| Error::SingularJacobian)?;
        self.factor = Some(lu);
        Ok(())
    }

    /// Solves with the current factorization. Non-finite results (zero
    /// pivots) are reported as a singular matrix.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let lu = self.factor.as_ref().ok_or(Error::SingularJacobian)?;
        let mut x = rhs.to_vec();
        lu.solve_in_place(ColMut::from_slice_mut(&mut x));
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::SingularJacobian)
        }
    }
}

/// One-shot solve of `a x = b`.
pub fn solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::mismatch("right-hand side", a.nrows(), b.len()));
    }
    let mut solver = LinearSolver::new();
    solver.factorize(a)?;
    solver.solve(b)
}
