//! Bulk and surface P1 operators with lumped (vertex) mass.

use std::io::Write;

use crate::error::{check_len, Result};
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, SparseOperator};

/// Diagonal of a lumped mass matrix: the integral of each nodal basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedMass {
    diagonal: Vec<f64>,
}

impl LumpedMass {
    pub fn new(diagonal: Vec<f64>) -> Self {
        LumpedMass { diagonal }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Measure of the underlying domain (sum of the diagonal).
    pub fn total(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    /// `M f`, componentwise.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.diagonal.iter().zip(f).map(|(m, x)| m * x).collect()
    }

    /// Lumped integral `Σ m_i f_i`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.diagonal.iter().zip(f).map(|(m, x)| m * x).sum()
    }
}

/// `Σ_i m_i f_i g_i`.
pub fn lumped_inner_product(f: &[f64], g: &[f64], mass: &LumpedMass) -> Result<f64> {
    check_len("lumped inner product (f)", mass.len(), f.len())?;
    check_len("lumped inner product (g)", mass.len(), g.len())?;
    Ok(mass
        .diagonal
        .iter()
        .zip(f.iter().zip(g))
        .map(|(m, (a, b))| m * a * b)
        .sum())
}

/// The four matrices of the scheme. Surface objects are indexed by the
/// mesh's compressed boundary numbering.
#[derive(Debug, Clone)]
pub struct Operators {
    pub a: SparseOperator,
    pub m: LumpedMass,
    pub a_gamma: SparseOperator,
    pub m_gamma: LumpedMass,
}

pub fn assemble_operators(mesh: &Mesh) -> Operators {
    let n = mesh.n_nodes();
    let nodes = mesh.nodes();

    let mut triplets = Vec::with_capacity(9 * mesh.triangles().len());
    let mut m = vec![0.0; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.signed_area(t);
        // edge opposite vertex k, oriented counterclockwise
        let edges: [[f64; 2]; 3] = std::array::from_fn(|k| {
            let p = nodes[tri[(k + 1) % 3]];
            let q = nodes[tri[(k + 2) % 3]];
            [q[0] - p[0], q[1] - p[1]]
        });
        for a in 0..3 {
            for b in 0..3 {
                let dot = edges[a][0] * edges[b][0] + edges[a][1] * edges[b][1];
                triplets.push((tri[a], tri[b], dot / (4.0 * area)));
            }
            m[tri[a]] += area / 3.0;
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &triplets);

    let nb = mesh.n_boundary();
    let mut triplets = Vec::with_capacity(4 * nb);
    let mut m_gamma = vec![0.0; nb];
    for (s, &[p, q]) in mesh.boundary_segments().iter().enumerate() {
        let len = mesh.segment_length(s);
        let (i, j) = (
            mesh.bnd_of_node(p).expect("segment endpoint on boundary"),
            mesh.bnd_of_node(q).expect("segment endpoint on boundary"),
        );
        triplets.extend([
            (i, i, 1.0 / len),
            (i, j, -1.0 / len),
            (j, i, -1.0 / len),
            (j, j, 1.0 / len),
        ]);
        m_gamma[i] += 0.5 * len;
        m_gamma[j] += 0.5 * len;
    }
    let a_gamma = CsrMatrix::from_triplets(nb, nb, &triplets);

    Operators {
        a,
        m: LumpedMass::new(m),
        a_gamma,
        m_gamma: LumpedMass::new(m_gamma),
    }
}

/// Mesh together with its assembled operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub ops: Operators,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Self {
        let ops = assemble_operators(&mesh);
        Discretization { mesh, ops }
    }

    pub fn unit_square(n_cells: usize) -> Result<Self> {
        Ok(Self::new(Mesh::unit_square(n_cells)?))
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn n_boundary(&self) -> usize {
        self.mesh.n_boundary()
    }
}

/// MatrixMarket coordinate dump (general, real). Values use the shortest
/// decimal form that round-trips to the same `f64`.
pub fn write_matrix_market(out: &mut impl Write, matrix: &CsrMatrix) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", matrix.nrows(), matrix.ncols(), matrix.nnz())?;
    for (r, c, v) in matrix.triplets() {
        writeln!(out, "{} {} {:?}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// Diagonal matrix in MatrixMarket coordinate form.
pub fn write_matrix_market_diagonal(out: &mut impl Write, mass: &LumpedMass) -> std::io::Result<()> {
    let n = mass.len();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{n} {n} {n}")?;
    for (i, v) in mass.diagonal().iter().enumerate() {
        writeln!(out, "{} {} {:?}", i + 1, i + 1, v)?;
    }
    Ok(())
}
