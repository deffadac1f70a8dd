//! Friedrichs-Keller triangulation of the unit square.
//!
//! Nodes are numbered row-major (`index = j * (n + 1) + i` for the node at
//! `(i h, j h)`). Every cell is split along its lower-left to upper-right
//! diagonal. The boundary is traversed counterclockwise starting at the
//! origin; surface quantities live on that compressed boundary index set.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n_cells: usize,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_nodes: Vec<usize>,
    boundary_segments: Vec<[usize; 2]>,
    chi: Vec<bool>,
    bnd_of_node: Vec<Option<usize>>,
}

impl Mesh {
    /// Builds the triangulation with `n_cells` cells per axis.
    pub fn unit_square(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::EmptyMesh);
        }
        let n = n_cells;
        let stride = n + 1;
        let nf = n as f64;

        let mut nodes = Vec::with_capacity(stride * stride);
        for j in 0..stride {
            for i in 0..stride {
                nodes.push([i as f64 / nf, j as f64 / nf]);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let ll = j * stride + i;
                let lr = ll + 1;
                let ul = ll + stride;
                let ur = ul + 1;
                triangles.push([ll, lr, ur]);
                triangles.push([ll, ur, ul]);
            }
        }

        let mut boundary_nodes = Vec::with_capacity(4 * n);
        boundary_nodes.extend(0..n);
        boundary_nodes.extend((0..n).map(|j| j * stride + n));
        boundary_nodes.extend((0..n).map(|k| n * stride + (n - k)));
        boundary_nodes.extend((0..n).map(|k| (n - k) * stride));

        let nb = boundary_nodes.len();
        let boundary_segments = (0..nb)
            .map(|k| [boundary_nodes[k], boundary_nodes[(k + 1) % nb]])
            .collect();

        let mut chi = vec![false; nodes.len()];
        let mut bnd_of_node = vec![None; nodes.len()];
        for (local, &node) in boundary_nodes.iter().enumerate() {
            chi[node] = true;
            bnd_of_node[node] = Some(local);
        }

        Ok(Mesh {
            n_cells,
            nodes,
            triangles,
            boundary_nodes,
            boundary_segments,
            chi,
            bnd_of_node,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Mesh size `1 / n_cells`.
    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary_nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary nodes in counterclockwise order, starting at `(0, 0)`.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn boundary_segments(&self) -> &[[usize; 2]] {
        &self.boundary_segments
    }

    pub fn chi(&self, node: usize) -> bool {
        self.chi[node]
    }

    pub fn bnd_of_node(&self, node: usize) -> Option<usize> {
        self.bnd_of_node[node]
    }

    /// Signed area of triangle `t` (positive for counterclockwise vertices).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn segment_length(&self, s: usize) -> f64 {
        let [a, b] = self.boundary_segments[s].map(|i| self.nodes[i]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Restricts a bulk nodal vector to the boundary index set.
    pub fn trace(&self, bulk: &[f64]) -> Vec<f64> {
        self.boundary_nodes.iter().map(|&i| bulk[i]).collect()
    }

    /// Adds a boundary vector into the matching rows of a bulk vector.
    pub fn scatter_add(&self, surface: &[f64], bulk: &mut [f64]) {
        for (&node, &value) in self.boundary_nodes.iter().zip(surface) {
            bulk[node] += value;
        }
    }
}
