use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform structured grid on the unit interval (dim 1) or unit square (dim 2).
///
/// Nodes are numbered `i + (N+1) j`, cells `ci + N cj`. Nodal vector fields
/// are stored flat with `dim` components per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    cells: usize,
    spacing: T,
    interior: Vec<usize>,
    interior_index: Vec<Option<usize>>,
}

pub const MIN_CELLS: usize = 4;

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, cells: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidConfig(format!("grid dimension {dim} not in {{1, 2}}")));
        }
        if cells < MIN_CELLS {
            return Err(Error::InvalidConfig(format!(
                "need at least {MIN_CELLS} cells per side, got {cells}"
            )));
        }
        let per_side = cells + 1;
        let count = per_side.pow(dim as u32);
        let mut interior = Vec::new();
        let mut interior_index = vec![None; count];
        for node in 0..count {
            let boundary = (0..dim).any(|d| {
                let i = (node / per_side.pow(d as u32)) % per_side;
                i == 0 || i == cells
            });
            if !boundary {
                interior_index[node] = Some(interior.len());
                interior.push(node);
            }
        }
        Ok(Self {
            dim,
            cells,
            spacing: T::one() / T::from_count(cells),
            interior,
            interior_index,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn cells_per_side(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn nodes_per_side(&self) -> usize {
        self.cells + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side().pow(self.dim as u32)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    /// Quadrature weight `hⁿ` shared by nodes and cells.
    pub fn volume_weight(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.interior_index[node].is_none()
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&n| self.is_boundary(n))
    }

    /// Number of unknowns of a clamped vector field.
    pub fn dof_count(&self) -> usize {
        self.interior.len() * self.dim
    }

    /// Reference coordinates of a node (unused components are zero).
    pub fn node_coords(&self, node: usize) -> [T; 2] {
        let p = self.nodes_per_side();
        let i = node % p;
        let j = if self.dim == 2 { node / p } else { 0 };
        [self.spacing * T::from_count(i), self.spacing * T::from_count(j)]
    }

    pub fn cell_center(&self, cell: usize) -> [T; 2] {
        let half = T::lit(0.5);
        let i = cell % self.cells;
        let j = if self.dim == 2 { cell / self.cells } else { 0 };
        let y = if self.dim == 2 {
            self.spacing * (T::from_count(j) + half)
        } else {
            T::zero()
        };
        [self.spacing * (T::from_count(i) + half), y]
    }

    /// Corner nodes of a cell: `[left, right]` in 1D,
    /// `[(i,j), (i+1,j), (i,j+1), (i+1,j+1)]` in 2D.
    pub fn cell_corners(&self, cell: usize) -> [usize; 4] {
        let p = self.nodes_per_side();
        if self.dim == 1 {
            [cell, cell + 1, 0, 0]
        } else {
            let i = cell % self.cells;
            let j = cell / self.cells;
            let n00 = i + p * j;
            [n00, n00 + 1, n00 + p, n00 + p + 1]
        }
    }

    /// Samples a vector function at every node.
    pub fn sample(&self, f: impl Fn(&[T], &mut [T])) -> Vec<T> {
        let d = self.dim;
        let mut out = vec![T::zero(); self.node_count() * d];
        for node in 0..self.node_count() {
            let x = self.node_coords(node);
            f(&x[..d], &mut out[node * d..(node + 1) * d]);
        }
        out
    }

    /// The identity deformation `ξ(X) = X`.
    pub fn reference_positions(&self) -> Vec<T> {
        self.sample(|x, out| out.copy_from_slice(x))
    }

    /// Expands interior unknowns into a full nodal field with zero boundary values.
    pub fn scatter(&self, interior: &[T]) -> Vec<T> {
        let d = self.dim;
        let mut full = vec![T::zero(); self.node_count() * d];
        for (k, &node) in self.interior.iter().enumerate() {
            full[node * d..(node + 1) * d].copy_from_slice(&interior[k * d..(k + 1) * d]);
        }
        full
    }

    pub fn gather(&self, full: &[T]) -> Vec<T> {
        let d = self.dim;
        let mut out = Vec::with_capacity(self.dof_count());
        for &node in &self.interior {
            out.extend_from_slice(&full[node * d..(node + 1) * d]);
        }
        out
    }
}
