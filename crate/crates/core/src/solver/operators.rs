//! Cell-centred gradient and its negative adjoint, the nodal divergence.
//!
//! Both inner products carry the same weight `hⁿ`, so
//! `⟨div P, w⟩_nodes = −⟨P, ∇w⟩_cells` holds to rounding for every clamped `w`.

use crate::scalar::Real;
use crate::solver::grid::Grid;
use crate::solver::linear::LinearOperator;
use crate::tensor::{FourthOrderTensor, SquareMatrix};

/// Per-cell gradient of a nodal vector field: `F[c][d] = ∂_d ξ_c` by averaged
/// differences of the cell's corners (exact for affine fields).
pub fn gradient_field<T: Real>(grid: &Grid<T>, nodal: &[T]) -> Vec<SquareMatrix<T>> {
    let d = grid.dim();
    debug_assert_eq!(nodal.len(), grid.node_count() * d);
    let inv_h = T::one() / grid.spacing();
    let half_inv_h = T::lit(0.5) * inv_h;
    (0..grid.cell_count())
        .map(|cell| {
            let c = grid.cell_corners(cell);
            if d == 1 {
                SquareMatrix::from_row_slice(1, &[(nodal[c[1]] - nodal[c[0]]) * inv_h])
            } else {
                let u = |node: usize, comp: usize| nodal[node * 2 + comp];
                SquareMatrix::from_fn(2, |comp, dir| {
                    if dir == 0 {
                        (u(c[1], comp) + u(c[3], comp) - u(c[0], comp) - u(c[2], comp)) * half_inv_h
                    } else {
                        (u(c[2], comp) + u(c[3], comp) - u(c[0], comp) - u(c[1], comp)) * half_inv_h
                    }
                })
            }
        })
        .collect()
}

/// Row-wise nodal divergence of a per-cell stress field, defined as the
/// negative adjoint of [`gradient_field`]. Boundary rows are zero.
pub fn stress_divergence<T: Real>(grid: &Grid<T>, cell_stress: &[SquareMatrix<T>]) -> Vec<T> {
    let d = grid.dim();
    let mut out = vec![T::zero(); grid.node_count() * d];
    accumulate_divergence(grid, cell_stress, &mut out);
    for node in grid.boundary_nodes() {
        for comp in 0..d {
            out[node * d + comp] = T::zero();
        }
    }
    out
}

fn accumulate_divergence<T: Real>(grid: &Grid<T>, cell_stress: &[SquareMatrix<T>], out: &mut [T]) {
    let d = grid.dim();
    let inv_h = T::one() / grid.spacing();
    let half_inv_h = T::lit(0.5) * inv_h;
    for (cell, p) in cell_stress.iter().enumerate() {
        let c = grid.cell_corners(cell);
        if d == 1 {
            let g = p[(0, 0)] * inv_h;
            out[c[0]] += g;
            out[c[1]] -= g;
        } else {
            for comp in 0..2 {
                let gx = p[(comp, 0)] * half_inv_h;
                let gy = p[(comp, 1)] * half_inv_h;
                // negated coefficients of w at each corner in ⟨P, ∇w⟩
                out[c[0] * 2 + comp] += gx + gy;
                out[c[1] * 2 + comp] += gy - gx;
                out[c[2] * 2 + comp] += gx - gy;
                out[c[3] * 2 + comp] -= gx + gy;
            }
        }
    }
}

/// `w ↦ −div(M ∇w)` on clamped nodal fields, with `M` frozen per cell.
#[derive(Clone, Debug)]
pub struct ViscousOperator<'g, T> {
    grid: &'g Grid<T>,
    frozen: Vec<FourthOrderTensor<T>>,
}

impl<'g, T: Real> ViscousOperator<'g, T> {
    pub fn grid(&self) -> &Grid<T> {
        self.grid
    }

    pub fn frozen(&self) -> &[FourthOrderTensor<T>] {
        &self.frozen
    }

    /// True when every frozen tensor is self-adjoint, which makes the
    /// assembled operator symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.frozen.iter().all(|m| m.is_symmetric(T::lit(1e-12)))
    }

    /// Applies the operator to a full nodal field; boundary values of `w` are
    /// ignored (treated as zero) and boundary rows of the result are zero.
    pub fn apply_nodal(&self, w: &[T]) -> Vec<T> {
        let mut clamped = w.to_vec();
        let d = self.grid.dim();
        for node in self.grid.boundary_nodes() {
            for comp in 0..d {
                clamped[node * d + comp] = T::zero();
            }
        }
        let grads = gradient_field(self.grid, &clamped);
        let fluxes: Vec<SquareMatrix<T>> = grads.iter().zip(&self.frozen).map(|(g, m)| m.apply(g)).collect();
        stress_divergence(self.grid, &fluxes).into_iter().map(|x| -x).collect()
    }

    /// Dense matrix on the interior unknowns, for small direct solves.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        crate::solver::linear::to_dense(self)
    }
}

impl<T: Real> LinearOperator<T> for ViscousOperator<'_, T> {
    fn size(&self) -> usize {
        self.grid.dof_count()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let full = self.grid.scatter(x);
        let out = self.apply_nodal(&full);
        y.copy_from_slice(&self.grid.gather(&out));
    }
}

/// Builds the frozen-coefficient operator `w ↦ −div(M∇w)`.
pub fn assemble_viscous_operator<'g, T: Real>(
    grid: &'g Grid<T>,
    frozen_m: Vec<FourthOrderTensor<T>>,
) -> ViscousOperator<'g, T> {
    assert_eq!(frozen_m.len(), grid.cell_count(), "one tensor per cell");
    ViscousOperator { grid, frozen: frozen_m }
}

/// Smallest cell-centred `det ∇ξ` and the cell where it occurs.
pub fn min_cell_det<T: Real>(grid: &Grid<T>, xi: &[T]) -> (T, usize) {
    gradient_field(grid, xi)
        .iter()
        .enumerate()
        .map(|(c, f)| (f.det(), c))
        .fold((T::infinity(), 0), |acc, x| if x.0 < acc.0 { x } else { acc })
}
