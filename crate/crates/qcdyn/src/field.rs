//! Node-indexed fields over a [`Grid`].
//!
//! `Field<C>` stores `C` components per lattice node (boundary included)
//! in node-major layout: component `c` of node `idx` lives at
//! `values[C·idx + c]`. Scalar, vector (3), and tensor (9, row-major)
//! fields are the aliases used throughout. Vector fields are 3-component
//! even on 2-dimensional grids.

use std::sync::Arc;

use crate::grid::Grid;

/// A `C`-component field over all nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<const C: usize> {
    /// The underlying grid (shared, immutable).
    pub grid: Arc<Grid>,
    /// Component values, `C` per node, node-major.
    pub values: Vec<f64>,
}

/// One value per node.
pub type ScalarField = Field<1>;
/// Three components per node.
pub type VectorField = Field<3>;
/// Nine components per node, row-major: entry `(r, c)` at offset `3r + c`.
pub type TensorField = Field<9>;

impl<const C: usize> Field<C> {
    /// All-zero field.
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let len = C * grid.num_nodes();
        Field { grid, values: vec![0.0; len] }
    }

    /// Constant field (boundary nodes included).
    pub fn constant(grid: Arc<Grid>, value: [f64; C]) -> Self {
        let mut f = Field::zeros(grid);
        for node in 0..f.grid.num_nodes() {
            f.set(node, value);
        }
        f
    }

    /// Field sampled from a function of physical position, evaluated at
    /// every node, boundary included.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn([f64; 3]) -> [f64; C]) -> Self {
        let mut out = Field::zeros(grid);
        for node in 0..out.grid.num_nodes() {
            let v = f(out.grid.position(node));
            out.set(node, v);
        }
        out
    }

    /// Component values at a node.
    #[inline]
    pub fn get(&self, node: usize) -> [f64; C] {
        let mut out = [0.0; C];
        out.copy_from_slice(&self.values[C * node..C * node + C]);
        out
    }

    /// Overwrites the component values at a node.
    #[inline]
    pub fn set(&mut self, node: usize, value: [f64; C]) {
        self.values[C * node..C * node + C].copy_from_slice(&value);
    }

    /// Single component at a node.
    #[inline]
    pub fn at(&self, node: usize, comp: usize) -> f64 {
        self.values[C * node + comp]
    }

    /// Zeroes every boundary node (rate fields vanish there under
    /// time-independent Dirichlet data).
    pub fn zero_boundary(&mut self) {
        for &node in self.grid.clone().boundary_nodes() {
            self.set(node, [0.0; C]);
        }
    }

    /// True iff every stored value is finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// In-place `self += a·x`. Panics on grid shape mismatch (programmer error).
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert!(self.grid.same_shape(&x.grid), "field axpy across different grids");
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    /// In-place scaling.
    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    /// Interior degrees of freedom as a flat vector, ascending node index,
    /// components contiguous per node.
    pub fn interior_dofs(&self) -> Vec<f64> {
        let interior = self.grid.interior_nodes();
        let mut out = Vec::with_capacity(C * interior.len());
        for &node in interior {
            out.extend_from_slice(&self.values[C * node..C * node + C]);
        }
        out
    }

    /// Writes a flat interior-dof vector back into the field, leaving
    /// boundary nodes untouched.
    pub fn set_interior_dofs(&mut self, dofs: &[f64]) {
        let interior = self.grid.clone();
        let interior = interior.interior_nodes();
        assert_eq!(dofs.len(), C * interior.len(), "interior dof count mismatch");
        for (slot, &node) in interior.iter().enumerate() {
            self.values[C * node..C * node + C].copy_from_slice(&dofs[C * slot..C * slot + C]);
        }
    }

    /// Builds a field from interior dofs with zero boundary values.
    pub fn from_interior_dofs(grid: Arc<Grid>, dofs: &[f64]) -> Self {
        let mut f = Field::zeros(grid);
        f.set_interior_dofs(dofs);
        f
    }
}

impl VectorField {
    /// Stamps boundary values from a per-boundary-node data array
    /// (ascending node-index order, as stored on the grid).
    pub fn stamp_boundary(&mut self, data: &[[f64; 3]]) {
        let grid = self.grid.clone();
        let boundary = grid.boundary_nodes();
        assert_eq!(data.len(), boundary.len(), "boundary data length mismatch");
        for (&node, &value) in boundary.iter().zip(data) {
            self.set(node, value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn grid2() -> Arc<Grid> {
        Arc::new(Grid::new(2, &[3, 3], &[0.25, 0.25]).unwrap())
    }

    #[test]
    fn interior_dof_roundtrip_preserves_boundary() {
        let g = grid2();
        let mut f = VectorField::constant(g.clone(), [1.0, 2.0, 3.0]);
        let dofs: Vec<f64> = (0..f.interior_dofs().len()).map(|i| i as f64).collect();
        f.set_interior_dofs(&dofs);
        assert_eq!(f.interior_dofs(), dofs);
        for &b in g.boundary_nodes() {
            assert_eq!(f.get(b), [1.0, 2.0, 3.0]);
        }
    }

    #[test]
    fn zero_boundary_only_touches_boundary() {
        let g = grid2();
        let mut f = VectorField::constant(g.clone(), [1.0, 1.0, 1.0]);
        f.zero_boundary();
        for &b in g.boundary_nodes() {
            assert_eq!(f.get(b), [0.0; 3]);
        }
        for &i in g.interior_nodes() {
            assert_eq!(f.get(i), [1.0; 3]);
        }
    }

    #[test]
    fn from_fn_samples_positions() {
        let g = grid2();
        let f = ScalarField::from_fn(g.clone(), |x| [x[0] + 10.0 * x[1]]);
        let node = g.index([2, 1, 0]);
        assert!((f.at(node, 0) - (0.5 + 2.5)).abs() < 1e-15);
    }

    #[test]
    fn finiteness_check() {
        let g = grid2();
        let mut f = ScalarField::zeros(g);
        assert!(f.is_finite());
        f.values[3] = f64::NAN;
        assert!(!f.is_finite());
    }
}
