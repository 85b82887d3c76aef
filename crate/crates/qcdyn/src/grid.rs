//! Uniform rectangular grids with Dirichlet boundary data.
//!
//! A grid of dimension `dim ∈ {2, 3}` has `n[a] ≥ 3` interior nodes per
//! axis plus one boundary layer on each side, for `n[a] + 2` lattice nodes
//! per axis. Node `(i, j, k)` sits at physical position `(i·h₀, j·h₁, k·h₂)`,
//! so the box extent is `(n[a] + 1)·h[a]` per axis and the boundary layers
//! lie exactly on the box faces. Nodes are linearly indexed with the first
//! axis fastest.
//!
//! The grid owns the time-independent Dirichlet data `bc_u`, `bc_nu`:
//! one 3-vector per boundary node, ordered by ascending node index.

use crate::error::{Error, Result};

/// Rectangular lattice with spacing, extent, and Dirichlet boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Spatial dimension, 2 or 3. Fields always carry 3 components; on
    /// 2-dimensional grids, derivatives along the third axis vanish.
    pub dim: usize,
    /// Interior node counts per axis (length `dim`, each ≥ 3).
    pub n: Vec<usize>,
    /// Node spacing per axis (length `dim`, each > 0).
    pub h: Vec<f64>,
    /// Physical box extent per axis: `extent[a] = (n[a] + 1)·h[a]`.
    pub extent: Vec<f64>,
    /// Dirichlet data for the displacement field, one entry per boundary
    /// node in ascending node-index order.
    pub bc_u: Vec<[f64; 3]>,
    /// Dirichlet data for the phason field, same layout as `bc_u`.
    pub bc_nu: Vec<[f64; 3]>,
    /// Lattice extents per axis including boundary layers (1 for unused axes).
    m: [usize; 3],
    /// Linear-index strides per axis.
    strides: [usize; 3],
    num_nodes: usize,
    /// Ascending node indices of the boundary set.
    boundary: Vec<usize>,
    /// Ascending node indices of the interior set.
    interior: Vec<usize>,
}

impl Grid {
    /// Builds a grid with zero Dirichlet data. `n` and `h` must both have
    /// length `dim`; every count must be ≥ 3 and every spacing > 0.
    pub fn new(dim: usize, n: &[usize], h: &[f64]) -> Result<Grid> {
        if dim != 2 && dim != 3 {
            return Err(Error::ShapeMismatch(format!("grid dim must be 2 or 3, got {dim}")));
        }
        if n.len() != dim || h.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "grid needs {dim} interior counts and spacings, got {} and {}",
                n.len(),
                h.len()
            )));
        }
        for (a, &count) in n.iter().enumerate() {
            if count < 3 {
                return Err(Error::ShapeMismatch(format!(
                    "axis {a}: need at least 3 interior nodes, got {count}"
                )));
            }
        }
        for (a, &s) in h.iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::ShapeMismatch(format!("axis {a}: spacing must be > 0, got {s}")));
            }
        }
        let mut m = [1usize; 3];
        for a in 0..dim {
            m[a] = n[a] + 2;
        }
        let strides = [1, m[0], m[0] * m[1]];
        let num_nodes = m[0] * m[1] * m[2];
        let extent = (0..dim).map(|a| (n[a] + 1) as f64 * h[a]).collect();

        let mut boundary = Vec::new();
        let mut interior = Vec::new();
        for idx in 0..num_nodes {
            let c = coords_of(idx, &m);
            let on_boundary = (0..dim).any(|a| c[a] == 0 || c[a] == m[a] - 1);
            if on_boundary {
                boundary.push(idx);
            } else {
                interior.push(idx);
            }
        }
        let bc_len = boundary.len();

        Ok(Grid {
            dim,
            n: n.to_vec(),
            h: h.to_vec(),
            extent,
            bc_u: vec![[0.0; 3]; bc_len],
            bc_nu: vec![[0.0; 3]; bc_len],
            m,
            strides,
            num_nodes,
            boundary,
            interior,
        })
    }

    /// Builds a grid from the physical extent instead of the spacing:
    /// `h[a] = extent[a] / (n[a] + 1)`.
    pub fn from_extent(dim: usize, n: &[usize], extent: &[f64]) -> Result<Grid> {
        if extent.len() != n.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid needs {} extents, got {}",
                n.len(),
                extent.len()
            )));
        }
        let h: Vec<f64> = n
            .iter()
            .zip(extent)
            .map(|(&count, &len)| len / (count + 1) as f64)
            .collect();
        Grid::new(dim, n, &h)
    }

    /// Replaces the Dirichlet data. Both arrays must cover exactly the
    /// boundary node set (ascending node-index order).
    pub fn with_bc(mut self, bc_u: Vec<[f64; 3]>, bc_nu: Vec<[f64; 3]>) -> Result<Grid> {
        let want = self.boundary.len();
        if bc_u.len() != want || bc_nu.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "boundary data must cover exactly {want} boundary nodes, got {} (u) and {} (nu)",
                bc_u.len(),
                bc_nu.len()
            )));
        }
        for (name, data) in [("bc_u", &bc_u), ("bc_nu", &bc_nu)] {
            if data.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::ShapeMismatch(format!("{name} contains non-finite entries")));
            }
        }
        self.bc_u = bc_u;
        self.bc_nu = bc_nu;
        Ok(self)
    }

    /// Total lattice node count, boundary layers included.
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Ascending node indices of the interior set.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Ascending node indices of the boundary set; `bc_u[i]`/`bc_nu[i]`
    /// belong to `boundary_nodes()[i]`.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Lattice extent (node count) along `axis`, 1 for axes ≥ `dim`.
    pub fn lattice_extent(&self, axis: usize) -> usize {
        self.m[axis]
    }

    /// Linear-index stride along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Cell volume h₀·h₁(·h₂), the quadrature weight of the inner product.
    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    /// Integer lattice coordinates of a node.
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        coords_of(idx, &self.m)
    }

    /// Linear index of lattice coordinates.
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.m[0] * (c[1] + self.m[1] * c[2])
    }

    /// Physical position of a node; components for axes ≥ `dim` are 0.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = c[a] as f64 * self.h[a];
        }
        x
    }

    /// True iff the node lies on the boundary layer of some axis.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..self.dim).any(|a| c[a] == 0 || c[a] == self.m[a] - 1)
    }

    /// Chebyshev distance (in lattice steps) to the nearest boundary node.
    pub fn boundary_distance(&self, idx: usize) -> usize {
        let c = self.coords(idx);
        (0..self.dim)
            .map(|a| c[a].min(self.m[a] - 1 - c[a]))
            .min()
            .unwrap_or(0)
    }

    /// True when two grids index the same lattice with the same spacings;
    /// fields from such grids may be combined.
    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n && self.h == other.h
    }
}

fn coords_of(idx: usize, m: &[usize; 3]) -> [usize; 3] {
    let i = idx % m[0];
    let j = (idx / m[0]) % m[1];
    let k = idx / (m[0] * m[1]);
    [i, j, k]
}
