//! Plain-text serialization: the per-record diagnostics table (CSV) and
//! full-state snapshot files.
//!
//! Both formats print floats in Rust's shortest round-trip decimal form,
//! so a write→read cycle reproduces every value bit-exactly and a
//! deterministic re-run reproduces every output byte. Snapshots carry
//! interior nodes only — boundary rows are Dirichlet data, reproducible
//! from the configuration that made the run.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::dynamics::{FieldState, Trajectory};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;

/// Header row of the diagnostics table, fixed column order.
pub const TIMESERIES_HEADER: &str = "step,t,E_total,E_kinetic,E_phason_potential,E_grad_u,\
                                     E_grad_nu,E_div_u,E_div_nu,E_cross_grad,E_cross_div,\
                                     dissipated_step,gyro_power,balance_residual,nu_t_maxnorm";

/// Renders the recorded diagnostics of a trajectory as CSV.
pub fn timeseries_string(traj: &Trajectory) -> String {
    let mut s = String::new();
    s.push_str(TIMESERIES_HEADER);
    s.push('\n');
    for r in &traj.records {
        let e = &r.energy;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            e.total,
            e.kinetic,
            e.phason_potential,
            e.grad_u,
            e.grad_nu,
            e.div_u,
            e.div_nu,
            e.cross_grad,
            e.cross_div,
            e.dissipated_step,
            e.gyro_power,
            r.balance_residual,
            r.nu_t_maxnorm
        )
        .expect("writing to a String cannot fail");
    }
    s
}

/// Writes the diagnostics CSV to `path`.
pub fn write_timeseries(path: &Path, traj: &Trajectory) -> Result<()> {
    std::fs::write(path, timeseries_string(traj))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Renders one state as a snapshot file: a four-line header
/// (`dim`, `n`, `h`, `t`), then one row per interior node in
/// lexicographic (i, j[, k]) order — `i j [k] u1 u2 u3 ut1 ut2 ut3
/// nu1 nu2 nu3` with 1-based lattice coordinates.
pub fn snapshot_string(state: &FieldState) -> String {
    let grid = &state.u.grid;
    let mut s = String::new();
    writeln!(s, "dim {}", grid.dim).unwrap();
    write!(s, "n").unwrap();
    for &count in &grid.n {
        write!(s, " {count}").unwrap();
    }
    writeln!(s).unwrap();
    write!(s, "h").unwrap();
    for &spacing in &grid.h {
        write!(s, " {spacing}").unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "t {}", state.t).unwrap();

    for_each_interior_lexicographic(grid, |node, c| {
        write!(s, "{} {}", c[0], c[1]).unwrap();
        if grid.dim == 3 {
            write!(s, " {}", c[2]).unwrap();
        }
        for f in [&state.u, &state.ut, &state.nu] {
            let v = f.get(node);
            write!(s, " {} {} {}", v[0], v[1], v[2]).unwrap();
        }
        writeln!(s).unwrap();
    });
    s
}

/// Writes a snapshot file to `path`.
pub fn write_snapshot(path: &Path, state: &FieldState) -> Result<()> {
    std::fs::write(path, snapshot_string(state))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Visits interior nodes in lexicographic coordinate order (first axis
/// slowest), the canonical row order of snapshot files. Node indices in
/// memory run first-axis-fastest, so this is a reordering, not a slice
/// walk.
fn for_each_interior_lexicographic(grid: &Grid, mut visit: impl FnMut(usize, [usize; 3])) {
    let n = &grid.n;
    let (n1, n2) = (n[1], if grid.dim == 3 { n[2] } else { 1 });
    for i in 1..=n[0] {
        for j in 1..=n1 {
            for k in 1..=n2 {
                let c = if grid.dim == 3 { [i, j, k] } else { [i, j, 0] };
                visit(grid.index(c), c);
            }
        }
    }
}

/// A snapshot read back from disk. Field vectors hold interior nodes in
/// lexicographic coordinate order, the same order [`snapshot_string`]
/// writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Spatial dimension recorded in the file.
    pub dim: usize,
    /// Interior node counts per axis.
    pub n: Vec<usize>,
    /// Node spacing per axis.
    pub h: Vec<f64>,
    /// Time of the state.
    pub t: f64,
    /// Displacement rows.
    pub u: Vec<[f64; 3]>,
    /// Velocity rows.
    pub ut: Vec<[f64; 3]>,
    /// Phason rows.
    pub nu: Vec<[f64; 3]>,
}

impl Snapshot {
    /// Places one of the stored field tables onto `grid` (interior nodes;
    /// boundary stays zero for the caller to stamp). Fails when the
    /// snapshot geometry does not match the grid.
    pub fn restore_field(&self, grid: &Arc<Grid>, data: &[[f64; 3]]) -> Result<VectorField> {
        if self.dim != grid.dim || self.n != grid.n {
            return Err(Error::ShapeMismatch(format!(
                "snapshot grid {}d {:?} does not match target {}d {:?}",
                self.dim, self.n, grid.dim, grid.n
            )));
        }
        for a in 0..grid.dim {
            let rel = (self.h[a] - grid.h[a]).abs() / grid.h[a];
            if rel > 1e-12 {
                return Err(Error::ShapeMismatch(format!(
                    "snapshot spacing {:?} does not match target {:?}",
                    self.h, grid.h
                )));
            }
        }
        let mut f = VectorField::zeros(grid.clone());
        let mut row = 0;
        for_each_interior_lexicographic(grid, |node, _| {
            f.set(node, data[row]);
            row += 1;
        });
        Ok(f)
    }
}

fn snap_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line: Some(line),
        msg: format!("snapshot `{}`: {}", path.display(), msg.into()),
    }
}

/// Reads a snapshot file written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines().enumerate();

    let mut header = |tag: &str| -> Result<Vec<String>> {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| snap_err(path, 0, format!("missing `{tag}` header line")))?;
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some(tag) {
            return Err(snap_err(path, idx + 1, format!("expected `{tag} ...`, got `{line}`")));
        }
        Ok(tokens.map(str::to_string).collect())
    };

    let dim_tokens = header("dim")?;
    let dim: usize = dim_tokens
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| snap_err(path, 1, "malformed dim"))?;
    if dim != 2 && dim != 3 {
        return Err(snap_err(path, 1, format!("dim must be 2 or 3, got {dim}")));
    }
    let n: Vec<usize> = header("n")?
        .iter()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| snap_err(path, 2, "malformed n"))?;
    let h: Vec<f64> = header("h")?
        .iter()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| snap_err(path, 3, "malformed h"))?;
    let t: f64 = header("t")?
        .first()
        .and_then(|tok| tok.parse().ok())
        .ok_or_else(|| snap_err(path, 4, "malformed t"))?;
    if n.len() != dim || h.len() != dim {
        return Err(snap_err(path, 2, format!("expected {dim} counts and spacings")));
    }

    let rows: usize = n.iter().product();
    let coord_cols = dim;
    let mut u = vec![[0.0; 3]; rows];
    let mut ut = vec![[0.0; 3]; rows];
    let mut nu = vec![[0.0; 3]; rows];
    let mut seen = vec![false; rows];

    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != coord_cols + 9 {
            return Err(snap_err(
                path,
                lineno,
                format!("expected {} columns, got {}", coord_cols + 9, tokens.len()),
            ));
        }
        let mut coord = [1usize; 3];
        for a in 0..dim {
            let c: usize = tokens[a]
                .parse()
                .map_err(|_| snap_err(path, lineno, "malformed coordinate"))?;
            if c < 1 || c > n[a] {
                return Err(snap_err(
                    path,
                    lineno,
                    format!("coordinate {c} outside 1..={} on axis {a}", n[a]),
                ));
            }
            coord[a] = c;
        }
        // Lexicographic rank of the row, independent of row order in the
        // file.
        let mut rank = coord[0] - 1;
        for a in 1..dim {
            rank = rank * n[a] + (coord[a] - 1);
        }
        if seen[rank] {
            return Err(snap_err(path, lineno, "duplicate node row"));
        }
        seen[rank] = true;

        let mut vals = [0.0; 9];
        for (slot, tok) in vals.iter_mut().zip(&tokens[coord_cols..]) {
            *slot = tok.parse().map_err(|_| snap_err(path, lineno, "malformed value"))?;
        }
        u[rank] = [vals[0], vals[1], vals[2]];
        ut[rank] = [vals[3], vals[4], vals[5]];
        nu[rank] = [vals[6], vals[7], vals[8]];
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(snap_err(path, 0, format!("missing row for interior node rank {missing}")));
    }

    Ok(Snapshot { dim, n, h, t, u, ut, nu })
}
