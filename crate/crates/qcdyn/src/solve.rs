//! Linear solvers for the symmetric step systems: matrix-free MINRES and
//! a dense direct fallback.
//!
//! MINRES is the production path — the midpoint step matrix is symmetric
//! (positive definite under theorem-admissible parameters, merely
//! symmetric under overridden ones, which MINRES tolerates). The dense
//! path assembles the operator column by column and LU-factors it once;
//! it exists for desk-scale oracles and probes that need solves exact to
//! rounding rather than to a Krylov tolerance.

use nalgebra::{DMatrix, DVector};

/// Result of an iterative solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Solution vector.
    pub x: Vec<f64>,
    /// Iterations consumed.
    pub iterations: usize,
    /// Final relative residual estimate ‖b − Ax‖/‖b‖.
    pub residual: f64,
}

/// Solver-local failure, mapped onto crate errors by the caller (which
/// knows the step index).
#[derive(Debug, Clone)]
pub enum SolveFailure {
    /// Iteration budget exhausted before the tolerance was met.
    NotConverged { iterations: usize, residual: f64 },
    /// The matrix is singular to working precision.
    Singular,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// MINRES for symmetric `A` (Paige–Saunders recurrences), matrix-free.
///
/// Stops when the recurrence residual estimate drops below `tol·‖b‖`.
/// A zero right-hand side returns the exact zero vector immediately, so
/// invariant-zero trajectories stay bit-exact. The returned residual is
/// recomputed from an explicit `b − Ax` evaluation, not the recurrence.
pub fn minres(
    apply: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveOutcome, SolveFailure> {
    let n = b.len();
    let beta1 = norm(b);
    if beta1 == 0.0 {
        return Ok(SolveOutcome { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }

    let mut x = vec![0.0; n];
    // Lanczos carriers: y is the unnormalized next vector, r1/r2 the two
    // previous ones (unnormalized, scaled inside the recurrence).
    let mut y = b.to_vec();
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();

    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs: f64 = -1.0;
    let mut sn: f64 = 0.0;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];

    let mut iterations = 0;
    for itn in 1..=max_iter {
        iterations = itn;
        // Lanczos step.
        let s = 1.0 / beta;
        let v: Vec<f64> = y.iter().map(|t| t * s).collect();
        y = apply(&v);
        if itn >= 2 {
            let c = beta / oldb;
            for (yi, r) in y.iter_mut().zip(&r1) {
                *yi -= c * r;
            }
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        for (yi, r) in y.iter_mut().zip(&r2) {
            *yi -= c * r;
        }
        r1 = std::mem::replace(&mut r2, y.clone());
        oldb = beta;
        beta = norm(&y);
        if !beta.is_finite() {
            return Err(SolveFailure::NotConverged { iterations, residual: f64::NAN });
        }
        // Breakdown guard: β this small cannot be inverted for the next
        // Lanczos normalization (1/β would overflow). Near-breakdowns at
        // working scale are benign — φ̄ collapses with them and the
        // tolerance stop fires first.
        let lanczos_exhausted = beta < 1e-290;

        // Previous rotation applied to the new tridiagonal column.
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;

        // Next rotation.
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        // Solution update.
        let denom = 1.0 / gamma;
        let w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }

        if phibar <= tol * beta1 || lanczos_exhausted {
            break;
        }
    }

    // True residual check (the recurrence estimate can drift).
    let ax = apply(&x);
    let res = b
        .iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt();
    let residual = res / beta1;
    // 10× slack between the recurrence stop and the true residual absorbs
    // the estimate drift without masking a genuine stall.
    if residual > 10.0 * tol {
        return Err(SolveFailure::NotConverged { iterations, residual });
    }
    Ok(SolveOutcome { x, iterations, residual })
}

/// Dense LU solver assembled from a matrix-free operator.
pub struct DenseSolver {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    dim: usize,
}

impl DenseSolver {
    /// Assembles the dense matrix column by column (`dim` operator
    /// applications) and factors it. Intended for desk-scale systems.
    pub fn from_operator(
        dim: usize,
        apply: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    ) -> Result<DenseSolver, SolveFailure> {
        let mut a = DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for j in 0..dim {
            e[j] = 1.0;
            let col = apply(&e);
            e[j] = 0.0;
            for i in 0..dim {
                a[(i, j)] = col[i];
            }
        }
        let lu = a.lu();
        if lu.determinant() == 0.0 {
            return Err(SolveFailure::Singular);
        }
        Ok(DenseSolver { lu, dim })
    }

    /// Solves `Ax = b` with the stored factorization.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveFailure> {
        assert_eq!(b.len(), self.dim, "dense solve dimension mismatch");
        let rhs = DVector::from_column_slice(b);
        match self.lu.solve(&rhs) {
            Some(x) => Ok(x.as_slice().to_vec()),
            None => Err(SolveFailure::Singular),
        }
    }
}
