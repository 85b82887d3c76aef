//! Discrete vector calculus: centered differences with summation-by-parts
//! structure.
//!
//! All derivative operators evaluate second-order centered differences at
//! interior nodes, reading stored values at neighbors (which include the
//! Dirichlet boundary layer), and set their *outputs* to zero on boundary
//! nodes. The second-order composites are built from first-order passes:
//!
//! ```text
//! vec_laplacian = tensor_divergence ∘ gradient
//! grad_div      = scalar_gradient ∘ divergence
//! ```
//!
//! Because the intermediate first-derivative fields are zero on the
//! boundary layer, each composite is exactly the negative adjoint pairing
//! of its two factors on zero-boundary fields:
//! ⟨Δf, g⟩ = −⟨∇f, ∇g⟩ and ⟨∇div f, g⟩ = −⟨div f, div g⟩ up to rounding.
//! This mirrors the integration by parts that drives the continuous
//! energy identity, and it is what makes the discrete energy ledger close
//! to solver precision rather than to discretization error.
//!
//! Inner products are cell-volume-weighted sums over interior nodes in
//! ascending node order — a fixed summation order, so results are
//! bit-reproducible across runs.

use crate::field::{Field, ScalarField, TensorField, VectorField};

/// Applies `out[c_out] += sign · D_axis f[c_in]` at every interior node.
/// `D_axis` is the centered difference along `axis` with spacing `h[axis]`.
fn accumulate_centered<const CI: usize, const CO: usize>(
    f: &Field<CI>,
    c_in: usize,
    out: &mut Field<CO>,
    c_out: usize,
    axis: usize,
    sign: f64,
) {
    let grid = &f.grid;
    if axis >= grid.dim {
        return; // no variation along unused axes ("2.5D" convention)
    }
    let stride = grid.stride(axis);
    let inv2h = sign / (2.0 * grid.h[axis]);
    for &node in grid.interior_nodes() {
        let plus = f.values[CI * (node + stride) + c_in];
        let minus = f.values[CI * (node - stride) + c_in];
        out.values[CO * node + c_out] += (plus - minus) * inv2h;
    }
}

/// ∇f: tensor with entry (c, a) = ∂ₐ f_c at interior nodes, zero on the
/// boundary layer. Columns for axes ≥ `dim` are zero.
pub fn gradient(f: &VectorField) -> TensorField {
    let mut out = TensorField::zeros(f.grid.clone());
    for c in 0..3 {
        for a in 0..f.grid.dim {
            accumulate_centered(f, c, &mut out, 3 * c + a, a, 1.0);
        }
    }
    out
}

/// div f = Σₐ ∂ₐ fₐ at interior nodes, zero on the boundary layer.
pub fn divergence(f: &VectorField) -> ScalarField {
    let mut out = ScalarField::zeros(f.grid.clone());
    for a in 0..f.grid.dim {
        accumulate_centered(f, a, &mut out, 0, a, 1.0);
    }
    out
}

/// ∇s for a scalar field, zero on the boundary layer.
pub fn scalar_gradient(s: &ScalarField) -> VectorField {
    let mut out = VectorField::zeros(s.grid.clone());
    for a in 0..s.grid.dim {
        accumulate_centered(s, 0, &mut out, a, a, 1.0);
    }
    out
}

/// Row-wise divergence of a tensor: out_c = Σₐ ∂ₐ T_{ca}.
pub fn tensor_divergence(t: &TensorField) -> VectorField {
    let mut out = VectorField::zeros(t.grid.clone());
    for c in 0..3 {
        for a in 0..t.grid.dim {
            accumulate_centered(t, 3 * c + a, &mut out, c, a, 1.0);
        }
    }
    out
}

/// curl f = (∂₂f₃−∂₃f₂, ∂₃f₁−∂₁f₃, ∂₁f₂−∂₂f₁) at interior nodes, zero on
/// the boundary layer. On 2-dimensional grids ∂₃ ≡ 0 but all three output
/// components are kept (the in-plane gradient of f₃ feeds the first two).
pub fn curl(f: &VectorField) -> VectorField {
    let mut out = VectorField::zeros(f.grid.clone());
    // (component, +axis/+field, −axis/−field) triples of the cross pattern.
    for (c, (ap, fp), (am, fm)) in [
        (0, (1, 2), (2, 1)),
        (1, (2, 0), (0, 2)),
        (2, (0, 1), (1, 0)),
    ] {
        accumulate_centered(f, fp, &mut out, c, ap, 1.0);
        accumulate_centered(f, fm, &mut out, c, am, -1.0);
    }
    out
}

/// Vector Laplacian Δf = div(∇f), built as the composite of the two
/// first-order passes (see the module docs for why).
pub fn vec_laplacian(f: &VectorField) -> VectorField {
    tensor_divergence(&gradient(f))
}

/// ∇(div f), built as the composite of the two first-order passes.
pub fn grad_div(f: &VectorField) -> VectorField {
    scalar_gradient(&divergence(f))
}

/// Pointwise cross product a×b at every node.
pub fn pointwise_cross(a: &VectorField, b: &VectorField) -> VectorField {
    assert!(a.grid.same_shape(&b.grid), "cross product across different grids");
    let mut out = VectorField::zeros(a.grid.clone());
    for node in 0..a.grid.num_nodes() {
        let x = a.get(node);
        let y = b.get(node);
        out.set(
            node,
            [
                x[1] * y[2] - x[2] * y[1],
                x[2] * y[0] - x[0] * y[2],
                x[0] * y[1] - x[1] * y[0],
            ],
        );
    }
    out
}

/// Grid inner product: cell volume times the sum of pointwise component
/// dots over interior nodes, in ascending node order.
pub fn inner<const C: usize>(f: &Field<C>, g: &Field<C>) -> f64 {
    assert!(f.grid.same_shape(&g.grid), "inner product across different grids");
    let mut sum = 0.0;
    for &node in f.grid.interior_nodes() {
        for c in 0..C {
            sum += f.values[C * node + c] * g.values[C * node + c];
        }
    }
    sum * f.grid.cell_volume()
}

/// L² norm √⟨f, f⟩ over interior nodes.
pub fn norm_l2<const C: usize>(f: &Field<C>) -> f64 {
    inner(f, f).sqrt()
}

/// H¹ norm: √(‖f‖² + ‖∇f‖²).
pub fn norm_h1(f: &VectorField) -> f64 {
    let g = gradient(f);
    (inner(f, f) + inner(&g, &g)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    /// Dyadic spacings make linear/quadratic difference quotients exact.
    fn dyadic_grid2() -> Arc<Grid> {
        Arc::new(Grid::new(2, &[6, 5], &[0.25, 0.125]).unwrap())
    }

    /// Deliberately non-dyadic spacings for the rounding-sensitive tests.
    fn rough_grid3() -> Arc<Grid> {
        Arc::new(Grid::new(3, &[4, 3, 5], &[0.3, 0.17, 0.21]).unwrap())
    }

    fn random_field<const C: usize>(
        grid: &Arc<Grid>,
        rng: &mut ChaCha8Rng,
        zero_boundary: bool,
    ) -> Field<C> {
        let mut f = Field::<C>::zeros(grid.clone());
        for v in &mut f.values {
            *v = rng.gen_range(-1.0..1.0);
        }
        if zero_boundary {
            f.zero_boundary();
        }
        f
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        for grid in [dyadic_grid2(), rough_grid3()] {
            let f = VectorField::constant(grid, [1.0, 2.0, 3.0]);
            assert!(gradient(&f).values.iter().all(|&v| v == 0.0));
            assert!(divergence(&f).values.iter().all(|&v| v == 0.0));
            assert!(curl(&f).values.iter().all(|&v| v == 0.0));
            assert!(vec_laplacian(&f).values.iter().all(|&v| v == 0.0));
            assert!(grad_div(&f).values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn divergence_of_linear_field_is_one() {
        let grid = dyadic_grid2();
        let f = VectorField::from_fn(grid.clone(), |x| [x[0], 0.0, 0.0]);
        let d = divergence(&f);
        for &node in grid.interior_nodes() {
            assert_eq!(d.at(node, 0), 1.0, "node {node}");
        }
    }

    #[test]
    fn laplacian_of_quadratic_is_two_away_from_boundary() {
        // Δ(x₁², 0, 0) = (2, 0, 0). The composite operator reads the
        // zeroed boundary layer of the intermediate gradient, so the
        // value is exact only at nodes ≥ 2 steps from the boundary.
        let grid = Arc::new(Grid::new(2, &[7, 7], &[0.25, 0.25]).unwrap());
        let f = VectorField::from_fn(grid.clone(), |x| [x[0] * x[0], 0.0, 0.0]);
        let lap = vec_laplacian(&f);
        let mut checked = 0;
        for &node in grid.interior_nodes() {
            if grid.boundary_distance(node) >= 2 {
                let v = lap.get(node);
                assert!((v[0] - 2.0).abs() <= 1e-13, "node {node}: {v:?}");
                assert_eq!(v[1], 0.0);
                assert_eq!(v[2], 0.0);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn summation_by_parts_for_zero_boundary_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for grid in [dyadic_grid2(), rough_grid3()] {
            for _ in 0..5 {
                let f: VectorField = random_field(&grid, &mut rng, true);
                let g: VectorField = random_field(&grid, &mut rng, true);
                let gf = gradient(&f);
                let gg = gradient(&g);
                let scale = norm_l2(&gf) * norm_l2(&gg) + 1.0;

                let lhs = inner(&vec_laplacian(&f), &g);
                let rhs = -inner(&gf, &gg);
                println!("SBP laplacian defect: {:e}", (lhs - rhs).abs());
                assert!((lhs - rhs).abs() <= 1e-12 * scale);

                let df = divergence(&f);
                let dg = divergence(&g);
                let lhs = inner(&grad_div(&f), &g);
                let rhs = -inner(&df, &dg);
                let scale_div = norm_l2(&df) * norm_l2(&dg) + 1.0;
                println!("SBP grad-div defect: {:e}", (lhs - rhs).abs());
                assert!((lhs - rhs).abs() <= 1e-12 * scale_div.min(scale));
            }
        }
    }

    #[test]
    fn div_curl_and_curl_grad_vanish_away_from_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for grid in [
            Arc::new(Grid::new(2, &[7, 6], &[0.3, 0.17]).unwrap()),
            Arc::new(Grid::new(3, &[5, 5, 4], &[0.3, 0.17, 0.21]).unwrap()),
        ] {
            let f: VectorField = random_field(&grid, &mut rng, false);
            let c = curl(&f);
            let dc = divergence(&c);
            // Scale of a second derivative of an O(1) field.
            let h_min = grid.h.iter().cloned().fold(f64::INFINITY, f64::min);
            let scale = 1.0 / (h_min * h_min);
            for &node in grid.interior_nodes() {
                if grid.boundary_distance(node) >= 2 {
                    assert!(dc.at(node, 0).abs() <= 1e-13 * scale, "div curl at {node}");
                }
            }

            let s: ScalarField = random_field(&grid, &mut rng, false);
            let cg = curl(&scalar_gradient(&s));
            for &node in grid.interior_nodes() {
                if grid.boundary_distance(node) >= 2 {
                    for comp in 0..3 {
                        assert!(cg.at(node, comp).abs() <= 1e-13 * scale, "curl grad at {node}");
                    }
                }
            }
        }
    }

    #[test]
    fn cross_product_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let grid = rough_grid3();
        let f: VectorField = random_field(&grid, &mut rng, false);
        let g: VectorField = random_field(&grid, &mut rng, false);
        let c = curl(&f);
        let cross = pointwise_cross(&c, &g);
        for node in 0..grid.num_nodes() {
            let x = cross.get(node);
            let y = g.get(node);
            let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            let cn = c.get(node);
            let cnorm = (cn[0] * cn[0] + cn[1] * cn[1] + cn[2] * cn[2]).sqrt();
            let gnorm2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
            assert!(dot.abs() <= 1e-14 * cnorm * gnorm2 + 1e-300, "node {node}: {dot:e}");
        }
    }

    #[test]
    fn operators_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let grid = rough_grid3();
        let f: VectorField = random_field(&grid, &mut rng, false);
        let g: VectorField = random_field(&grid, &mut rng, false);
        let (alpha, beta) = (1.7, -0.4);
        let mut combo = f.clone();
        combo.scale(alpha);
        combo.axpy(beta, &g);

        // op(αf+βg) against α·op(f)+β·op(g) for every operator.
        let check = |a: &[f64], b: &[f64], c: &[f64]| {
            let scale = 1.0 / grid.h.iter().cloned().fold(f64::INFINITY, f64::min);
            for i in 0..a.len() {
                let want = alpha * b[i] + beta * c[i];
                assert!((a[i] - want).abs() <= 1e-12 * scale.max(want.abs()));
            }
        };
        check(&gradient(&combo).values, &gradient(&f).values, &gradient(&g).values);
        check(&divergence(&combo).values, &divergence(&f).values, &divergence(&g).values);
        check(&curl(&combo).values, &curl(&f).values, &curl(&g).values);
        check(&vec_laplacian(&combo).values, &vec_laplacian(&f).values, &vec_laplacian(&g).values);
        check(&grad_div(&combo).values, &grad_div(&f).values, &grad_div(&g).values);
    }

    #[test]
    fn inner_product_examples() {
        // Unit field on the unit square with 9×9 interior nodes at h=0.1:
        // ‖f‖² = 81 · 0.01 = 0.81.
        let grid = Arc::new(Grid::new(2, &[9, 9], &[0.1, 0.1]).unwrap());
        let f = VectorField::constant(grid, [1.0, 0.0, 0.0]);
        assert!((inner(&f, &f) - 0.81).abs() <= 1e-12);

        // Zero field → all norms zero.
        let grid = dyadic_grid2();
        let z = VectorField::zeros(grid.clone());
        assert_eq!(norm_l2(&z), 0.0);
        assert_eq!(norm_h1(&z), 0.0);

        // A single interior unit value with h = (0.5, 0.5) → ‖f‖² = 0.25.
        let grid = Arc::new(Grid::new(2, &[3, 3], &[0.5, 0.5]).unwrap());
        let mut f = VectorField::zeros(grid.clone());
        f.set(grid.interior_nodes()[0], [1.0, 0.0, 0.0]);
        assert_eq!(inner(&f, &f), 0.25);
    }

    #[test]
    fn planar_grids_have_no_third_axis_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let grid = dyadic_grid2();
        let f: VectorField = random_field(&grid, &mut rng, false);
        let g = gradient(&f);
        for node in 0..grid.num_nodes() {
            for c in 0..3 {
                assert_eq!(g.at(node, 3 * c + 2), 0.0, "∂₃ must vanish on planar grids");
            }
        }
        // curl still produces in-plane components from f₃.
        let f3 = VectorField::from_fn(grid.clone(), |x| [0.0, 0.0, x[0] + x[1]]);
        let c = curl(&f3);
        let mid = grid.interior_nodes()[grid.interior_nodes().len() / 2];
        assert!((c.at(mid, 0) - 1.0).abs() < 1e-12);
        assert!((c.at(mid, 1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_outputs_are_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let grid = rough_grid3();
        let f: VectorField = random_field(&grid, &mut rng, false);
        for &b in grid.boundary_nodes() {
            assert_eq!(gradient(&f).get(b), [0.0; 9]);
            assert_eq!(vec_laplacian(&f).get(b), [0.0; 3]);
            assert_eq!(curl(&f).get(b), [0.0; 3]);
        }
    }
}
