//! Energy bookkeeping and study protocols over recorded trajectories.
//!
//! The discrete energy of a state is the quadratic functional
//!
//! ```text
//! E = ½ρ‖u_t‖² + ½κ₀‖ν‖² + ½μ‖∇u‖² + ½ζ‖∇ν‖² + ½ξ‖div u‖² + ½γ‖div ν‖²
//!     + κ⟨∇u, ∇ν⟩ + ξ̄⟨div u, div ν⟩
//! ```
//!
//! whose step-to-step change the midpoint scheme balances exactly against
//! the dissipation dt·(ς‖ν_t^½‖² + ε‖∇u_t^½‖² + δ‖∇ν_t^½‖²); the
//! gyroscopic term is workless. On top of the itemized report this module
//! provides the ledger-residual series, an a-priori bound monitor with an
//! explicitly derived data constant, and three study protocols:
//! vanishing-viscosity continuation, manufactured-solution convergence,
//! and the uniqueness/difference probe.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::dynamics::{
    self, BackendChoice, FieldState, Forcing, Model, SolverConfig, Trajectory,
};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;
use crate::material::{derive_coefficients, DerivedCoefficients, MaterialParams};
use crate::ops;

/// Itemized discrete energy of one state, with step-context extras.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// ½ρ‖u_t‖².
    pub kinetic: f64,
    /// ½κ₀‖ν‖².
    pub phason_potential: f64,
    /// ½μ‖∇u‖².
    pub grad_u: f64,
    /// ½ζ‖∇ν‖².
    pub grad_nu: f64,
    /// ½ξ‖div u‖².
    pub div_u: f64,
    /// ½γ‖div ν‖².
    pub div_nu: f64,
    /// κ⟨∇u, ∇ν⟩.
    pub cross_grad: f64,
    /// ξ̄⟨div u, div ν⟩.
    pub cross_div: f64,
    /// Sum of the terms above, in that order.
    pub total: f64,
    /// dt·(ς‖ν_t^½‖² + ε‖∇u_t^½‖² + δ‖∇ν_t^½‖²); zero without step context.
    pub dissipated_step: f64,
    /// ⟨(curl u_t^½)×ν_t^½, ν_t^½⟩; zero without step context.
    pub gyro_power: f64,
}

/// Evaluates the itemized energy of a state. `dissipated_step` and
/// `gyro_power` are left zero; the stepper fills them per step.
pub fn total_energy(
    state: &FieldState,
    p: &MaterialParams,
    c: &DerivedCoefficients,
) -> EnergyReport {
    let grad_u_t = ops::gradient(&state.u);
    let grad_nu_t = ops::gradient(&state.nu);
    let div_u_f = ops::divergence(&state.u);
    let div_nu_f = ops::divergence(&state.nu);

    let kinetic = 0.5 * p.rho * ops::inner(&state.ut, &state.ut);
    let phason_potential = 0.5 * c.kappa0 * ops::inner(&state.nu, &state.nu);
    let grad_u = 0.5 * p.mu * ops::inner(&grad_u_t, &grad_u_t);
    let grad_nu = 0.5 * c.zeta * ops::inner(&grad_nu_t, &grad_nu_t);
    let div_u = 0.5 * c.xi * ops::inner(&div_u_f, &div_u_f);
    let div_nu = 0.5 * c.gamma * ops::inner(&div_nu_f, &div_nu_f);
    let cross_grad = c.kappa * ops::inner(&grad_u_t, &grad_nu_t);
    let cross_div = c.xibar * ops::inner(&div_u_f, &div_nu_f);
    let total =
        kinetic + phason_potential + grad_u + grad_nu + div_u + div_nu + cross_grad + cross_div;
    EnergyReport {
        kinetic,
        phason_potential,
        grad_u,
        grad_nu,
        div_u,
        div_nu,
        cross_grad,
        cross_div,
        total,
        dissipated_step: 0.0,
        gyro_power: 0.0,
    }
}

/// Energy removed by one step of size dt with midpoint rates (v, w):
/// dt·(ς‖w‖² + ε‖∇v‖² + δ‖∇w‖²).
pub fn rate_dissipation(p: &MaterialParams, dt: f64, v: &VectorField, w: &VectorField) -> f64 {
    let mut d = p.varsigma * ops::inner(w, w);
    if p.eps_visc != 0.0 {
        let g = ops::gradient(v);
        d += p.eps_visc * ops::inner(&g, &g);
    }
    if p.delta_visc != 0.0 {
        let g = ops::gradient(w);
        d += p.delta_visc * ops::inner(&g, &g);
    }
    dt * d
}

/// Work done by the gyroscopic term on the phason rate,
/// ⟨(curl v)×w, w⟩ — identically zero up to rounding because the cross
/// product is pointwise orthogonal to w.
pub fn gyro_power(v: &VectorField, w: &VectorField) -> f64 {
    let force = ops::pointwise_cross(&ops::curl(v), w);
    ops::inner(&force, w)
}

/// Ledger residuals |ΔE + dissipated| / max(|E|, 1) between consecutive
/// records, recomputed from the recorded totals and cumulative dissipation.
#[derive(Debug, Clone)]
pub struct BalanceSeries {
    /// One residual per record after the first.
    pub residuals: Vec<f64>,
    /// Largest residual (0 for trajectories with a single record).
    pub max: f64,
}

/// Recomputes the energy-balance residual series of a trajectory.
pub fn energy_balance_residual(traj: &Trajectory) -> BalanceSeries {
    let mut residuals = Vec::with_capacity(traj.records.len().saturating_sub(1));
    for pair in traj.records.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let delta_e = cur.energy.total - prev.energy.total;
        let dissipated = cur.dissipated_cum - prev.dissipated_cum;
        residuals.push((delta_e + dissipated).abs() / cur.energy.total.abs().max(1.0));
    }
    let max = residuals.iter().cloned().fold(0.0, f64::max);
    BalanceSeries { residuals, max }
}

/// A-priori bound monitor: the monitored combination per record and its
/// ratio to the data constant c̄.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Data constant, Young absorption of the initial energy:
    /// c̄ = ρ‖u̇₀‖² + κ₀‖ν₀‖² + (μ+κ)‖∇u₀‖² + (ζ+κ)‖∇ν₀‖²
    ///     + (ξ+ξ̄)‖div u₀‖² + (γ+ξ̄)‖div ν₀‖².
    pub cbar: f64,
    /// ρ‖u_t‖² + κ₀‖ν‖² + ½μ‖∇u‖² + ½ζ‖∇ν‖² + 2∫dissipation, per record.
    pub lhs: Vec<f64>,
    /// max(lhs) / c̄ (0 when both vanish).
    pub max_ratio: f64,
}

/// Monitors the a-priori estimate along a run: under the theorem-mode
/// inequalities (μ,ζ > 2κ and ξ,γ > 2ξ̄) the monitored combination never
/// exceeds twice the initial energy, which Young's inequality bounds by
/// c̄ computed from the data alone. The time integral of the dissipation
/// uses the same midpoint quadrature as the stepper, so the comparison
/// inherits no quadrature error.
pub fn apriori_bound_monitor(
    traj: &Trajectory,
    p: &MaterialParams,
    c: &DerivedCoefficients,
) -> BoundReport {
    let s0 = &traj.states[0].1;
    let gu = ops::gradient(&s0.u);
    let gn = ops::gradient(&s0.nu);
    let du = ops::divergence(&s0.u);
    let dn = ops::divergence(&s0.nu);
    let cbar = p.rho * ops::inner(&s0.ut, &s0.ut)
        + c.kappa0 * ops::inner(&s0.nu, &s0.nu)
        + (p.mu + c.kappa) * ops::inner(&gu, &gu)
        + (c.zeta + c.kappa) * ops::inner(&gn, &gn)
        + (c.xi + c.xibar) * ops::inner(&du, &du)
        + (c.gamma + c.xibar) * ops::inner(&dn, &dn);

    let lhs: Vec<f64> = traj
        .records
        .iter()
        .map(|r| {
            2.0 * r.energy.kinetic
                + 2.0 * r.energy.phason_potential
                + r.energy.grad_u
                + r.energy.grad_nu
                + 2.0 * r.dissipated_cum
        })
        .collect();
    let lhs_max = lhs.iter().cloned().fold(0.0, f64::max);
    let max_ratio = if cbar > 0.0 {
        lhs_max / cbar
    } else if lhs_max == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    BoundReport { cbar, lhs, max_ratio }
}

/// One rung of the vanishing-viscosity ladder.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationRung {
    /// Displacement-rate viscosity of the rung.
    pub eps: f64,
    /// Phason-rate viscosity of the rung.
    pub delta: f64,
    /// ‖u^{ε,δ} − u^ref‖ in L²-in-time (midpoint-consistent rectangle rule).
    pub dist_u: f64,
    /// Same for ν.
    pub dist_nu: f64,
}

/// Result of the continuation study.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    /// Distances per ladder rung, in ladder order.
    pub rungs: Vec<ContinuationRung>,
    /// True when both distance columns decrease along the ladder within
    /// 10% slack per rung.
    pub monotone: bool,
}

fn l2_in_time_distance(a: &Trajectory, b: &Trajectory, dt: f64) -> (f64, f64) {
    assert_eq!(a.states.len(), b.states.len(), "trajectories recorded at different cadence");
    let mut su = 0.0;
    let mut sn = 0.0;
    for ((ka, sa), (kb, sb)) in a.states.iter().zip(&b.states) {
        assert_eq!(ka, kb, "trajectories recorded at different steps");
        let mut diff_u = sa.u.clone();
        diff_u.axpy(-1.0, &sb.u);
        let mut diff_n = sa.nu.clone();
        diff_n.axpy(-1.0, &sb.nu);
        su += dt * ops::inner(&diff_u, &diff_u);
        sn += dt * ops::inner(&diff_n, &diff_n);
    }
    (su.sqrt(), sn.sqrt())
}

/// Runs the viscosity ladder against its reference and tabulates the
/// L²-in-time differences. With ℓ = 0 the reference is the unregularized
/// (ε = δ = 0) linear run; with ℓ > 0 the model is gyroscopic and the
/// final (finest) rung serves as the reference.
pub fn viscosity_continuation(
    grid: Arc<Grid>,
    p: &MaterialParams,
    state0: &FieldState,
    cfg: &SolverConfig,
    ladder: &[(f64, f64)],
) -> Result<ConvergenceTable> {
    if ladder.is_empty() {
        return Err(Error::Config { line: None, msg: "viscosity ladder is empty".to_string() });
    }
    let mut dense_cfg = cfg.clone();
    dense_cfg.record_every = 1;
    let model = if p.ell == 0.0 { Model::Linear } else { Model::Gyro };

    let run_at = |eps: f64, delta: f64| -> Result<Trajectory> {
        let mut pr = *p;
        pr.eps_visc = eps;
        pr.delta_visc = delta;
        dynamics::run(grid.clone(), &pr, state0.clone(), &dense_cfg, model)
    };

    let (reference, rung_pairs) = if p.ell == 0.0 {
        (run_at(0.0, 0.0)?, ladder)
    } else {
        let (finest, rest) = ladder.split_last().unwrap();
        (run_at(finest.0, finest.1)?, rest)
    };

    let mut rungs = Vec::with_capacity(rung_pairs.len());
    for &(eps, delta) in rung_pairs {
        let traj = run_at(eps, delta)?;
        let (dist_u, dist_nu) = l2_in_time_distance(&traj, &reference, cfg.dt);
        rungs.push(ContinuationRung { eps, delta, dist_u, dist_nu });
    }
    let slack = 1.10;
    let monotone = rungs.windows(2).all(|w| {
        w[1].dist_u <= slack * w[0].dist_u && w[1].dist_nu <= slack * w[0].dist_nu
    });
    Ok(ConvergenceTable { rungs, monotone })
}

/// The manufactured space-time solution family of the convergence study:
/// separable bump s(x) = Π_a sin²(π x_a / extent_a) (zero value and zero
/// normal slope on every face), displacement amp_u·s·cos(t)·e₁ and phason
/// amp_nu·s·cos(t)·e₂, with the body forces that make the pair an exact
/// solution of the linear system injected per step.
#[derive(Debug, Clone, Copy)]
pub struct Manufactured {
    /// Displacement amplitude.
    pub amp_u: f64,
    /// Phason amplitude.
    pub amp_nu: f64,
    /// Domain edge lengths (the bump is tuned to the extent).
    pub extent: [f64; 2],
}

impl Manufactured {
    /// s and its derivatives at a point: (s, ∂₁s, ∂₂s, ∂₁₁s, ∂₂₂s, ∂₁₂s).
    fn bump(&self, x: [f64; 3]) -> (f64, f64, f64, f64, f64, f64) {
        let w1 = PI / self.extent[0];
        let w2 = PI / self.extent[1];
        let s1 = (w1 * x[0]).sin().powi(2);
        let s2 = (w2 * x[1]).sin().powi(2);
        let d1 = w1 * (2.0 * w1 * x[0]).sin();
        let d2 = w2 * (2.0 * w2 * x[1]).sin();
        let dd1 = 2.0 * w1 * w1 * (2.0 * w1 * x[0]).cos();
        let dd2 = 2.0 * w2 * w2 * (2.0 * w2 * x[1]).cos();
        (s1 * s2, d1 * s2, s1 * d2, dd1 * s2, s1 * dd2, d1 * d2)
    }

    /// Exact displacement at (t, x).
    pub fn displacement(&self, t: f64, x: [f64; 3]) -> [f64; 3] {
        let (s, ..) = self.bump(x);
        [self.amp_u * s * t.cos(), 0.0, 0.0]
    }

    /// Exact phason field at (t, x).
    pub fn phason(&self, t: f64, x: [f64; 3]) -> [f64; 3] {
        let (s, ..) = self.bump(x);
        [0.0, self.amp_nu * s * t.cos(), 0.0]
    }

    /// Body forces turning the pair into an exact solution of the linear
    /// system (requires ε = δ = ℓ = 0).
    pub fn forcing(&self, p: &MaterialParams, c: &DerivedCoefficients) -> Forcing {
        let m = *self;
        let (rho, varsigma) = (p.rho, p.varsigma);
        let (mu, xi, kappa, xibar) = (p.mu, c.xi, c.kappa, c.xibar);
        let (zeta, gamma, kappa0) = (c.zeta, c.gamma, c.kappa0);
        let (a, b) = (m.amp_u, m.amp_nu);
        let body_u = Box::new(move |t: f64, x: [f64; 3]| {
            let (s, _d1, _d2, dd1, dd2, d12) = m.bump(x);
            let ct = t.cos();
            let lap = dd1 + dd2;
            // ρu*_tt − μΔu* − ξ∇div u* − κΔν* − ξ̄∇div ν*
            [
                -rho * a * s * ct - mu * a * ct * lap - xi * a * ct * dd1
                    - xibar * b * ct * d12,
                -xi * a * ct * d12 - kappa * b * ct * lap - xibar * b * ct * dd2,
                0.0,
            ]
        });
        let body_nu = Box::new(move |t: f64, x: [f64; 3]| {
            let (s, _d1, _d2, dd1, dd2, d12) = m.bump(x);
            let ct = t.cos();
            let st = t.sin();
            let lap = dd1 + dd2;
            // ςν*_t + κ₀ν* − ζΔν* − γ∇div ν* − κΔu* − ξ̄∇div u*
            [
                -gamma * b * ct * d12 - kappa * a * ct * lap - xibar * a * ct * dd1,
                -varsigma * b * s * st + kappa0 * b * s * ct - zeta * b * ct * lap
                    - gamma * b * ct * dd2 - xibar * a * ct * d12,
                0.0,
            ]
        });
        Forcing { body_u, body_nu }
    }
}

/// One rung of the manufactured-solution ladder.
#[derive(Debug, Clone, Copy)]
pub struct MmsRung {
    /// Interior nodes per axis.
    pub n: usize,
    /// Grid spacing.
    pub h: f64,
    /// Time step (dt = h/2).
    pub dt: f64,
    /// L² error of u against the exact solution at t_end.
    pub err_u: f64,
    /// Same for ν.
    pub err_nu: f64,
}

/// Orders table of the manufactured-solution study.
#[derive(Debug, Clone)]
pub struct MmsReport {
    /// Errors per rung, coarse to fine.
    pub rungs: Vec<MmsRung>,
    /// Least-squares log-log slope of err_u against h.
    pub order_u: f64,
    /// Same for ν.
    pub order_nu: f64,
}

fn loglog_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Runs the manufactured-solution ladder on square 2D grids with dt = h/2
/// and measures the L² errors of both fields at t_end against the exact
/// solution, plus the least-squares convergence orders.
pub fn mms_convergence(
    p: &MaterialParams,
    m: &Manufactured,
    ns: &[usize],
    t_end: f64,
) -> Result<MmsReport> {
    if p.eps_visc != 0.0 || p.delta_visc != 0.0 || p.ell != 0.0 {
        return Err(Error::Config {
            line: None,
            msg: "manufactured forcing is derived for the plain linear system \
                  (eps_visc = delta_visc = ell = 0)"
                .to_string(),
        });
    }
    let c = derive_coefficients(p);
    let mut rungs = Vec::with_capacity(ns.len());
    for &n in ns {
        let grid = Arc::new(Grid::from_extent(
            2,
            &[n, n],
            &[m.extent[0], m.extent[1]],
        )?);
        let h = grid.h[0];
        let dt = h / 2.0;
        let steps = (t_end / dt).round() as usize;
        let u0 = VectorField::from_fn(grid.clone(), |x| m.displacement(0.0, x));
        let nu0 = VectorField::from_fn(grid.clone(), |x| m.phason(0.0, x));
        let zero = VectorField::zeros(grid.clone());
        let state0 = dynamics::project_initial_data(&grid, &u0, &zero, &nu0)?;
        let cfg = SolverConfig {
            dt,
            t_end: dt * steps as f64,
            krylov_tol: 1e-11,
            record_every: steps.max(1),
            ..SolverConfig::default()
        };
        let traj = dynamics::run_with_options(
            grid.clone(),
            p,
            state0,
            &cfg,
            Model::Linear,
            Some(m.forcing(p, &c)),
            BackendChoice::Minres,
        )?;
        let fin = traj.final_state();
        let t = fin.t;
        let mut err_u = fin.u.clone();
        err_u.axpy(-1.0, &VectorField::from_fn(grid.clone(), |x| m.displacement(t, x)));
        let mut err_nu = fin.nu.clone();
        err_nu.axpy(-1.0, &VectorField::from_fn(grid.clone(), |x| m.phason(t, x)));
        rungs.push(MmsRung {
            n,
            h,
            dt,
            err_u: ops::norm_l2(&err_u),
            err_nu: ops::norm_l2(&err_nu),
        });
    }
    let hs: Vec<f64> = rungs.iter().map(|r| r.h).collect();
    let eu: Vec<f64> = rungs.iter().map(|r| r.err_u).collect();
    let en: Vec<f64> = rungs.iter().map(|r| r.err_nu).collect();
    let (order_u, order_nu) = if rungs.len() >= 2 {
        (loglog_slope(&hs, &eu), loglog_slope(&hs, &en))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(MmsReport { rungs, order_u, order_nu })
}

/// Outcome of the uniqueness/difference probe.
#[derive(Debug, Clone)]
pub struct DifferenceReport {
    /// sup over recorded steps and fields of |traj(a) − traj(b)|∞
    /// (exactly 0 for identical inputs by determinism).
    pub max_abs_difference: f64,
    /// Energy of the difference trajectory per recorded step.
    pub difference_energy: Vec<f64>,
    /// Max residual of the homogeneous-system ledger on the difference:
    /// |ΔE_d + dt·(ς‖w_d‖² + ε‖∇v_d‖² + δ‖∇w_d‖²)| / max(|E_d|, 1).
    pub ledger_residual_max: f64,
    /// Max relative deviation of traj(a) − traj(b) from traj(a − b).
    pub superposition_defect: f64,
}

fn state_sub(a: &FieldState, b: &FieldState) -> FieldState {
    let mut u = a.u.clone();
    u.axpy(-1.0, &b.u);
    let mut ut = a.ut.clone();
    ut.axpy(-1.0, &b.ut);
    let mut nu = a.nu.clone();
    nu.axpy(-1.0, &b.nu);
    FieldState { t: a.t, u, ut, nu }
}

fn max_abs(f: &VectorField) -> f64 {
    f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Difference probe for the linear model: runs trajectories from state_a
/// and state_b, checks that their difference obeys the homogeneous
/// system's energy ledger, and cross-checks superposition by also running
/// the differenced initial data. Solves densely so linearity holds to
/// rounding.
pub fn uniqueness_probe(
    grid: Arc<Grid>,
    p: &MaterialParams,
    state_a: &FieldState,
    state_b: &FieldState,
    cfg: &SolverConfig,
) -> Result<DifferenceReport> {
    let c = derive_coefficients(p);
    let mut dense_cfg = cfg.clone();
    dense_cfg.record_every = 1;
    let run = |s0: FieldState| {
        dynamics::run_with_options(
            grid.clone(),
            p,
            s0,
            &dense_cfg,
            Model::Linear,
            None,
            BackendChoice::Dense,
        )
    };
    let ta = run(state_a.clone())?;
    let tb = run(state_b.clone())?;
    let td = run(state_sub(state_a, state_b))?;

    let scale = max_abs(&state_a.u)
        .max(max_abs(&state_a.ut))
        .max(max_abs(&state_a.nu))
        .max(max_abs(&state_b.u))
        .max(max_abs(&state_b.ut))
        .max(max_abs(&state_b.nu))
        .max(1.0);

    let mut max_abs_difference = 0.0_f64;
    let mut difference_energy = Vec::with_capacity(ta.states.len());
    let mut ledger_residual_max = 0.0_f64;
    let mut superposition_defect = 0.0_f64;
    let mut prev_diff: Option<FieldState> = None;
    let mut prev_e = 0.0;

    for (((_, sa), (_, sb)), (_, sd)) in ta.states.iter().zip(&tb.states).zip(&td.states) {
        let diff = state_sub(sa, sb);
        max_abs_difference = max_abs_difference
            .max(max_abs(&diff.u))
            .max(max_abs(&diff.ut))
            .max(max_abs(&diff.nu));

        let dev = state_sub(&diff, sd);
        superposition_defect = superposition_defect
            .max(max_abs(&dev.u) / scale)
            .max(max_abs(&dev.ut) / scale)
            .max(max_abs(&dev.nu) / scale);

        let e = total_energy(&diff, p, &c).total;
        if let Some(prev) = &prev_diff {
            // Midpoint rates of the difference reconstructed from states.
            let mut v = diff.u.clone();
            v.axpy(-1.0, &prev.u);
            v.scale(1.0 / cfg.dt);
            let mut w = diff.nu.clone();
            w.axpy(-1.0, &prev.nu);
            w.scale(1.0 / cfg.dt);
            let dissipated = rate_dissipation(p, cfg.dt, &v, &w);
            let residual = (e - prev_e + dissipated).abs() / e.abs().max(1.0);
            ledger_residual_max = ledger_residual_max.max(residual);
        }
        difference_energy.push(e);
        prev_e = e;
        prev_diff = Some(diff);
    }

    Ok(DifferenceReport {
        max_abs_difference,
        difference_energy,
        ledger_residual_max,
        superposition_defect,
    })
}
