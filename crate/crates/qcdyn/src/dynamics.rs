//! Time integration of the coupled displacement–phason system.
//!
//! The balance equations on the grid are
//!
//! ```text
//! ρ u_tt = μΔu + ξ∇div u + κΔν + ξ̄∇div ν + ε Δu_t            (displacement)
//! ς ν_t + ℓ(curl u_t)×ν_t = ζΔν + γ∇div ν + κΔu + ξ̄∇div u
//!                           − κ₀ν + δ Δν_t                     (phason)
//! ```
//!
//! with time-independent Dirichlet data for u and ν. The stepper is the
//! implicit midpoint rule in the unknowns (u_t^½, ν_t^½): one symmetric
//! linear system per step,
//!
//! ```text
//! [(2ρ/dt)·I − (dt/2)L_uu − R_u     −(dt/2)L_cross          ] [u_t^½]   [rhs_u ]
//! [−(dt/2)L_cross                    ς·I − R_n − (dt/2)L_nn ] [ν_t^½] = [rhs_ν ]
//! ```
//!
//! positive definite under the theorem-mode inequalities. The midpoint
//! rule conserves the quadratic energy of the conservative part exactly,
//! so the discrete energy ledger closes to solver precision. The
//! gyroscopic term ℓ(curl u_t^½)×ν_t^½ is lagged by Picard iteration:
//! every iterate solves the same symmetric system with an updated
//! right-hand side, and the term's pointwise orthogonality to ν_t^½
//! keeps it workless in the ledger.

use std::sync::Arc;

use crate::diagnostics::{self, EnergyReport};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::material::{
    check_admissibility, derive_coefficients, AdmissibilityMode, AdmissibilityReport,
    DerivedCoefficients, MaterialParams,
};
use crate::ops;
use crate::solve::{self, SolveFailure};

/// Which system is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Linear system, optionally with the viscous regularizers ε, δ.
    Linear,
    /// Gyroscopic phason inertia active (ℓ(curl u_t)×ν_t on the left).
    Gyro,
}

impl Model {
    /// Stable lowercase name as used in configs and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Model::Linear => "linear",
            Model::Gyro => "gyro",
        }
    }
}

/// The unknown fields at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// Current time.
    pub t: f64,
    /// Displacement; boundary nodes carry the grid's Dirichlet data.
    pub u: VectorField,
    /// Velocity; identically zero on boundary nodes.
    pub ut: VectorField,
    /// Phason field; boundary nodes carry the grid's Dirichlet data.
    pub nu: VectorField,
}

/// The spatial operators of the balance equations, bundled with their
/// coefficients. Each map reads a full field (interior + boundary layer)
/// and produces interior values with a zeroed boundary layer, so applying
/// one to a stored field automatically includes the Dirichlet lift, while
/// applying it to a zero-boundary field gives the homogeneous (symmetric)
/// part.
#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    /// Grid the operators act on.
    pub grid: Arc<Grid>,
    /// Raw constants (ρ, ς, ε, δ, ℓ are read from here).
    pub p: MaterialParams,
    /// Reduced coefficients (μ is read from `p`).
    pub c: DerivedCoefficients,
}

/// Bundles grid, material constants, and derived coefficients into the
/// operator set of the balance equations.
pub fn assemble_operators(
    grid: Arc<Grid>,
    c: DerivedCoefficients,
    p: MaterialParams,
) -> DiscreteOperators {
    DiscreteOperators { grid, p, c }
}

impl DiscreteOperators {
    /// a·Δf + b·∇div f, skipping zero-coefficient passes so decoupled
    /// configurations produce exact zeros.
    fn second_order(&self, f: &VectorField, a_lap: f64, a_graddiv: f64) -> VectorField {
        let mut out = VectorField::zeros(self.grid.clone());
        if a_lap != 0.0 {
            out.axpy(a_lap, &ops::vec_laplacian(f));
        }
        if a_graddiv != 0.0 {
            out.axpy(a_graddiv, &ops::grad_div(f));
        }
        out
    }

    /// L_uu f = μΔf + ξ∇div f.
    pub fn l_uu(&self, f: &VectorField) -> VectorField {
        self.second_order(f, self.p.mu, self.c.xi)
    }

    /// L_cross f = κΔf + ξ̄∇div f (the symmetric u↔ν coupling).
    pub fn l_cross(&self, f: &VectorField) -> VectorField {
        self.second_order(f, self.c.kappa, self.c.xibar)
    }

    /// L_nn f = ζΔf + γ∇div f − κ₀f (the zero-order term acts on
    /// interior nodes only; outputs stay zero on the boundary layer).
    pub fn l_nn(&self, f: &VectorField) -> VectorField {
        let mut out = self.second_order(f, self.c.zeta, self.c.gamma);
        if self.c.kappa0 != 0.0 {
            for &node in self.grid.interior_nodes() {
                let v = f.get(node);
                let mut o = out.get(node);
                for i in 0..3 {
                    o[i] -= self.c.kappa0 * v[i];
                }
                out.set(node, o);
            }
        }
        out
    }

    /// Rate regularizer R_u f = ε·Δf.
    pub fn r_u(&self, f: &VectorField) -> VectorField {
        self.second_order(f, self.p.eps_visc, 0.0)
    }

    /// Rate regularizer R_n f = δ·Δf.
    pub fn r_n(&self, f: &VectorField) -> VectorField {
        self.second_order(f, self.p.delta_visc, 0.0)
    }

    /// Applies the symmetric midpoint block matrix to packed interior
    /// dofs `x = [v; w]` (v = u_t^½ candidates, w = ν_t^½ candidates).
    pub fn apply_midpoint_block(&self, dt: f64, x: &[f64]) -> Vec<f64> {
        let n3 = 3 * self.grid.interior_nodes().len();
        assert_eq!(x.len(), 2 * n3, "block operand size mismatch");
        let v = VectorField::from_interior_dofs(self.grid.clone(), &x[..n3]);
        let w = VectorField::from_interior_dofs(self.grid.clone(), &x[n3..]);
        let half_dt = 0.5 * dt;
        let cross_active = self.c.kappa != 0.0 || self.c.xibar != 0.0;

        let mut top = VectorField::zeros(self.grid.clone());
        top.axpy(2.0 * self.p.rho / dt, &v);
        top.axpy(-half_dt, &self.l_uu(&v));
        if self.p.eps_visc != 0.0 {
            top.axpy(-1.0, &self.r_u(&v));
        }
        if cross_active {
            top.axpy(-half_dt, &self.l_cross(&w));
        }

        let mut bot = VectorField::zeros(self.grid.clone());
        bot.axpy(self.p.varsigma, &w);
        bot.axpy(-half_dt, &self.l_nn(&w));
        if self.p.delta_visc != 0.0 {
            bot.axpy(-1.0, &self.r_n(&w));
        }
        if cross_active {
            bot.axpy(-half_dt, &self.l_cross(&v));
        }

        let mut out = top.interior_dofs();
        out.extend(bot.interior_dofs());
        out
    }
}

/// Time-stepping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Time step (> 0).
    pub dt: f64,
    /// Final time; the run takes `round(t_end/dt)` steps of exactly `dt`.
    pub t_end: f64,
    /// Relative change threshold ending the Picard iteration.
    pub picard_tol: f64,
    /// Picard iteration budget per step.
    pub picard_max: usize,
    /// Relative residual target of the inner linear solver.
    pub krylov_tol: f64,
    /// Inner solver iteration budget per solve.
    pub krylov_max: usize,
    /// Fixed summation order everywhere (the implementation is always
    /// deterministic; the flag is recorded for config fidelity).
    pub deterministic: bool,
    /// Diagnostic recording cadence in steps.
    pub record_every: usize,
    /// Start the run even when the well-posedness gate fails.
    pub override_gate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.01,
            t_end: 1.0,
            picard_tol: 1e-10,
            picard_max: 50,
            krylov_tol: 1e-10,
            krylov_max: 20_000,
            deterministic: true,
            record_every: 1,
            override_gate: false,
        }
    }
}

impl SolverConfig {
    /// Checks positivity/finiteness of every control.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config {
                line: None,
                msg: format!("solver.dt must be > 0, got {}", self.dt),
            });
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config {
                line: None,
                msg: format!("solver.t_end must be >= 0, got {}", self.t_end),
            });
        }
        for (name, v) in [("picard_tol", self.picard_tol), ("krylov_tol", self.krylov_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config {
                    line: None,
                    msg: format!("solver.{name} must be > 0, got {v}"),
                });
            }
        }
        for (name, v) in [
            ("picard_max", self.picard_max),
            ("krylov_max", self.krylov_max),
            ("record_every", self.record_every),
        ] {
            if v == 0 {
                return Err(Error::Config {
                    line: None,
                    msg: format!("solver.{name} must be >= 1"),
                });
            }
        }
        Ok(())
    }

    /// Number of steps the run takes: nearest integer to t_end/dt.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Smallness condition of the gyro gate, both sides recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GyroSmallness {
    /// ℓ·‖u̇₀‖_{H¹}.
    pub lhs: f64,
    /// ς/2.
    pub rhs: f64,
}

/// Outcome of the well-posedness gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    /// Model the gate was evaluated for.
    pub model: Model,
    /// Parameter inequality check in the matching mode.
    pub admissibility: AdmissibilityReport,
    /// All initial fields and their L²/H¹ norms are finite.
    pub data_finite: bool,
    /// Present for the gyro model: the strict initial-velocity smallness
    /// condition ℓ‖u̇₀‖_{H¹} < ς/2.
    pub gyro_smallness: Option<GyroSmallness>,
    /// True iff every part passed.
    pub pass: bool,
}

impl GateReport {
    /// One-line human-readable verdict used in logs.
    pub fn summary(&self) -> String {
        format!("gate {}: {}", if self.pass { "passed" } else { "failed" }, self.detail())
    }

    /// The condition-by-condition part of [`Self::summary`], also used
    /// verbatim in refusal errors.
    pub fn detail(&self) -> String {
        let mut parts = Vec::new();
        if self.admissibility.pass {
            parts.push(format!("{}-mode parameter inequalities hold", self.admissibility.mode.name()));
        } else {
            let names: Vec<_> =
                self.admissibility.violations.iter().map(|v| v.name).collect();
            parts.push(format!("violated: {}", names.join("; ")));
        }
        if !self.data_finite {
            parts.push("initial data not finite".to_string());
        }
        if let Some(g) = &self.gyro_smallness {
            parts.push(format!(
                "smallness ell*|du0|_H1 = {} {} sigma/2 = {}",
                g.lhs,
                if g.lhs < g.rhs { "<" } else { ">=" },
                g.rhs
            ));
        }
        parts.join("; ")
    }
}

/// Evaluates the well-posedness hypotheses for a model on given data:
/// parameter admissibility, finiteness of the initial norms, and (gyro
/// only) the strict smallness condition ℓ‖u̇₀‖_{H¹} < ς/2.
pub fn check_theorem_hypotheses(
    p: &MaterialParams,
    state0: &FieldState,
    model: Model,
) -> GateReport {
    let mode = match model {
        Model::Linear => AdmissibilityMode::Linear,
        Model::Gyro => AdmissibilityMode::Gyro,
    };
    let admissibility = check_admissibility(p, mode);
    let norms = [
        ops::norm_h1(&state0.u),
        ops::norm_l2(&state0.ut),
        ops::norm_h1(&state0.nu),
    ];
    let data_finite = state0.u.is_finite()
        && state0.ut.is_finite()
        && state0.nu.is_finite()
        && norms.iter().all(|n| n.is_finite());
    let gyro_smallness = match model {
        Model::Gyro => Some(GyroSmallness {
            lhs: p.ell * ops::norm_h1(&state0.ut),
            rhs: p.varsigma / 2.0,
        }),
        Model::Linear => None,
    };
    let pass = admissibility.pass
        && data_finite
        && gyro_smallness.is_none_or(|g| g.lhs < g.rhs);
    GateReport { model, admissibility, data_finite, gyro_smallness, pass }
}

/// Builds the t=0 state from sampled initial fields: boundary rows are
/// overwritten with the grid's Dirichlet data (u, ν) and zero (u_t).
pub fn project_initial_data(
    grid: &Arc<Grid>,
    u0: &VectorField,
    dot_u0: &VectorField,
    nu0: &VectorField,
) -> Result<FieldState> {
    for (name, f) in [("u0", u0), ("dot_u0", dot_u0), ("nu0", nu0)] {
        if !f.grid.same_shape(grid) {
            return Err(Error::ShapeMismatch(format!(
                "initial field {name} was sampled on a different grid"
            )));
        }
        if !f.is_finite() {
            return Err(Error::ShapeMismatch(format!("initial field {name} is not finite")));
        }
    }
    let mut u = u0.clone();
    let mut ut = dot_u0.clone();
    let mut nu = nu0.clone();
    u.stamp_boundary(&grid.bc_u);
    nu.stamp_boundary(&grid.bc_nu);
    ut.zero_boundary();
    Ok(FieldState { t: 0.0, u, ut, nu })
}

/// Advisory accuracy guard: warns when dt exceeds the fastest elastic
/// crossing time of one cell, h_min/√((μ+ξ)/ρ). The implicit scheme is
/// unconditionally stable, so this is never an error.
pub fn dt_accuracy_warning(
    p: &MaterialParams,
    c: &DerivedCoefficients,
    grid: &Grid,
    dt: f64,
) -> Option<String> {
    let speed2 = (p.mu + c.xi) / p.rho;
    if speed2 <= 0.0 {
        return None;
    }
    let h_min = grid.h.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = h_min / speed2.sqrt();
    (dt > threshold).then(|| {
        format!(
            "dt = {dt} exceeds the accuracy guard h/sqrt((mu+xi)/rho) = {threshold}; \
             the scheme stays stable but phase accuracy degrades"
        )
    })
}

/// Test-scaffolding body forces (manufactured-solution studies re-enable
/// the otherwise absent non-inertial forcing). Each closure maps
/// (t, position) to a force density vector.
pub struct Forcing {
    /// Body force density in the displacement equation.
    pub body_u: Box<dyn Fn(f64, [f64; 3]) -> [f64; 3]>,
    /// Body force density in the phason equation.
    pub body_nu: Box<dyn Fn(f64, [f64; 3]) -> [f64; 3]>,
}

/// Linear-solver backend for the step systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    /// Matrix-free MINRES with the configured tolerance (production path).
    Minres,
    /// Dense LU, assembled once per run (desk-scale probes needing solves
    /// exact to rounding).
    Dense,
}

enum BackendState {
    Minres,
    Dense(Option<solve::DenseSolver>),
}

/// Midpoint rates of one completed step.
pub struct StepRates {
    /// u_t^½ (zero on the boundary layer).
    pub v: VectorField,
    /// ν_t^½ (zero on the boundary layer).
    pub w: VectorField,
    /// Picard iterations used (0 when the gyro term is inactive).
    pub picard_iterations: usize,
}

/// Advances one trajectory. Construction performs no gate checks — the
/// orchestrating [`run`] owns the refusal policy; direct `Stepper` use is
/// for oracles and probes.
pub struct Stepper {
    ops: DiscreteOperators,
    cfg: SolverConfig,
    model: Model,
    /// Current state; boundary rows never change after construction.
    pub state: FieldState,
    step_index: usize,
    backend: BackendState,
    forcing: Option<Forcing>,
}

impl Stepper {
    /// Builds a stepper over validated inputs.
    pub fn new(
        grid: Arc<Grid>,
        p: MaterialParams,
        state0: FieldState,
        cfg: SolverConfig,
        model: Model,
        backend: BackendChoice,
        forcing: Option<Forcing>,
    ) -> Result<Stepper> {
        p.validate()?;
        cfg.validate()?;
        let c = derive_coefficients(&p);
        let backend = match backend {
            BackendChoice::Minres => BackendState::Minres,
            BackendChoice::Dense => BackendState::Dense(None),
        };
        Ok(Stepper {
            ops: assemble_operators(grid, c, p),
            cfg,
            model,
            state: state0,
            step_index: 0,
            backend,
            forcing,
        })
    }

    /// The operator bundle (for probes that need the block action).
    pub fn operators(&self) -> &DiscreteOperators {
        &self.ops
    }

    /// Steps taken so far.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    fn solve_block(&mut self, b: &[f64]) -> Result<Vec<f64>> {
        let ops = &self.ops;
        let dt = self.cfg.dt;
        let step = self.step_index + 1;
        let mut apply = |x: &[f64]| ops.apply_midpoint_block(dt, x);
        match &mut self.backend {
            BackendState::Minres => {
                match solve::minres(&mut apply, b, self.cfg.krylov_tol, self.cfg.krylov_max) {
                    Ok(out) => Ok(out.x),
                    Err(SolveFailure::NotConverged { iterations, residual }) => {
                        Err(Error::KrylovBreakdown { step, iterations, residual })
                    }
                    Err(SolveFailure::Singular) => {
                        Err(Error::SingularSystem(format!("midpoint system at step {step}")))
                    }
                }
            }
            BackendState::Dense(slot) => {
                if slot.is_none() {
                    let dim = b.len();
                    let solver = solve::DenseSolver::from_operator(dim, &mut apply)
                        .map_err(|_| {
                            Error::SingularSystem(format!("midpoint system at step {step}"))
                        })?;
                    *slot = Some(solver);
                }
                slot.as_ref()
                    .unwrap()
                    .solve(b)
                    .map_err(|_| Error::SingularSystem(format!("midpoint system at step {step}")))
            }
        }
    }

    /// Advances the state by one dt, returning the midpoint rates.
    pub fn step(&mut self) -> Result<StepRates> {
        let dt = self.cfg.dt;
        let grid = self.ops.grid.clone();
        let n3 = 3 * grid.interior_nodes().len();
        let step = self.step_index + 1;
        let t_mid = (self.step_index as f64 + 0.5) * dt;

        // Right-hand side: boundary lifts ride along because the operators
        // are applied to the full stored fields.
        let mut rhs_u = self.ops.l_uu(&self.state.u);
        rhs_u.axpy(1.0, &self.ops.l_cross(&self.state.nu));
        rhs_u.axpy(2.0 * self.ops.p.rho / dt, &self.state.ut);
        let mut rhs_n = self.ops.l_nn(&self.state.nu);
        rhs_n.axpy(1.0, &self.ops.l_cross(&self.state.u));
        if let Some(f) = &self.forcing {
            for &node in grid.interior_nodes() {
                let x = grid.position(node);
                let fu = (f.body_u)(t_mid, x);
                let fn_ = (f.body_nu)(t_mid, x);
                let mut ru = rhs_u.get(node);
                let mut rn = rhs_n.get(node);
                for i in 0..3 {
                    ru[i] += fu[i];
                    rn[i] += fn_[i];
                }
                rhs_u.set(node, ru);
                rhs_n.set(node, rn);
            }
        }
        let mut rhs = rhs_u.interior_dofs();
        rhs.extend(rhs_n.interior_dofs());

        // The gyro force enters the right-hand side lagged one Picard
        // iterate; ℓ=0 follows the identical single-solve path as the
        // linear model so the two are bit-identical.
        let gyro_active = self.model == Model::Gyro && self.ops.p.ell != 0.0;
        let ell = self.ops.p.ell;

        let (v, w, picard_iterations) = if !gyro_active {
            let sol = self.solve_block(&rhs)?;
            let v = VectorField::from_interior_dofs(grid.clone(), &sol[..n3]);
            let w = VectorField::from_interior_dofs(grid.clone(), &sol[n3..]);
            (v, w, 0)
        } else {
            let mut v_prev = VectorField::zeros(grid.clone());
            let mut w_prev = VectorField::zeros(grid.clone());
            let mut iterations = 0;
            loop {
                iterations += 1;
                let mut b = rhs.clone();
                if iterations > 1 {
                    // −ℓ(curl v⁻)×w⁻ moved to the right-hand side.
                    let force = ops::pointwise_cross(&ops::curl(&v_prev), &w_prev);
                    let fd = force.interior_dofs();
                    for (slot, f) in b[n3..].iter_mut().zip(&fd) {
                        *slot -= ell * f;
                    }
                }
                let sol = self.solve_block(&b)?;
                let v = VectorField::from_interior_dofs(grid.clone(), &sol[..n3]);
                let w = VectorField::from_interior_dofs(grid.clone(), &sol[n3..]);
                let change_v = diff_norm(&v, &v_prev) / ops::norm_l2(&v).max(1.0);
                let change_w = diff_norm(&w, &w_prev) / ops::norm_l2(&w).max(1.0);
                let change = change_v.max(change_w);
                v_prev = v;
                w_prev = w;
                if change <= self.cfg.picard_tol {
                    break;
                }
                if iterations >= self.cfg.picard_max {
                    return Err(Error::PicardDiverged {
                        step,
                        iterations,
                        last_change: change,
                    });
                }
            }
            (v_prev, w_prev, iterations)
        };

        // Midpoint updates; boundary rows untouched (rates vanish there).
        self.state.u.axpy(dt, &v);
        self.state.nu.axpy(dt, &w);
        for (ut, vi) in self.state.ut.values.iter_mut().zip(&v.values) {
            *ut = 2.0 * vi - *ut;
        }
        self.step_index += 1;
        self.state.t = self.step_index as f64 * dt;

        for (name, f) in [("u", &self.state.u), ("u_t", &self.state.ut), ("nu", &self.state.nu)] {
            if !f.is_finite() {
                return Err(Error::NonFinite { step, what: name.to_string() });
            }
        }
        Ok(StepRates { v, w, picard_iterations })
    }
}

fn diff_norm(a: &VectorField, b: &VectorField) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    ops::norm_l2(&d)
}

/// One recorded diagnostic row of a trajectory.
#[derive(Debug, Clone)]
pub struct Record {
    /// Step index (0 = initial state).
    pub step: usize,
    /// Time at the record.
    pub t: f64,
    /// Itemized energy, with this step's dissipation and gyro power.
    pub energy: EnergyReport,
    /// max-norm of ν_t^½ at this step (uniqueness-for-gyro monitor).
    pub nu_t_maxnorm: f64,
    /// |ΔE + dissipated| / max(|E|, 1) across the gap since the previous
    /// record.
    pub balance_residual: f64,
    /// Running Σ of dissipated_step over all steps so far (every step,
    /// not only recorded ones).
    pub dissipated_cum: f64,
}

/// A completed run: records at the configured cadence plus the recorded
/// states (always including step 0 and the final step).
pub struct Trajectory {
    /// Model that was integrated.
    pub model: Model,
    /// Gate outcome (recorded even when overridden).
    pub gate: GateReport,
    /// Human-readable advisories (dt guard, override notes, marginal notes).
    pub warnings: Vec<String>,
    /// Diagnostic rows.
    pub records: Vec<Record>,
    /// (step, state) pairs at the recording cadence.
    pub states: Vec<(usize, FieldState)>,
}

impl Trajectory {
    /// The state after the last step.
    pub fn final_state(&self) -> &FieldState {
        &self.states.last().expect("trajectory always records the final state").1
    }
}

/// Integrates the system with the production backend and no forcing.
/// Refuses to start (`GateRefused`) when the gate fails, unless
/// `cfg.override_gate` is set.
pub fn run(
    grid: Arc<Grid>,
    p: &MaterialParams,
    state0: FieldState,
    cfg: &SolverConfig,
    model: Model,
) -> Result<Trajectory> {
    run_with_options(grid, p, state0, cfg, model, None, BackendChoice::Minres)
}

/// [`run`] with an explicit backend and optional manufactured forcing.
pub fn run_with_options(
    grid: Arc<Grid>,
    p: &MaterialParams,
    state0: FieldState,
    cfg: &SolverConfig,
    model: Model,
    forcing: Option<Forcing>,
    backend: BackendChoice,
) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    let c = derive_coefficients(p);
    let gate = check_theorem_hypotheses(p, &state0, model);
    let mut warnings = Vec::new();
    if !gate.pass {
        if cfg.override_gate {
            warnings.push(format!("override active; {}", gate.summary()));
        } else {
            return Err(Error::GateRefused(gate.detail()));
        }
    }
    for note in &gate.admissibility.marginal_notes {
        warnings.push(note.clone());
    }
    if let Some(msg) = dt_accuracy_warning(p, &c, &grid, cfg.dt) {
        warnings.push(msg);
    }

    let mut stepper = Stepper::new(grid, *p, state0, cfg.clone(), model, backend, forcing)?;
    let n_steps = cfg.n_steps();

    let e0 = diagnostics::total_energy(&stepper.state, p, &c);
    let mut records = vec![Record {
        step: 0,
        t: 0.0,
        energy: e0,
        nu_t_maxnorm: 0.0,
        balance_residual: 0.0,
        dissipated_cum: 0.0,
    }];
    let mut states = vec![(0, stepper.state.clone())];
    let mut dissipated_cum = 0.0;
    let mut prev_total = e0.total;
    let mut prev_cum = 0.0;

    for step in 1..=n_steps {
        let rates = stepper.step()?;
        let dissipated = diagnostics::rate_dissipation(p, cfg.dt, &rates.v, &rates.w);
        dissipated_cum += dissipated;
        if step % cfg.record_every == 0 || step == n_steps {
            let mut energy = diagnostics::total_energy(&stepper.state, p, &c);
            energy.dissipated_step = dissipated;
            energy.gyro_power = diagnostics::gyro_power(&rates.v, &rates.w);
            let balance_residual = (energy.total - prev_total + (dissipated_cum - prev_cum))
                .abs()
                / energy.total.abs().max(1.0);
            let nu_t_maxnorm =
                rates.w.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            records.push(Record {
                step,
                t: stepper.state.t,
                energy,
                nu_t_maxnorm,
                balance_residual,
                dissipated_cum,
            });
            states.push((step, stepper.state.clone()));
            prev_total = energy.total;
            prev_cum = dissipated_cum;
        }
    }

    Ok(Trajectory { model, gate, warnings, records, states })
}

/// Dense spectral decomposition of the scalar wide Laplacian −Δ on
/// interior dofs: returns the k-th smallest eigenpair with eigenvalue
/// above a near-null cutoff (the composite operator has checkerboard
/// null modes on odd-sized lattices; those are skipped). The eigenvector
/// is returned as a zero-boundary scalar field, L²-normalized, with its
/// first nonzero component positive for sign determinism.
pub fn laplacian_eigenmode(grid: &Arc<Grid>, k: usize) -> Result<(f64, ScalarField)> {
    use nalgebra::{DMatrix, SymmetricEigen};
    let n = grid.interior_nodes().len();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let f = ScalarField::from_interior_dofs(grid.clone(), &e);
        e[j] = 0.0;
        // −Δ via the same composite the dynamics uses, restricted to one
        // component.
        let mut vec3 = VectorField::zeros(grid.clone());
        for &node in grid.interior_nodes() {
            vec3.values[3 * node] = f.values[node];
        }
        let lap = ops::vec_laplacian(&vec3);
        for (i, &node) in grid.interior_nodes().iter().enumerate() {
            a[(i, j)] = -lap.values[3 * node];
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let cutoff = 1e-9;
    let positive: Vec<usize> =
        order.into_iter().filter(|&i| eig.eigenvalues[i] > cutoff).collect();
    let &idx = positive.get(k).ok_or_else(|| {
        Error::ShapeMismatch(format!(
            "eigenmode index {k} out of range ({} positive modes)",
            positive.len()
        ))
    })?;
    let lambda = eig.eigenvalues[idx];
    let mut dofs: Vec<f64> = eig.eigenvectors.column(idx).iter().cloned().collect();
    if let Some(first) = dofs.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            for v in &mut dofs {
                *v = -*v;
            }
        }
    }
    let mut field = ScalarField::from_interior_dofs(grid.clone(), &dofs);
    let norm = ops::norm_l2(&field);
    field.scale(1.0 / norm);
    Ok((lambda, field))
}
