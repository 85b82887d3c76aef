//! Constitutive layer: material constants, derived PDE coefficients,
//! admissibility checks, and the pointwise constitutive maps.
//!
//! The stored energy density in the small-strain, locked-phase regime is
//!
//! ```text
//! ψ(ε, N, ν) = ½λ(tr ε)² + μ ε·ε + ½k₁(tr N)² + k₂ SymN·SymN + k₂′ SkwN·SkwN
//!            + k₃ (tr ε)(tr N) + k₃′ SymN·ε + ½k₀|ν|²
//! ```
//!
//! with ε = Sym∇u the small strain and N = ∇ν the phason gradient. The
//! balance equations use six reduced coefficients derived from the raw
//! constants:
//!
//! ```text
//! ξ = λ + μ     ξ̄ = k₃ + ½k₃′     ζ = k₂ + k₂′
//! γ = k₁ + k₂ − k₂′     κ = ½k₃′     κ₀ = k₀
//! ```
//!
//! Dissipation enters through the phason drag ς|ν_t|² and the optional
//! viscous regularizers ε_visc|∇u_t|², δ_visc|∇ν_t|², all sums of squares.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Raw constitutive constants. The library is unit-agnostic; all checks
/// against these values are relative.
///
/// Naming note: the strain tensor and the viscous regularizer are both
/// conventionally written ε; here the strain lives in
/// [`SmallStrainInputs::eps_strain`] and the regularizer in `eps_visc`,
/// so the two can never be confused in code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Lamé modulus λ (stress units).
    pub lambda: f64,
    /// Lamé modulus μ (stress units).
    pub mu: f64,
    /// Phason self-action stiffness k₀ ≥ 0 (stress/length²).
    pub k0: f64,
    /// Phason elastic constant k₁ (stress units).
    pub k1: f64,
    /// Phason elastic constant k₂ (stress units).
    pub k2: f64,
    /// Phason elastic constant k₂′ (stress units).
    pub k2p: f64,
    /// Strain–phason coupling constant k₃ (stress units).
    pub k3: f64,
    /// Strain–phason coupling constant k₃′ (stress units).
    pub k3p: f64,
    /// Mass density ρ > 0 (mass/volume).
    pub rho: f64,
    /// Phason drag coefficient ς > 0 (stress·time).
    pub varsigma: f64,
    /// Gyroscopic coupling ℓ ≥ 0 (scale factor on (curl u_t)×ν_t).
    pub ell: f64,
    /// Viscous regularizer ε ≥ 0 on ∇u_t (stress·time).
    pub eps_visc: f64,
    /// Viscous regularizer δ ≥ 0 on ∇ν_t (stress·time).
    pub delta_visc: f64,
}

impl MaterialParams {
    /// Checks the basic validity requirements: ρ > 0, ς > 0,
    /// k₀ ≥ 0, ℓ ≥ 0, ε_visc ≥ 0, δ_visc ≥ 0, and finiteness of
    /// every constant. Admissibility for the energy or the well-posedness
    /// estimates is a separate, stricter check ([`check_admissibility`]).
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("k0", self.k0),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k2p", self.k2p),
            ("k3", self.k3),
            ("k3p", self.k3p),
            ("rho", self.rho),
            ("varsigma", self.varsigma),
            ("ell", self.ell),
            ("eps_visc", self.eps_visc),
            ("delta_visc", self.delta_visc),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(Error::InvalidMaterial(format!("{name} is not finite")));
            }
        }
        if self.rho <= 0.0 {
            return Err(Error::InvalidMaterial(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.varsigma <= 0.0 {
            return Err(Error::InvalidMaterial(format!(
                "varsigma must be > 0, got {}",
                self.varsigma
            )));
        }
        if self.k0 < 0.0 {
            return Err(Error::InvalidMaterial(format!("k0 must be >= 0, got {}", self.k0)));
        }
        if self.ell < 0.0 {
            return Err(Error::InvalidMaterial(format!("ell must be >= 0, got {}", self.ell)));
        }
        if self.eps_visc < 0.0 {
            return Err(Error::InvalidMaterial(format!(
                "eps_visc must be >= 0, got {}",
                self.eps_visc
            )));
        }
        if self.delta_visc < 0.0 {
            return Err(Error::InvalidMaterial(format!(
                "delta_visc must be >= 0, got {}",
                self.delta_visc
            )));
        }
        Ok(())
    }
}

/// The six reduced coefficients entering the balance equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoefficients {
    /// ξ = λ + μ, coefficient of ∇div u in the displacement equation.
    pub xi: f64,
    /// ξ̄ = k₃ + ½k₃′, coefficient of the cross ∇div coupling.
    pub xibar: f64,
    /// ζ = k₂ + k₂′, coefficient of Δν in the phason equation.
    pub zeta: f64,
    /// γ = k₁ + k₂ − k₂′, coefficient of ∇div ν in the phason equation.
    pub gamma: f64,
    /// κ = ½k₃′, coefficient of the cross Δ coupling.
    pub kappa: f64,
    /// κ₀ = k₀, phason self-action stiffness.
    pub kappa0: f64,
}

/// Computes the reduced coefficients from the raw constants. Exact by
/// construction and linear in the inputs.
pub fn derive_coefficients(p: &MaterialParams) -> DerivedCoefficients {
    DerivedCoefficients {
        xi: p.lambda + p.mu,
        xibar: p.k3 + 0.5 * p.k3p,
        zeta: p.k2 + p.k2p,
        gamma: p.k1 + p.k2 - p.k2p,
        kappa: 0.5 * p.k3p,
        kappa0: p.k0,
    }
}

/// Inequality set to test in [`check_admissibility`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityMode {
    /// Positivity conditions on the stored energy:
    /// μ > 0, λ+μ > 0, k₁ > 0, k₁ > |k₂|, |k₃| < √(½μ(k₁+k₂)), k₀ ≥ 0.
    Energy,
    /// Hypotheses under which the linear initial-boundary-value problem
    /// is well posed: μ > −λ, κ > 0, ξ̄ > 0, μ,ζ > 2κ, ξ,γ > 2ξ̄.
    Linear,
    /// Hypotheses for the gyro-coupled problem: the same inequality set
    /// as [`AdmissibilityMode::Linear`]; the additional smallness
    /// condition on the initial velocity is data-dependent and checked by
    /// the dynamics gate, not here.
    Gyro,
}

impl AdmissibilityMode {
    /// Stable lowercase name, as used in reports and configs.
    pub fn name(&self) -> &'static str {
        match self {
            AdmissibilityMode::Energy => "energy",
            AdmissibilityMode::Linear => "linear",
            AdmissibilityMode::Gyro => "gyro",
        }
    }
}

/// One failed strict inequality `lhs > rhs` (or `lhs >= rhs` where noted
/// by the name). `marginal` is set when the failure is within rounding
/// distance of equality: |lhs − rhs| < 1e−12·max(|lhs|, |rhs|, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Human-readable name of the inequality, e.g. `"mu > 2*kappa"`.
    pub name: &'static str,
    /// Value that had to be larger.
    pub lhs: f64,
    /// Value that had to be smaller.
    pub rhs: f64,
    /// Failure within 1e−12 relative distance of equality.
    pub marginal: bool,
}

/// Outcome of an admissibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// Which inequality set was tested.
    pub mode: AdmissibilityMode,
    /// True iff the full set holds strictly.
    pub pass: bool,
    /// Every violated inequality, by name, with both sides recorded.
    pub violations: Vec<Violation>,
    /// Non-failing boundary-case observations (e.g. k₀ = 0, which the
    /// estimates tolerate but treat as a degenerate limit).
    pub marginal_notes: Vec<String>,
}

impl AdmissibilityReport {
    /// True if some violation carries the given inequality name.
    pub fn violates(&self, name: &str) -> bool {
        self.violations.iter().any(|v| v.name == name)
    }
}

/// Relative closeness used for the `marginal` flag on violations.
fn near_equal(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Tests the inequality set of `mode` with zero tolerance: `a > b` means
/// exactly that in floating point. Boundary cases (|a−b| below 1e−12
/// relative) still fail but are flagged as marginal. Violations are data,
/// not errors.
// The negated comparisons are deliberate: `!(lhs > rhs)` makes NaN a
// violation, which `lhs <= rhs` would silently pass.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn check_admissibility(p: &MaterialParams, mode: AdmissibilityMode) -> AdmissibilityReport {
    let mut violations = Vec::new();
    let mut marginal_notes = Vec::new();
    // Strict `lhs > rhs`; NaN comparisons count as violations (non-marginal).
    let mut require_gt = |name: &'static str, lhs: f64, rhs: f64| {
        if !(lhs > rhs) {
            violations.push(Violation {
                name,
                lhs,
                rhs,
                marginal: near_equal(lhs, rhs),
            });
        }
    };

    match mode {
        AdmissibilityMode::Energy => {
            require_gt("mu > 0", p.mu, 0.0);
            require_gt("lambda + mu > 0", p.lambda + p.mu, 0.0);
            require_gt("k1 > 0", p.k1, 0.0);
            require_gt("k1 > |k2|", p.k1, p.k2.abs());
            // |k₃| < √(½μ(k₁+k₂)): reversed so the bound is the lhs.
            require_gt(
                "|k3| < sqrt(mu*(k1+k2)/2)",
                (0.5 * p.mu * (p.k1 + p.k2)).sqrt(),
                p.k3.abs(),
            );
            // Non-strict: k₀ = 0 is admissible for the energy.
            if !(p.k0 >= 0.0) {
                violations.push(Violation {
                    name: "k0 >= 0",
                    lhs: p.k0,
                    rhs: 0.0,
                    marginal: near_equal(p.k0, 0.0),
                });
            }
        }
        AdmissibilityMode::Linear | AdmissibilityMode::Gyro => {
            let c = derive_coefficients(p);
            require_gt("mu > -lambda", p.mu, -p.lambda);
            require_gt("kappa > 0", c.kappa, 0.0);
            require_gt("xibar > 0", c.xibar, 0.0);
            require_gt("mu > 2*kappa", p.mu, 2.0 * c.kappa);
            require_gt("zeta > 2*kappa", c.zeta, 2.0 * c.kappa);
            require_gt("xi > 2*xibar", c.xi, 2.0 * c.xibar);
            require_gt("gamma > 2*xibar", c.gamma, 2.0 * c.xibar);
            if c.kappa0 == 0.0 {
                marginal_notes.push(
                    "kappa0 = 0: admissible, but the phason field loses its zero-order \
                     restoring term and the corresponding a priori control degenerates"
                        .to_string(),
                );
            }
        }
    }

    AdmissibilityReport {
        mode,
        pass: violations.is_empty(),
        violations,
        marginal_notes,
    }
}

/// Pointwise inputs of the constitutive maps. Rates are optional and only
/// needed for dissipative evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallStrainInputs {
    /// Small strain ε = Sym∇u (symmetric; enforced on construction).
    pub eps_strain: Matrix3<f64>,
    /// Phason gradient N = ∇ν (no symmetry assumed).
    pub n_grad: Matrix3<f64>,
    /// Phason field ν.
    pub nu: Vector3<f64>,
    /// Velocity gradient ∇u_t, required when eps_visc > 0 stresses are evaluated.
    pub grad_ut: Option<Matrix3<f64>>,
    /// Phason-rate gradient ∇ν_t, required when delta_visc > 0 stresses are evaluated.
    pub grad_nut: Option<Matrix3<f64>>,
    /// Phason rate ν_t.
    pub nu_t: Option<Vector3<f64>>,
}

impl SmallStrainInputs {
    /// Builds the inputs, symmetrizing `eps_strain` when its asymmetry is
    /// at most 1e−12 relative and rejecting anything larger.
    pub fn new(eps_strain: Matrix3<f64>, n_grad: Matrix3<f64>, nu: Vector3<f64>) -> Result<Self> {
        let asym = (eps_strain - eps_strain.transpose()).abs().max();
        let scale = eps_strain.abs().max().max(1.0);
        if asym > 1e-12 * scale {
            return Err(Error::ShapeMismatch(format!(
                "strain tensor asymmetry {asym:e} exceeds 1e-12 relative tolerance"
            )));
        }
        Ok(SmallStrainInputs {
            eps_strain: 0.5 * (eps_strain + eps_strain.transpose()),
            n_grad,
            nu,
            grad_ut: None,
            grad_nut: None,
            nu_t: None,
        })
    }

    /// Attaches a velocity gradient for viscous stress evaluation.
    pub fn with_grad_ut(mut self, grad_ut: Matrix3<f64>) -> Self {
        self.grad_ut = Some(grad_ut);
        self
    }

    /// Attaches a phason-rate gradient for viscous phason-stress evaluation.
    pub fn with_grad_nut(mut self, grad_nut: Matrix3<f64>) -> Self {
        self.grad_nut = Some(grad_nut);
        self
    }

    /// Attaches a phason rate.
    pub fn with_nu_t(mut self, nu_t: Vector3<f64>) -> Self {
        self.nu_t = Some(nu_t);
        self
    }
}

/// Symmetric part of a tensor.
fn sym(m: &Matrix3<f64>) -> Matrix3<f64> {
    0.5 * (m + m.transpose())
}

/// Skew part of a tensor.
fn skw(m: &Matrix3<f64>) -> Matrix3<f64> {
    0.5 * (m - m.transpose())
}

/// Full contraction a·b = Σᵢⱼ aᵢⱼ bᵢⱼ.
fn ddot(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}

/// Stored energy density ψ(ε, N, ν). Rates never enter the energy.
pub fn energy_density(p: &MaterialParams, s: &SmallStrainInputs) -> f64 {
    let eps = &s.eps_strain;
    let tr_e = eps.trace();
    let tr_n = s.n_grad.trace();
    let sym_n = sym(&s.n_grad);
    let skw_n = skw(&s.n_grad);
    0.5 * p.lambda * tr_e * tr_e
        + p.mu * ddot(eps, eps)
        + 0.5 * p.k1 * tr_n * tr_n
        + p.k2 * ddot(&sym_n, &sym_n)
        + p.k2p * ddot(&skw_n, &skw_n)
        + p.k3 * tr_e * tr_n
        + p.k3p * ddot(&sym_n, eps)
        + 0.5 * p.k0 * s.nu.dot(&s.nu)
}

/// Macroscopic stress σ = λ(tr ε)I + 2με + k₃(tr N)I + k₃′SymN, plus the
/// viscous part ε_visc·∇u_t when the regularizer is active. Fails when
/// eps_visc > 0 but no velocity gradient was supplied.
pub fn stress_sigma(p: &MaterialParams, s: &SmallStrainInputs) -> Result<Matrix3<f64>> {
    let tr_e = s.eps_strain.trace();
    let tr_n = s.n_grad.trace();
    let mut sigma = Matrix3::identity() * (p.lambda * tr_e + p.k3 * tr_n)
        + 2.0 * p.mu * s.eps_strain
        + p.k3p * sym(&s.n_grad);
    if p.eps_visc > 0.0 {
        match &s.grad_ut {
            Some(g) => sigma += p.eps_visc * g,
            None => {
                return Err(Error::IncompleteInput(
                    "stress_sigma: grad_ut is required when eps_visc > 0".into(),
                ))
            }
        }
    }
    Ok(sigma)
}

/// Phason stress 𝒮ₐ = k₁(tr N)I + 2k₂SymN + 2k₂′SkwN + k₃(tr ε)I + k₃′ε,
/// plus δ_visc·∇ν_t when the phason regularizer is active.
pub fn phason_stress(p: &MaterialParams, s: &SmallStrainInputs) -> Result<Matrix3<f64>> {
    let tr_e = s.eps_strain.trace();
    let tr_n = s.n_grad.trace();
    let mut stress = Matrix3::identity() * (p.k1 * tr_n + p.k3 * tr_e)
        + 2.0 * p.k2 * sym(&s.n_grad)
        + 2.0 * p.k2p * skw(&s.n_grad)
        + p.k3p * s.eps_strain;
    if p.delta_visc > 0.0 {
        match &s.grad_nut {
            Some(g) => stress += p.delta_visc * g,
            None => {
                return Err(Error::IncompleteInput(
                    "phason_stress: grad_nut is required when delta_visc > 0".into(),
                ))
            }
        }
    }
    Ok(stress)
}

/// Phason self-action zₐ = k₀ν + ς ν_t.
pub fn self_action(p: &MaterialParams, nu: &Vector3<f64>, nu_t: &Vector3<f64>) -> Vector3<f64> {
    p.k0 * nu + p.varsigma * nu_t
}
