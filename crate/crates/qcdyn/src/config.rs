//! Run configuration: a flat `section.key = value` text format with a
//! total parser (every unknown key is an error, every missing required
//! key is an error naming the key), a canonical emitter satisfying
//! `parse(emit(cfg)) == cfg`, and builders that turn a configuration
//! into a [`Grid`] and an initial [`FieldState`].
//!
//! Lines are independent; `#` starts a comment; blank lines are ignored.
//! Values never contain `=` or `#`. Initial data are named analytic
//! profiles (or a snapshot-file reference) so that a config file alone
//! reproduces a run byte-for-byte.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{self, FieldState, Model, SolverConfig};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;
use crate::io;
use crate::material::{derive_coefficients, MaterialParams};
use crate::ops;

/// Which study protocol a run executes after (or instead of) the plain
/// time integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    /// Plain time integration only.
    None,
    /// Vanishing-viscosity ladder against the unregularized baseline.
    ViscosityLadder,
    /// Manufactured-solution grid-refinement study.
    Mms,
    /// Difference probe between two initial data (the second datum is the
    /// first scaled by ½).
    Uniqueness,
}

impl Study {
    /// Stable lowercase name as used in configs.
    pub fn name(&self) -> &'static str {
        match self {
            Study::None => "none",
            Study::ViscosityLadder => "viscosity_ladder",
            Study::Mms => "mms",
            Study::Uniqueness => "uniqueness",
        }
    }
}

/// Dirichlet boundary data: zero or a constant 3-vector per field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryData {
    /// Homogeneous Dirichlet data.
    Zero,
    /// The same 3-vector on every boundary node.
    Constant([f64; 3]),
}

/// Which of the three stored fields a snapshot reference reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotField {
    /// Displacement u.
    U,
    /// Velocity u_t.
    Ut,
    /// Phason ν.
    Nu,
}

impl SnapshotField {
    fn name(&self) -> &'static str {
        match self {
            SnapshotField::U => "u",
            SnapshotField::Ut => "ut",
            SnapshotField::Nu => "nu",
        }
    }
}

/// Named analytic profile (or file reference) for one initial field.
///
/// The smooth profiles are built from the separable bump
/// s(x) = Π_a sin²(π·x_a/extent_a), which vanishes to second order on
/// the boundary — the shape every interior-accuracy test in this crate
/// relies on.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Identically zero.
    Zero,
    /// Constant 3-vector (boundary rows are overwritten by Dirichlet data).
    Constant([f64; 3]),
    /// `amp · s(x) · weights`.
    Sine2 { amp: f64, weights: [f64; 3] },
    /// `s(x) · weights` rescaled so the H¹ norm equals `amp` exactly —
    /// the knob for dialing the gyroscopic smallness gate.
    BumpH1 { amp: f64, weights: [f64; 3] },
    /// `amp · φ_index · e_component` with φ the index-th discrete
    /// Laplacian eigenfunction (ascending eigenvalues, near-null modes
    /// skipped).
    Eigenmode { index: usize, amp: f64, component: usize },
    /// Interior nodes drawn i.i.d. uniform in (−amp, amp) per component
    /// from a seeded ChaCha8 stream; reproducible across runs.
    Random { amp: f64, seed: u64 },
    /// One field read back from a snapshot file written by this crate.
    Snapshot { path: String, field: SnapshotField },
}

/// Grid section of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Interior node counts per axis.
    pub n: Vec<usize>,
    /// Physical box extent per axis.
    pub extent: Vec<f64>,
    /// Dirichlet data for u.
    pub bc_u: BoundaryData,
    /// Dirichlet data for ν.
    pub bc_nu: BoundaryData,
}

/// Initial-data section of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    /// Initial displacement u₀.
    pub u0: Profile,
    /// Initial velocity u̇₀.
    pub dot_u0: Profile,
    /// Initial phason ν₀.
    pub nu0: Profile,
}

/// Output section of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// Run directory (created on demand).
    pub dir: String,
    /// Whether final-state snapshot files are written.
    pub snapshots: bool,
}

/// A fully parsed run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Which system is integrated.
    pub model: Model,
    /// Which study protocol runs.
    pub study: Study,
    /// Raw material constants.
    pub material: MaterialParams,
    /// Grid geometry and boundary data.
    pub grid: GridSpec,
    /// Initial-data profiles.
    pub initial: InitialSpec,
    /// Time-stepping controls.
    pub solver: SolverConfig,
    /// Output controls.
    pub output: OutputSpec,
}

/// Every key the parser accepts, in canonical emission order.
const KNOWN_KEYS: &[&str] = &[
    "model",
    "study",
    "material.lambda",
    "material.mu",
    "material.k0",
    "material.k1",
    "material.k2",
    "material.k2p",
    "material.k3",
    "material.k3p",
    "material.rho",
    "material.varsigma",
    "material.ell",
    "material.eps_visc",
    "material.delta_visc",
    "grid.dim",
    "grid.n",
    "grid.extent",
    "grid.bc_u",
    "grid.bc_nu",
    "initial.u0",
    "initial.dot_u0",
    "initial.nu0",
    "solver.dt",
    "solver.t_end",
    "solver.picard_tol",
    "solver.picard_max",
    "solver.krylov_tol",
    "solver.krylov_max",
    "solver.deterministic",
    "solver.record_every",
    "solver.override_gate",
    "output.dir",
    "output.snapshots",
];

/// One raw `key = value` occurrence with its 1-based line number.
struct Raw {
    line: usize,
    value: String,
}

/// Key-value store for the parse pass: tracks duplicates, line numbers,
/// and which required keys were never supplied.
struct Entries {
    map: HashMap<String, Raw>,
}

impl Entries {
    fn scan(text: &str) -> Result<Entries> {
        let mut map: HashMap<String, Raw> = HashMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(Error::Config {
                    line: Some(line),
                    msg: format!("expected `key = value`, got `{}`", content.trim()),
                });
            };
            let key = content[..eq].trim().to_string();
            let value = content[eq + 1..].trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config {
                    line: Some(line),
                    msg: format!("unknown key `{key}`"),
                });
            }
            if let Some(first) = map.get(&key) {
                return Err(Error::Config {
                    line: Some(line),
                    msg: format!("duplicate key `{key}` (first set on line {})", first.line),
                });
            }
            map.insert(key, Raw { line, value });
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<Raw> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<Raw> {
        self.take(key).ok_or_else(|| Error::Config {
            line: None,
            msg: format!("missing required key `{key}`"),
        })
    }
}

fn bad_value(key: &str, raw: &Raw, want: &str) -> Error {
    Error::Config {
        line: Some(raw.line),
        msg: format!("key `{key}`: expected {want}, got `{}`", raw.value),
    }
}

fn parse_f64(key: &str, raw: &Raw) -> Result<f64> {
    raw.value.parse().map_err(|_| bad_value(key, raw, "a number"))
}

fn parse_usize(key: &str, raw: &Raw) -> Result<usize> {
    raw.value.parse().map_err(|_| bad_value(key, raw, "a non-negative integer"))
}

fn parse_bool(key: &str, raw: &Raw) -> Result<bool> {
    match raw.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad_value(key, raw, "`true` or `false`")),
    }
}

fn parse_usize_list(key: &str, raw: &Raw) -> Result<Vec<usize>> {
    let items: std::result::Result<Vec<usize>, _> =
        raw.value.split_whitespace().map(str::parse).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(bad_value(key, raw, "space-separated non-negative integers")),
    }
}

fn parse_f64_list(key: &str, raw: &Raw) -> Result<Vec<f64>> {
    let items: std::result::Result<Vec<f64>, _> =
        raw.value.split_whitespace().map(str::parse).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(bad_value(key, raw, "space-separated numbers")),
    }
}

fn parse_triple(key: &str, raw: &Raw, tokens: &[&str]) -> Result<[f64; 3]> {
    if tokens.len() != 3 {
        return Err(bad_value(key, raw, "three numbers"));
    }
    let mut out = [0.0; 3];
    for (slot, tok) in out.iter_mut().zip(tokens) {
        *slot = tok.parse().map_err(|_| bad_value(key, raw, "three numbers"))?;
    }
    Ok(out)
}

fn parse_model(key: &str, raw: &Raw) -> Result<Model> {
    match raw.value.as_str() {
        "linear" => Ok(Model::Linear),
        "gyro" => Ok(Model::Gyro),
        _ => Err(bad_value(key, raw, "`linear` or `gyro`")),
    }
}

fn parse_study(key: &str, raw: &Raw) -> Result<Study> {
    match raw.value.as_str() {
        "none" => Ok(Study::None),
        "viscosity_ladder" => Ok(Study::ViscosityLadder),
        "mms" => Ok(Study::Mms),
        "uniqueness" => Ok(Study::Uniqueness),
        _ => Err(bad_value(key, raw, "`none`, `viscosity_ladder`, `mms`, or `uniqueness`")),
    }
}

fn parse_boundary(key: &str, raw: &Raw) -> Result<BoundaryData> {
    let tokens: Vec<&str> = raw.value.split_whitespace().collect();
    match tokens.split_first() {
        Some((&"zero", [])) => Ok(BoundaryData::Zero),
        Some((&"constant", rest)) => Ok(BoundaryData::Constant(parse_triple(key, raw, rest)?)),
        _ => Err(bad_value(key, raw, "`zero` or `constant c1 c2 c3`")),
    }
}

fn parse_profile(key: &str, raw: &Raw) -> Result<Profile> {
    const FORMS: &str = "`zero`, `constant c1 c2 c3`, `sine2 amp w1 w2 w3`, \
                         `bump_h1 amp w1 w2 w3`, `eigenmode index amp component`, \
                         `random amp seed`, or `snapshot path u|ut|nu`";
    let tokens: Vec<&str> = raw.value.split_whitespace().collect();
    let Some((&head, rest)) = tokens.split_first() else {
        return Err(bad_value(key, raw, FORMS));
    };
    match head {
        "zero" if rest.is_empty() => Ok(Profile::Zero),
        "constant" => Ok(Profile::Constant(parse_triple(key, raw, rest)?)),
        "sine2" | "bump_h1" => {
            if rest.len() != 4 {
                return Err(bad_value(key, raw, "an amplitude and three weights"));
            }
            let amp = rest[0]
                .parse()
                .map_err(|_| bad_value(key, raw, "an amplitude and three weights"))?;
            let weights = parse_triple(key, raw, &rest[1..])?;
            if head == "sine2" {
                Ok(Profile::Sine2 { amp, weights })
            } else {
                if weights.iter().all(|&w| w == 0.0) {
                    return Err(Error::Config {
                        line: Some(raw.line),
                        msg: format!("key `{key}`: bump_h1 needs a nonzero weight vector"),
                    });
                }
                Ok(Profile::BumpH1 { amp, weights })
            }
        }
        "eigenmode" => {
            if rest.len() != 3 {
                return Err(bad_value(key, raw, "an index, an amplitude, and a component"));
            }
            let index = rest[0]
                .parse()
                .map_err(|_| bad_value(key, raw, "an index, an amplitude, and a component"))?;
            let amp = rest[1]
                .parse()
                .map_err(|_| bad_value(key, raw, "an index, an amplitude, and a component"))?;
            let component: usize = rest[2]
                .parse()
                .map_err(|_| bad_value(key, raw, "an index, an amplitude, and a component"))?;
            if component >= 3 {
                return Err(Error::Config {
                    line: Some(raw.line),
                    msg: format!("key `{key}`: component must be 0, 1, or 2, got {component}"),
                });
            }
            Ok(Profile::Eigenmode { index, amp, component })
        }
        "random" => {
            if rest.len() != 2 {
                return Err(bad_value(key, raw, "an amplitude and an integer seed"));
            }
            let amp = rest[0]
                .parse()
                .map_err(|_| bad_value(key, raw, "an amplitude and an integer seed"))?;
            let seed = rest[1]
                .parse()
                .map_err(|_| bad_value(key, raw, "an amplitude and an integer seed"))?;
            Ok(Profile::Random { amp, seed })
        }
        "snapshot" => {
            if rest.len() != 2 {
                return Err(bad_value(key, raw, "a path (no whitespace) and a field (u|ut|nu)"));
            }
            let field = match rest[1] {
                "u" => SnapshotField::U,
                "ut" => SnapshotField::Ut,
                "nu" => SnapshotField::Nu,
                other => {
                    return Err(Error::Config {
                        line: Some(raw.line),
                        msg: format!("key `{key}`: snapshot field must be u, ut, or nu, got `{other}`"),
                    });
                }
            };
            Ok(Profile::Snapshot { path: rest[0].to_string(), field })
        }
        _ => Err(bad_value(key, raw, FORMS)),
    }
}

/// Parses a configuration text. Total: unknown keys, duplicates, type
/// mismatches (all with line numbers) and missing required keys (named)
/// are errors. Optional keys fall back to documented defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut e = Entries::scan(text)?;

    let model = {
        let raw = e.require("model")?;
        parse_model("model", &raw)?
    };
    let study = match e.take("study") {
        Some(raw) => parse_study("study", &raw)?,
        None => Study::None,
    };

    let mut mat = [0.0; 13];
    for (slot, name) in mat.iter_mut().zip([
        "lambda", "mu", "k0", "k1", "k2", "k2p", "k3", "k3p", "rho", "varsigma", "ell",
        "eps_visc", "delta_visc",
    ]) {
        let key = format!("material.{name}");
        let raw = e.require(&key)?;
        *slot = parse_f64(&key, &raw)?;
    }
    let material = MaterialParams {
        lambda: mat[0],
        mu: mat[1],
        k0: mat[2],
        k1: mat[3],
        k2: mat[4],
        k2p: mat[5],
        k3: mat[6],
        k3p: mat[7],
        rho: mat[8],
        varsigma: mat[9],
        ell: mat[10],
        eps_visc: mat[11],
        delta_visc: mat[12],
    };

    let dim = {
        let raw = e.require("grid.dim")?;
        parse_usize("grid.dim", &raw)?
    };
    let n = {
        let raw = e.require("grid.n")?;
        parse_usize_list("grid.n", &raw)?
    };
    let extent = {
        let raw = e.require("grid.extent")?;
        parse_f64_list("grid.extent", &raw)?
    };
    let bc_u = match e.take("grid.bc_u") {
        Some(raw) => parse_boundary("grid.bc_u", &raw)?,
        None => BoundaryData::Zero,
    };
    let bc_nu = match e.take("grid.bc_nu") {
        Some(raw) => parse_boundary("grid.bc_nu", &raw)?,
        None => BoundaryData::Zero,
    };
    let grid = GridSpec { dim, n, extent, bc_u, bc_nu };

    let mut profile_of = |key: &str| -> Result<Profile> {
        match e.take(key) {
            Some(raw) => parse_profile(key, &raw),
            None => Ok(Profile::Zero),
        }
    };
    let initial = InitialSpec {
        u0: profile_of("initial.u0")?,
        dot_u0: profile_of("initial.dot_u0")?,
        nu0: profile_of("initial.nu0")?,
    };

    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        dt: {
            let raw = e.require("solver.dt")?;
            parse_f64("solver.dt", &raw)?
        },
        t_end: {
            let raw = e.require("solver.t_end")?;
            parse_f64("solver.t_end", &raw)?
        },
        picard_tol: match e.take("solver.picard_tol") {
            Some(raw) => parse_f64("solver.picard_tol", &raw)?,
            None => defaults.picard_tol,
        },
        picard_max: match e.take("solver.picard_max") {
            Some(raw) => parse_usize("solver.picard_max", &raw)?,
            None => defaults.picard_max,
        },
        krylov_tol: match e.take("solver.krylov_tol") {
            Some(raw) => parse_f64("solver.krylov_tol", &raw)?,
            None => defaults.krylov_tol,
        },
        krylov_max: match e.take("solver.krylov_max") {
            Some(raw) => parse_usize("solver.krylov_max", &raw)?,
            None => defaults.krylov_max,
        },
        deterministic: match e.take("solver.deterministic") {
            Some(raw) => parse_bool("solver.deterministic", &raw)?,
            None => defaults.deterministic,
        },
        record_every: match e.take("solver.record_every") {
            Some(raw) => parse_usize("solver.record_every", &raw)?,
            None => defaults.record_every,
        },
        override_gate: match e.take("solver.override_gate") {
            Some(raw) => parse_bool("solver.override_gate", &raw)?,
            None => defaults.override_gate,
        },
    };

    let output = OutputSpec {
        dir: match e.take("output.dir") {
            Some(raw) => raw.value,
            None => "out".to_string(),
        },
        snapshots: match e.take("output.snapshots") {
            Some(raw) => parse_bool("output.snapshots", &raw)?,
            None => true,
        },
    };

    // Entries::scan already rejected unknown keys, so nothing remains.
    debug_assert!(e.map.is_empty());

    Ok(RunConfig { model, study, material, grid, initial, solver, output })
}

fn emit_boundary(b: &BoundaryData) -> String {
    match b {
        BoundaryData::Zero => "zero".to_string(),
        BoundaryData::Constant(c) => format!("constant {} {} {}", c[0], c[1], c[2]),
    }
}

fn emit_profile(p: &Profile) -> String {
    match p {
        Profile::Zero => "zero".to_string(),
        Profile::Constant(c) => format!("constant {} {} {}", c[0], c[1], c[2]),
        Profile::Sine2 { amp, weights } => {
            format!("sine2 {amp} {} {} {}", weights[0], weights[1], weights[2])
        }
        Profile::BumpH1 { amp, weights } => {
            format!("bump_h1 {amp} {} {} {}", weights[0], weights[1], weights[2])
        }
        Profile::Eigenmode { index, amp, component } => {
            format!("eigenmode {index} {amp} {component}")
        }
        Profile::Random { amp, seed } => format!("random {amp} {seed}"),
        Profile::Snapshot { path, field } => format!("snapshot {path} {}", field.name()),
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl RunConfig {
    /// Canonical text form. `parse_config(&cfg.emit()) == cfg` holds for
    /// every valid configuration; derived PDE coefficients are echoed as
    /// comments for the run log.
    pub fn emit(&self) -> String {
        let p = &self.material;
        let c = derive_coefficients(p);
        let mut s = String::new();
        s.push_str("# run configuration (flat `section.key = value`, `#` comments)\n");
        s.push_str(&format!("model = {}\n", self.model.name()));
        s.push_str(&format!("study = {}\n", self.study.name()));
        s.push('\n');
        s.push_str("# raw material constants\n");
        s.push_str(&format!("material.lambda = {}\n", p.lambda));
        s.push_str(&format!("material.mu = {}\n", p.mu));
        s.push_str(&format!("material.k0 = {}\n", p.k0));
        s.push_str(&format!("material.k1 = {}\n", p.k1));
        s.push_str(&format!("material.k2 = {}\n", p.k2));
        s.push_str(&format!("material.k2p = {}\n", p.k2p));
        s.push_str(&format!("material.k3 = {}\n", p.k3));
        s.push_str(&format!("material.k3p = {}\n", p.k3p));
        s.push_str(&format!("material.rho = {}\n", p.rho));
        s.push_str(&format!("material.varsigma = {}\n", p.varsigma));
        s.push_str(&format!("material.ell = {}\n", p.ell));
        s.push_str(&format!("material.eps_visc = {}\n", p.eps_visc));
        s.push_str(&format!("material.delta_visc = {}\n", p.delta_visc));
        s.push_str(&format!(
            "# derived: xi = {}, xibar = {}, zeta = {}, gamma = {}, kappa = {}, kappa0 = {}\n",
            c.xi, c.xibar, c.zeta, c.gamma, c.kappa, c.kappa0
        ));
        s.push('\n');
        s.push_str("# grid\n");
        s.push_str(&format!("grid.dim = {}\n", self.grid.dim));
        s.push_str(&format!("grid.n = {}\n", join(&self.grid.n)));
        s.push_str(&format!("grid.extent = {}\n", join(&self.grid.extent)));
        s.push_str(&format!("grid.bc_u = {}\n", emit_boundary(&self.grid.bc_u)));
        s.push_str(&format!("grid.bc_nu = {}\n", emit_boundary(&self.grid.bc_nu)));
        s.push('\n');
        s.push_str("# initial data\n");
        s.push_str(&format!("initial.u0 = {}\n", emit_profile(&self.initial.u0)));
        s.push_str(&format!("initial.dot_u0 = {}\n", emit_profile(&self.initial.dot_u0)));
        s.push_str(&format!("initial.nu0 = {}\n", emit_profile(&self.initial.nu0)));
        s.push('\n');
        s.push_str("# time stepping\n");
        s.push_str(&format!("solver.dt = {}\n", self.solver.dt));
        s.push_str(&format!("solver.t_end = {}\n", self.solver.t_end));
        s.push_str(&format!("solver.picard_tol = {}\n", self.solver.picard_tol));
        s.push_str(&format!("solver.picard_max = {}\n", self.solver.picard_max));
        s.push_str(&format!("solver.krylov_tol = {}\n", self.solver.krylov_tol));
        s.push_str(&format!("solver.krylov_max = {}\n", self.solver.krylov_max));
        s.push_str(&format!("solver.deterministic = {}\n", self.solver.deterministic));
        s.push_str(&format!("solver.record_every = {}\n", self.solver.record_every));
        s.push_str(&format!("solver.override_gate = {}\n", self.solver.override_gate));
        s.push('\n');
        s.push_str("# output\n");
        s.push_str(&format!("output.dir = {}\n", self.output.dir));
        s.push_str(&format!("output.snapshots = {}\n", self.output.snapshots));
        s
    }

    /// Builds the grid, including boundary data.
    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let g = self.grid.clone();
        let grid = Grid::from_extent(g.dim, &g.n, &g.extent)?;
        let count = grid.boundary_nodes().len();
        let expand = |b: &BoundaryData| match b {
            BoundaryData::Zero => vec![[0.0; 3]; count],
            BoundaryData::Constant(c) => vec![*c; count],
        };
        let grid = grid.with_bc(expand(&g.bc_u), expand(&g.bc_nu))?;
        Ok(Arc::new(grid))
    }

    /// Samples the three initial profiles on `grid` and projects them to
    /// a valid state (boundary rows stamped, velocity zeroed on the
    /// boundary).
    pub fn build_initial_state(&self, grid: &Arc<Grid>) -> Result<FieldState> {
        let u0 = sample_profile(&self.initial.u0, grid)?;
        let dot_u0 = sample_profile(&self.initial.dot_u0, grid)?;
        let nu0 = sample_profile(&self.initial.nu0, grid)?;
        dynamics::project_initial_data(grid, &u0, &dot_u0, &nu0)
    }
}

/// Separable boundary bump s(x) = Π_a sin²(π·x_a/extent_a).
fn bump(grid: &Grid, x: [f64; 3]) -> f64 {
    let mut s = 1.0;
    for (&xa, &ext) in x.iter().zip(&grid.extent) {
        s *= (std::f64::consts::PI * xa / ext).sin().powi(2);
    }
    s
}

/// Samples one profile as a full-lattice vector field. Boundary rows are
/// whatever the profile produces; the projection stamps Dirichlet data
/// afterwards.
pub fn sample_profile(profile: &Profile, grid: &Arc<Grid>) -> Result<VectorField> {
    match profile {
        Profile::Zero => Ok(VectorField::zeros(grid.clone())),
        Profile::Constant(c) => Ok(VectorField::constant(grid.clone(), *c)),
        Profile::Sine2 { amp, weights } => {
            let (amp, w) = (*amp, *weights);
            Ok(VectorField::from_fn(grid.clone(), |x| {
                let s = amp * bump(grid, x);
                [s * w[0], s * w[1], s * w[2]]
            }))
        }
        Profile::BumpH1 { amp, weights } => {
            if *amp == 0.0 {
                return Ok(VectorField::zeros(grid.clone()));
            }
            let w = *weights;
            let mut f = VectorField::from_fn(grid.clone(), |x| {
                let s = bump(grid, x);
                [s * w[0], s * w[1], s * w[2]]
            });
            let eta = ops::norm_h1(&f);
            assert!(eta > 0.0, "bump profile cannot vanish on a valid grid");
            f.scale(amp / eta);
            Ok(f)
        }
        Profile::Eigenmode { index, amp, component } => {
            let (_, phi) = dynamics::laplacian_eigenmode(grid, *index)?;
            let mut f = VectorField::zeros(grid.clone());
            for node in 0..grid.num_nodes() {
                f.values[3 * node + component] = amp * phi.values[node];
            }
            Ok(f)
        }
        Profile::Random { amp, seed } => {
            let mut f = VectorField::zeros(grid.clone());
            if *amp != 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let lo = -amp.abs();
                let hi = amp.abs();
                for v in f.values.iter_mut() {
                    *v = rng.gen_range(lo..hi);
                }
                f.zero_boundary();
            }
            Ok(f)
        }
        Profile::Snapshot { path, field } => {
            let snap = io::read_snapshot(std::path::Path::new(path))?;
            let data = match field {
                SnapshotField::U => &snap.u,
                SnapshotField::Ut => &snap.ut,
                SnapshotField::Nu => &snap.nu,
            };
            snap.restore_field(grid, data)
        }
    }
}
