//! Canned demonstration scenarios and the orchestrator that turns a
//! parsed configuration into an output bundle on disk.
//!
//! Every scenario is an ordinary [`RunConfig`] — `scenario <name>` is
//! exactly `simulate` on the emitted preset, so a bundle's `config.txt`
//! always reproduces the bundle. A run directory contains:
//!
//! - `config.txt` — canonical configuration echo;
//! - `timeseries.csv` — per-record energy diagnostics;
//! - `snapshot_NNNNNN.txt` — initial and final states (when enabled);
//! - one study table (`viscosity_table.csv`, `mms_orders.csv`, or
//!   `uniqueness.csv`) when the config selects a study.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{BoundaryData, GridSpec, InitialSpec, OutputSpec, Profile, RunConfig, Study};
use crate::diagnostics;
use crate::dynamics::{self, FieldState, Model, SolverConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::material::MaterialParams;

/// Viscosity ladder used by the continuation study, halving to the
/// unregularized baseline.
pub const VISCOSITY_LADDER: &[(f64, f64)] = &[(0.1, 0.1), (0.05, 0.05), (0.025, 0.025)];

/// Interior node counts of the manufactured-solution refinement ladder
/// (spacings 1/8, 1/16, 1/32 on the unit square).
pub const MMS_LADDER: &[usize] = &[7, 15, 31];

/// Amplitudes of the manufactured displacement and phason fields.
pub const MMS_AMPLITUDES: (f64, f64) = (1.0, 0.5);

/// All scenario names, in documentation order.
pub fn names() -> &'static [&'static str] {
    &[
        "decoupled_diffusion",
        "single_mode_wave",
        "coupled_linear",
        "gyro_smallness",
        "viscosity_ladder",
        "mms_ladder",
    ]
}

/// Material constants satisfying every well-posedness inequality with
/// room to spare: ξ = 3, ξ̄ = 0.3, ζ = 0.6, γ = 1, κ = 0.1.
fn admissible_material() -> MaterialParams {
    MaterialParams {
        lambda: 1.0,
        mu: 2.0,
        k0: 0.5,
        k1: 1.0,
        k2: 0.3,
        k2p: 0.3,
        k3: 0.2,
        k3p: 0.2,
        rho: 1.0,
        varsigma: 1.0,
        ell: 0.0,
        eps_visc: 0.0,
        delta_visc: 0.0,
    }
}

fn base(name: &str, n: usize, material: MaterialParams) -> RunConfig {
    RunConfig {
        model: Model::Linear,
        study: Study::None,
        material,
        grid: GridSpec {
            dim: 2,
            n: vec![n, n],
            extent: vec![1.0, 1.0],
            bc_u: BoundaryData::Zero,
            bc_nu: BoundaryData::Zero,
        },
        initial: InitialSpec { u0: Profile::Zero, dot_u0: Profile::Zero, nu0: Profile::Zero },
        solver: SolverConfig {
            dt: 0.02,
            t_end: 1.0,
            picard_tol: 1e-12,
            krylov_tol: 1e-13,
            ..SolverConfig::default()
        },
        output: OutputSpec { dir: format!("out/{name}"), snapshots: true },
    }
}

/// Builds the named preset configuration.
pub fn build(name: &str) -> Result<RunConfig> {
    match name {
        // Pure phason diffusion: coupling and γ switched off, one
        // Laplacian eigenmode decaying at its analytic midpoint rate.
        "decoupled_diffusion" => {
            let mut m = admissible_material();
            m.k1 = 0.0;
            m.k2 = 0.5;
            m.k2p = 0.5; // ζ = 1, γ = 0
            m.k3 = 0.0;
            m.k3p = 0.0; // κ = ξ̄ = 0: fails the κ > 0 gate, hence the override
            let mut cfg = base(name, 9, m);
            cfg.initial.nu0 = Profile::Eigenmode { index: 2, amp: 0.7, component: 0 };
            cfg.solver.override_gate = true;
            Ok(cfg)
        }
        // Undamped elastic standing wave: one eigenmode of μΔ with ξ = 0
        // and the phason sector switched off; energy is exactly conserved.
        "single_mode_wave" => {
            let mut m = admissible_material();
            m.lambda = -2.0; // ξ = λ + μ = 0
            m.k0 = 0.0;
            m.k1 = 0.0;
            m.k2 = 0.0;
            m.k2p = 0.0;
            m.k3 = 0.0;
            m.k3p = 0.0;
            let mut cfg = base(name, 9, m);
            cfg.initial.u0 = Profile::Eigenmode { index: 1, amp: 0.4, component: 1 };
            cfg.solver.override_gate = true;
            Ok(cfg)
        }
        // The full coupled linear system on a 17×17 lattice, 500 steps;
        // the per-step energy ledger is the headline diagnostic.
        "coupled_linear" => {
            let mut cfg = base(name, 15, admissible_material());
            cfg.initial.u0 = Profile::Sine2 { amp: 0.3, weights: [1.0, 0.0, 0.0] };
            cfg.initial.nu0 = Profile::Sine2 { amp: 0.2, weights: [0.0, 1.0, 0.0] };
            cfg.solver.t_end = 10.0;
            Ok(cfg)
        }
        // Gyroscopic coupling with the velocity sized to the smallness
        // gate: ℓ‖u̇₀‖_{H¹} = 0.23 < ς/2. The `--dot-u0-amp` flag dials
        // the amplitude to probe the refusal boundary.
        "gyro_smallness" => {
            let mut m = admissible_material();
            m.ell = 1.0;
            let mut cfg = base(name, 9, m);
            cfg.model = Model::Gyro;
            cfg.initial.u0 = Profile::Sine2 { amp: 0.03, weights: [1.0, 0.0, 0.0] };
            cfg.initial.dot_u0 = Profile::BumpH1 { amp: 0.23, weights: [1.0, 0.0, 0.0] };
            cfg.initial.nu0 = Profile::Sine2 { amp: 0.03, weights: [0.0, 1.0, 0.0] };
            cfg.solver.t_end = 0.6;
            cfg.solver.picard_max = 80;
            Ok(cfg)
        }
        // Vanishing-viscosity continuation against the unregularized
        // baseline.
        "viscosity_ladder" => {
            let mut cfg = base(name, 9, admissible_material());
            cfg.study = Study::ViscosityLadder;
            cfg.initial.u0 = Profile::Sine2 { amp: 0.3, weights: [1.0, 0.0, 0.0] };
            cfg.initial.nu0 = Profile::Sine2 { amp: 0.2, weights: [0.0, 1.0, 0.0] };
            cfg.solver.t_end = 0.5;
            Ok(cfg)
        }
        // Manufactured-solution refinement study; the configured grid is
        // only the template (extent), the ladder supplies the node counts.
        "mms_ladder" => {
            let mut cfg = base(name, 7, admissible_material());
            cfg.study = Study::Mms;
            cfg.solver.dt = 0.0625;
            cfg.solver.t_end = 0.5;
            Ok(cfg)
        }
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}

/// What a finished run reports back to the command line.
#[derive(Debug)]
pub struct ExecSummary {
    /// Directory the bundle was written to.
    pub dir: PathBuf,
    /// Gate outcome text (present for time-integration studies).
    pub gate: Option<String>,
    /// Advisory warnings collected during the run.
    pub warnings: Vec<String>,
    /// Human-readable outcome lines.
    pub lines: Vec<String>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn scaled_state(state: &FieldState, factor: f64) -> FieldState {
    let mut s = state.clone();
    s.u.scale(factor);
    s.ut.scale(factor);
    s.nu.scale(factor);
    s
}

/// Runs a configuration and writes its output bundle into `dir`.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<ExecSummary> {
    cfg.material.validate()?;
    cfg.solver.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    write_text(&dir.join("config.txt"), &cfg.emit())?;

    let grid = cfg.build_grid()?;
    let state0 = cfg.build_initial_state(&grid)?;
    let mut summary = ExecSummary {
        dir: dir.to_path_buf(),
        gate: None,
        warnings: Vec::new(),
        lines: Vec::new(),
    };

    // The manufactured-solution study integrates its own grid ladder and
    // needs none of the configured initial data.
    if cfg.study == Study::Mms {
        if cfg.grid.dim != 2 {
            return Err(Error::Config {
                line: None,
                msg: "the manufactured-solution study needs a 2-d grid template".to_string(),
            });
        }
        let m = diagnostics::Manufactured {
            amp_u: MMS_AMPLITUDES.0,
            amp_nu: MMS_AMPLITUDES.1,
            extent: [cfg.grid.extent[0], cfg.grid.extent[1]],
        };
        let report = diagnostics::mms_convergence(&cfg.material, &m, MMS_LADDER, cfg.solver.t_end)?;
        let mut csv = String::from("n,h,dt,err_u,err_nu\n");
        for r in &report.rungs {
            writeln!(csv, "{},{},{},{},{}", r.n, r.h, r.dt, r.err_u, r.err_nu).unwrap();
        }
        writeln!(csv, "# order_u = {}, order_nu = {}", report.order_u, report.order_nu).unwrap();
        write_text(&dir.join("mms_orders.csv"), &csv)?;
        summary.lines.push(format!(
            "manufactured-solution orders: u {:.3}, nu {:.3} over {} rungs",
            report.order_u,
            report.order_nu,
            report.rungs.len()
        ));
        return Ok(summary);
    }

    // Plain time integration; every remaining study runs on top of it.
    let traj =
        dynamics::run(grid.clone(), &cfg.material, state0.clone(), &cfg.solver, cfg.model)?;
    summary.gate = Some(traj.gate.summary());
    summary.warnings = traj.warnings.clone();
    io::write_timeseries(&dir.join("timeseries.csv"), &traj)?;
    if cfg.output.snapshots {
        let (first_step, first) = &traj.states[0];
        write_snapshot_numbered(dir, *first_step, first)?;
        let (last_step, last) = traj.states.last().expect("trajectory has states");
        if last_step != first_step {
            write_snapshot_numbered(dir, *last_step, last)?;
        }
    }
    let balance = diagnostics::energy_balance_residual(&traj);
    let e0 = traj.records.first().map(|r| r.energy.total).unwrap_or(0.0);
    let e1 = traj.records.last().map(|r| r.energy.total).unwrap_or(0.0);
    summary.lines.push(format!(
        "integrated {} steps to t = {} ({} records)",
        cfg.solver.n_steps(),
        traj.final_state().t,
        traj.records.len()
    ));
    summary.lines.push(format!("energy {e0} -> {e1}, max ledger residual {:.3e}", balance.max));

    match cfg.study {
        Study::None | Study::Mms => {}
        Study::ViscosityLadder => {
            let table = diagnostics::viscosity_continuation(
                grid.clone(),
                &cfg.material,
                &state0,
                &cfg.solver,
                VISCOSITY_LADDER,
            )?;
            let mut csv = String::from("eps,delta,dist_u,dist_nu\n");
            for r in &table.rungs {
                writeln!(csv, "{},{},{},{}", r.eps, r.delta, r.dist_u, r.dist_nu).unwrap();
            }
            writeln!(csv, "# monotone = {}", table.monotone).unwrap();
            write_text(&dir.join("viscosity_table.csv"), &csv)?;
            summary.lines.push(format!(
                "viscosity continuation over {} rungs: distances monotone = {}",
                table.rungs.len(),
                table.monotone
            ));
        }
        Study::Uniqueness => {
            if cfg.model != Model::Linear {
                return Err(Error::Config {
                    line: None,
                    msg: "the uniqueness study requires model = linear".to_string(),
                });
            }
            // The probe's second datum is the first scaled by ½ — a pure
            // amplitude perturbation, so the difference is again smooth.
            let state_b = scaled_state(&state0, 0.5);
            let report = diagnostics::uniqueness_probe(
                grid.clone(),
                &cfg.material,
                &state0,
                &state_b,
                &cfg.solver,
            )?;
            let mut csv = String::from("record,difference_energy\n");
            for (i, e) in report.difference_energy.iter().enumerate() {
                writeln!(csv, "{i},{e}").unwrap();
            }
            writeln!(csv, "# max_abs_difference = {}", report.max_abs_difference).unwrap();
            writeln!(csv, "# ledger_residual_max = {}", report.ledger_residual_max).unwrap();
            writeln!(csv, "# superposition_defect = {}", report.superposition_defect).unwrap();
            write_text(&dir.join("uniqueness.csv"), &csv)?;
            summary.lines.push(format!(
                "uniqueness probe: ledger residual {:.3e}, superposition defect {:.3e}",
                report.ledger_residual_max, report.superposition_defect
            ));
        }
    }

    Ok(summary)
}

fn write_snapshot_numbered(dir: &Path, step: usize, state: &FieldState) -> Result<()> {
    io::write_snapshot(&dir.join(format!("snapshot_{step:06}.txt")), state)
}

/// Output root: `QCDYN_OUT_ROOT` when set, the working directory
/// otherwise. Relative run directories resolve against it.
pub fn resolve_out_dir(dir: &str) -> PathBuf {
    let path = PathBuf::from(dir);
    if path.is_relative() {
        if let Some(root) = std::env::var_os("QCDYN_OUT_ROOT") {
            return PathBuf::from(root).join(path);
        }
    }
    path
}

/// Builds and runs a preset. `out` overrides the bundle directory
/// verbatim; `dot_u0_amp` re-dials the amplitude of the preset's initial
/// velocity profile (the smallness-gate knob); `override_gate` forces
/// the run past a failed gate.
pub fn run_scenario(
    name: &str,
    out: Option<&Path>,
    dot_u0_amp: Option<f64>,
    override_gate: bool,
) -> Result<ExecSummary> {
    let mut cfg = build(name)?;
    if let Some(amp) = dot_u0_amp {
        cfg.initial.dot_u0 = match cfg.initial.dot_u0 {
            Profile::BumpH1 { weights, .. } => Profile::BumpH1 { amp, weights },
            Profile::Sine2 { weights, .. } => Profile::Sine2 { amp, weights },
            _ => {
                return Err(Error::Config {
                    line: None,
                    msg: format!(
                        "scenario `{name}` has no amplitude knob on its initial velocity"
                    ),
                });
            }
        };
    }
    if override_gate {
        cfg.solver.override_gate = true;
    }
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => resolve_out_dir(&cfg.output.dir),
    };
    execute(&cfg, &dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn presets_emit_and_parse_back_exactly() {
        for &name in names() {
            let cfg = build(name).unwrap();
            let echoed = parse_config(&cfg.emit()).unwrap();
            assert_eq!(echoed, cfg, "round trip for scenario `{name}`");
        }
        assert!(matches!(build("warp_drive"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn diffusion_bundle_is_deterministic_on_disk() {
        let root = tempfile::tempdir().unwrap();
        let dir_a = root.path().join("a");
        let dir_b = root.path().join("b");
        run_scenario("decoupled_diffusion", Some(&dir_a), None, false).unwrap();
        run_scenario("decoupled_diffusion", Some(&dir_b), None, false).unwrap();

        let mut names: Vec<String> = std::fs::read_dir(&dir_a)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(
            names,
            ["config.txt", "snapshot_000000.txt", "snapshot_000050.txt", "timeseries.csv"]
        );
        for file in &names {
            let a = std::fs::read(dir_a.join(file)).unwrap();
            let b = std::fs::read(dir_b.join(file)).unwrap();
            assert_eq!(a, b, "`{file}` must be byte-identical across reruns");
        }
    }

    #[test]
    fn smallness_knob_drives_the_gate() {
        let root = tempfile::tempdir().unwrap();
        let err =
            run_scenario("gyro_smallness", Some(&root.path().join("hot")), Some(0.6), false)
                .unwrap_err();
        assert_eq!(err.exit_code(), 3, "0.6 ≥ ς/2 must be refused: {err}");
    }

    #[test]
    fn single_mode_wave_conserves_energy() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("wave");
        run_scenario("single_mode_wave", Some(&dir), None, false).unwrap();
        let csv = std::fs::read_to_string(dir.join("timeseries.csv")).unwrap();
        let totals: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert_eq!(totals.len(), 51);
        let e0 = totals[0];
        assert!(e0 > 0.0);
        for e in &totals {
            assert!((e - e0).abs() <= 1e-10 * e0, "energy drifted: {e} vs {e0}");
        }
    }
}
