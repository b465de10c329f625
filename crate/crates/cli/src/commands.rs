//! The four subcommands: stability scan, equilibrium solve, mode band scan,
//! and spin-coupling sweep. Each computes, serializes everything it found,
//! and reports whether any requested point failed so the caller can map that
//! to the partial-results exit code.

use std::path::{Path, PathBuf};

use serde::Serialize;

use oblate_core::anneal::{anneal, energy_compare, AnnealSchedule};
use oblate_core::config::{parse_config, TrapSetup};
use oblate_core::equilibrium::{
    default_seed_count, generate_seeds, shell_decomposition, solve_equilibrium_report,
    CrystalState, SeedSummary, ShellDecomposition, SolveOptions,
};
use oblate_core::io::{band_csv, crystal_csv, pairs_csv, stability_csv, to_json_string};
use oblate_core::modes::{build_spring_matrices, mode_band_scan, solve_modes, BandOutcome};
use oblate_core::spin::{detuning_sweep, fit_power_law, j0_scale, PowerLawFit, SpinError};
use oblate_core::trap::{
    build_dimensionless, stability_scan, DimensionlessTrap, DriveConfig, VoltageGrid,
};

use crate::manifest::write_outputs;

/// Failure slotted to an exit code: usage errors exit 2, compute errors 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

/// Every point the command was asked for succeeded unless `partial` is set.
pub struct Outcome {
    pub partial: bool,
}

const COMPLETE: Outcome = Outcome { partial: false };

fn io_err(e: anyhow::Error) -> CliError {
    CliError::Io(format!("{e:#}"))
}

fn json_file<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(to_json_string(value).map_err(|e| CliError::Io(e.to_string()))? + "\n")
}

pub fn load_setup(config: &Option<PathBuf>) -> Result<TrapSetup, CliError> {
    match config {
        None => Ok(TrapSetup::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
    }
}

fn apply_dc(
    drive: &DriveConfig,
    v_ring: Option<f64>,
    v_top: Option<f64>,
    v_bottom: Option<f64>,
) -> DriveConfig {
    drive.with_dc(
        v_ring.unwrap_or(drive.v_ring),
        v_top.unwrap_or(drive.v_top),
        v_bottom.unwrap_or(drive.v_bottom),
    )
}

// ---------------------------------------------------------------- stability

pub struct StabilityParams {
    pub ring: (f64, f64, f64),
    pub endcap: (f64, f64, f64),
}

#[derive(Serialize)]
struct StabilitySummary {
    n_ring: usize,
    n_endcap: usize,
    total_points: usize,
    stable_points: usize,
    stable_region_simply_connected: bool,
}

pub fn run_stability(
    setup: &TrapSetup,
    params: &StabilityParams,
    out: &Path,
    argv: &[String],
) -> Result<Outcome, CliError> {
    let grid = VoltageGrid::from_ranges(params.ring, params.endcap)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let map = stability_scan(&setup.species, &setup.geometry, &setup.drive, grid);
    let summary = StabilitySummary {
        n_ring: map.grid.v_ring.len(),
        n_endcap: map.grid.v_endcap.len(),
        total_points: map.points.len(),
        stable_points: map.points.iter().filter(|p| p.stable).count(),
        stable_region_simply_connected: map.simply_connected(),
    };
    let files = vec![
        ("stability.csv".to_string(), stability_csv(&map)),
        (
            "stability.json".to_string(),
            json_file(&summary)?,
        ),
    ];
    write_outputs(out, "stability", argv, &files).map_err(io_err)?;
    Ok(COMPLETE)
}

// -------------------------------------------------------------- equilibrium

pub struct SolveParams {
    pub n: usize,
    pub v_ring: Option<f64>,
    pub v_top: Option<f64>,
    pub v_bottom: Option<f64>,
    pub seeds: Option<usize>,
    pub rng_seed: u64,
    pub tol: f64,
    pub max_iters: usize,
}

impl SolveParams {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            gradient_tol: self.tol,
            max_iterations: self.max_iters,
        }
    }
}

struct Solved {
    trap: DimensionlessTrap,
    best: CrystalState,
    seeds: Vec<SeedSummary>,
}

/// Build the dimensionless trap at the requested DC point and run the
/// multi-seed solve.
fn solve_at(setup: &TrapSetup, params: &SolveParams) -> Result<Solved, CliError> {
    if params.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let drive = apply_dc(&setup.drive, params.v_ring, params.v_top, params.v_bottom);
    let trap = build_dimensionless(&setup.species, &setup.geometry, &drive);
    if !trap.stable {
        return Err(CliError::Compute(format!(
            "no planar crystal at this operating point: beta1_sq = {}, beta3_sq = {}",
            trap.beta1_sq, trap.beta3_sq
        )));
    }
    let seeds = generate_seeds(
        params.n,
        params.seeds.unwrap_or(default_seed_count(params.n)),
        params.rng_seed,
    );
    let report = solve_equilibrium_report(&trap, params.n, &seeds, &params.options())
        .map_err(|e| CliError::Compute(e.to_string()))?;
    Ok(Solved {
        trap,
        best: report.best,
        seeds: report.seeds,
    })
}

#[derive(Serialize)]
struct CrossCheck {
    anneal_energy: f64,
    anneal_converged: bool,
    energy_difference: f64,
    structural_match: bool,
}

#[derive(Serialize)]
struct EquilibriumOutput<'a> {
    trap: &'a DimensionlessTrap,
    state: &'a CrystalState,
    shells: &'a ShellDecomposition,
    seeds: &'a [SeedSummary],
    cross_check: Option<CrossCheck>,
}

pub fn run_equilibrium(
    setup: &TrapSetup,
    params: &SolveParams,
    cross_check: bool,
    anneal_seed: u64,
    out: &Path,
    argv: &[String],
) -> Result<Outcome, CliError> {
    let solved = solve_at(setup, params)?;
    let shells =
        shell_decomposition(&solved.best).map_err(|e| CliError::Compute(e.to_string()))?;

    let check = if cross_check {
        let schedule = AnnealSchedule {
            rng_seed: anneal_seed,
            ..AnnealSchedule::default()
        };
        let annealed = anneal(&solved.trap, params.n, &schedule)
            .map_err(|e| CliError::Compute(format!("cross-check failed: {e}")))?;
        let cmp = energy_compare(&annealed, &solved.best, 1e-4);
        Some(CrossCheck {
            anneal_energy: annealed.energy,
            anneal_converged: annealed.converged,
            energy_difference: cmp.energy_difference,
            structural_match: cmp.structural_match,
        })
    } else {
        None
    };

    let output = EquilibriumOutput {
        trap: &solved.trap,
        state: &solved.best,
        shells: &shells,
        seeds: &solved.seeds,
        cross_check: check,
    };
    let files = vec![
        (
            "crystal.csv".to_string(),
            crystal_csv(&solved.best, &shells),
        ),
        (
            "equilibrium.json".to_string(),
            json_file(&output)?,
        ),
    ];
    write_outputs(out, "equilibrium", argv, &files).map_err(io_err)?;
    Ok(COMPLETE)
}

// -------------------------------------------------------------------- modes

pub struct ModesParams {
    pub v_ring: Option<f64>,
    pub ring_min: Option<f64>,
    pub ring_max: Option<f64>,
    pub ring_step: Option<f64>,
}

#[derive(Serialize)]
struct ModePointSummary {
    v_ring: f64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    soft_axial: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_rotation_index: Option<usize>,
}

#[derive(Serialize)]
struct ModesSummary {
    n_ions: usize,
    points: Vec<ModePointSummary>,
    first_soft_v_ring: Option<f64>,
}

/// The swept ring voltages: either the single `--v-ring` or the inclusive
/// range `--ring-min/--ring-max/--ring-step`.
fn ring_voltages(params: &ModesParams) -> Result<Vec<f64>, CliError> {
    match (params.v_ring, params.ring_min, params.ring_max, params.ring_step) {
        (Some(v), None, None, None) => Ok(vec![v]),
        (None, Some(min), Some(max), Some(step)) => {
            if !(step > 0.0) || min > max {
                return Err(CliError::Usage(
                    "sweep needs --ring-step > 0 and --ring-min <= --ring-max".into(),
                ));
            }
            let n = ((max - min) / step).floor() as usize;
            Ok((0..=n).map(|i| min + step * i as f64).collect())
        }
        _ => Err(CliError::Usage(
            "give either --v-ring or all of --ring-min, --ring-max, --ring-step".into(),
        )),
    }
}

pub fn run_modes(
    setup: &TrapSetup,
    solve: &SolveParams,
    params: &ModesParams,
    out: &Path,
    argv: &[String],
) -> Result<Outcome, CliError> {
    if solve.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let voltages = ring_voltages(params)?;
    let drive = apply_dc(&setup.drive, None, solve.v_top, solve.v_bottom);
    let scan = mode_band_scan(
        &setup.species,
        &setup.geometry,
        &drive,
        solve.n,
        &voltages,
        &solve.options(),
        solve.rng_seed,
    );

    let mut points = Vec::with_capacity(scan.points.len());
    let mut converged = 0usize;
    for p in &scan.points {
        points.push(match &p.outcome {
            BandOutcome::Converged { state, spectrum } => {
                converged += 1;
                ModePointSummary {
                    v_ring: p.v_ring,
                    status: "ok",
                    message: None,
                    energy: Some(state.energy),
                    soft_axial: Some(spectrum.soft_axial),
                    zero_rotation_index: spectrum.zero_rotation_index,
                }
            }
            BandOutcome::Unstable { beta1_sq, beta3_sq } => ModePointSummary {
                v_ring: p.v_ring,
                status: "unstable",
                message: Some(format!("beta1_sq = {beta1_sq}, beta3_sq = {beta3_sq}")),
                energy: None,
                soft_axial: None,
                zero_rotation_index: None,
            },
            BandOutcome::Failed { message } => ModePointSummary {
                v_ring: p.v_ring,
                status: "failed",
                message: Some(message.clone()),
                energy: None,
                soft_axial: None,
                zero_rotation_index: None,
            },
        });
    }
    if converged == 0 {
        return Err(CliError::Compute(format!(
            "no ring voltage in the scan produced a planar crystal ({} points)",
            scan.points.len()
        )));
    }
    let summary = ModesSummary {
        n_ions: solve.n,
        first_soft_v_ring: scan.first_soft_v_ring(),
        points,
    };
    let files = vec![
        ("modes.csv".to_string(), band_csv(&scan)),
        (
            "modes.json".to_string(),
            json_file(&summary)?,
        ),
    ];
    write_outputs(out, "modes", argv, &files).map_err(io_err)?;
    Ok(Outcome {
        partial: converged < scan.points.len(),
    })
}

// ---------------------------------------------------------------- couplings

pub struct CouplingsParams {
    pub mu: Vec<f64>,
    pub rabi: Option<f64>,
    pub delta_k: Option<f64>,
}

#[derive(Serialize)]
struct MuPointSummary {
    mu: f64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<PowerLawFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
}

#[derive(Serialize)]
struct CouplingsOutput<'a> {
    trap: &'a DimensionlessTrap,
    state: &'a CrystalState,
    soft_axial: bool,
    com_index: usize,
    /// Center-of-mass frequency in units of omega_psi3.
    com_freq: f64,
    omega_cm_rad_per_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    j0_rad_per_s: Option<f64>,
    points: Vec<MuPointSummary>,
}

pub fn run_couplings(
    setup: &TrapSetup,
    solve: &SolveParams,
    params: &CouplingsParams,
    out: &Path,
    argv: &[String],
) -> Result<Outcome, CliError> {
    let solved = solve_at(setup, solve)?;
    let mats = build_spring_matrices(&solved.trap, &solved.best)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let spectrum = solve_modes(&mats).map_err(|e| CliError::Compute(e.to_string()))?;

    let com_index = oblate_core::spin::com_mode_index(&spectrum);
    let com_freq = spectrum.axial_freqs[com_index];
    if com_freq <= 0.0 {
        return Err(CliError::Compute(format!(
            "axial center-of-mass mode is soft (frequency {com_freq} in omega_psi3 units)"
        )));
    }
    let omega_cm = com_freq * solved.trap.omega_psi3;
    let j0 = match (params.rabi, params.delta_k) {
        (Some(rabi), Some(dk)) => Some(j0_scale(rabi, dk, setup.species.mass(), omega_cm)),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "--rabi and --delta-k must be given together".into(),
            ))
        }
    };

    let sweep = detuning_sweep(&solved.best, &spectrum, &params.mu);
    let mut points = Vec::with_capacity(sweep.len());
    let mut ok = 0usize;
    for point in &sweep {
        points.push(match &point.outcome {
            Ok(result) => {
                ok += 1;
                let (fit, fit_error) = match fit_power_law(&result.pairs) {
                    Ok(f) => (Some(f), None),
                    Err(e @ SpinError::NotEnoughPairs { .. })
                    | Err(e @ SpinError::DegenerateDistances) => (None, Some(e.to_string())),
                    Err(e) => return Err(CliError::Compute(e.to_string())),
                };
                MuPointSummary {
                    mu: point.mu,
                    status: "ok",
                    message: None,
                    j: Some(result.j.clone()),
                    fit,
                    fit_error,
                }
            }
            Err(e) => MuPointSummary {
                mu: point.mu,
                status: "failed",
                message: Some(e.to_string()),
                j: None,
                fit: None,
                fit_error: None,
            },
        });
    }
    if ok == 0 && !sweep.is_empty() {
        return Err(CliError::Compute(
            "every requested detuning failed".into(),
        ));
    }

    let output = CouplingsOutput {
        trap: &solved.trap,
        state: &solved.best,
        soft_axial: spectrum.soft_axial,
        com_index,
        com_freq,
        omega_cm_rad_per_s: omega_cm,
        j0_rad_per_s: j0,
        points,
    };
    let files = vec![
        ("pairs.csv".to_string(), pairs_csv(&sweep)),
        (
            "couplings.json".to_string(),
            json_file(&output)?,
        ),
    ];
    write_outputs(out, "couplings", argv, &files).map_err(io_err)?;
    Ok(Outcome {
        partial: ok < sweep.len(),
    })
}

// ------------------------------------------------------------------- check

pub fn run_check(out: &Path, command: &str) -> Result<Outcome, CliError> {
    let report = crate::manifest::check_manifest(out, command).map_err(io_err)?;
    let mut bad = 0usize;
    for (name, status) in &report {
        let label = match status {
            crate::manifest::FileCheck::Ok => "ok",
            crate::manifest::FileCheck::Missing => {
                bad += 1;
                "MISSING"
            }
            crate::manifest::FileCheck::Mismatch => {
                bad += 1;
                "MISMATCH"
            }
        };
        println!("{label} {name}");
    }
    if bad > 0 {
        Err(CliError::Compute(format!(
            "{bad} of {} files failed verification",
            report.len()
        )))
    } else {
        println!("all {} files verified", report.len());
        Ok(COMPLETE)
    }
}
