//! Normal modes of a planar crystal: spring matrices, axial and planar
//! phonon spectra, and mode tracking across a ring-voltage sweep.
//!
//! The spring matrices are the exact second derivatives of the dimensionless
//! potential at a configuration, split into the axial block `K33` and the
//! planar blocks `K11`, `K22`, `K12`. At a planar configuration the
//! axial-planar cross blocks vanish identically, so the two sectors decouple.
//! Eigenvalues are squared frequencies in units of `omega_psi3^2`; a negative
//! axial eigenvalue signals a zig-zag instability of the plane and is
//! reported through `soft_axial` with a signed frequency, never a NaN.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::equilibrium::{
    default_seed_count, generate_seeds, solve_equilibrium_report, CrystalState, Seed, SolveOptions,
};
use crate::linalg::symmetric_eigen;
use crate::trap::{build_dimensionless, DimensionlessTrap, DriveConfig, IonSpecies, TrapGeometry};

/// Eigenvalues within this distance of zero count as the rotational zero mode.
pub const ZERO_MODE_TOL: f64 = 1e-8;
/// Axial eigenvalues below the negative of this flag a soft (zig-zag) mode.
pub const SOFT_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModeError {
    #[error("state is not converged (gradient norm {gradient_norm:.3e})")]
    NotConverged { gradient_norm: f64 },
    #[error("spring matrix {name} deviates from symmetry by {deviation:.3e}")]
    Asymmetric { name: &'static str, deviation: f64 },
    #[error("spring matrices have inconsistent sizes")]
    SizeMismatch,
}

/// Second derivatives of the potential at a planar configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpringMatrices {
    pub k11: DMatrix<f64>,
    pub k22: DMatrix<f64>,
    pub k12: DMatrix<f64>,
    pub k33: DMatrix<f64>,
    /// Axial stiffness sqrt(beta3_sq); every row of `k33` sums to its square.
    pub beta_3: f64,
}

impl SpringMatrices {
    pub fn n_ions(&self) -> usize {
        self.k33.nrows()
    }

    /// Planar Hessian, ion x-components stacked before y-components.
    pub fn planar_matrix(&self) -> DMatrix<f64> {
        let n = self.n_ions();
        let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.k11);
        h.view_mut((n, n), (n, n)).copy_from(&self.k22);
        h.view_mut((0, n), (n, n)).copy_from(&self.k12);
        h.view_mut((n, 0), (n, n)).copy_from(&self.k12);
        h
    }

    pub fn axial_matrix(&self) -> &DMatrix<f64> {
        &self.k33
    }
}

/// Spring matrices at an arbitrary planar configuration (no equilibrium
/// requirement; the planar block doubles as the Newton Hessian).
pub fn spring_matrices_from_positions(
    trap: &DimensionlessTrap,
    positions: &[[f64; 2]],
) -> SpringMatrices {
    let n = positions.len();
    let b1 = trap.beta1_sq;
    let b3 = trap.beta3_sq;
    let mut k11 = DMatrix::<f64>::zeros(n, n);
    let mut k22 = DMatrix::<f64>::zeros(n, n);
    let mut k12 = DMatrix::<f64>::zeros(n, n);
    let mut k33 = DMatrix::<f64>::zeros(n, n);
    for m in 0..n {
        k11[(m, m)] = b1;
        k22[(m, m)] = b1;
        k33[(m, m)] = b3;
    }
    for m in 0..n {
        for p in (m + 1)..n {
            let dx = positions[m][0] - positions[p][0];
            let dy = positions[m][1] - positions[p][1];
            let r_sq = dx * dx + dy * dy;
            let r = r_sq.sqrt();
            let inv_r3 = 1.0 / (r_sq * r);
            let inv_r5 = inv_r3 / r_sq;
            let xx = inv_r3 - 3.0 * dx * dx * inv_r5;
            let yy = inv_r3 - 3.0 * dy * dy * inv_r5;
            let xy = -3.0 * dx * dy * inv_r5;

            k11[(m, p)] = xx;
            k11[(p, m)] = xx;
            k11[(m, m)] -= xx;
            k11[(p, p)] -= xx;

            k22[(m, p)] = yy;
            k22[(p, m)] = yy;
            k22[(m, m)] -= yy;
            k22[(p, p)] -= yy;

            k12[(m, p)] = xy;
            k12[(p, m)] = xy;
            k12[(m, m)] -= xy;
            k12[(p, p)] -= xy;

            k33[(m, p)] = inv_r3;
            k33[(p, m)] = inv_r3;
            k33[(m, m)] -= inv_r3;
            k33[(p, p)] -= inv_r3;
        }
    }
    SpringMatrices {
        k11,
        k22,
        k12,
        k33,
        beta_3: trap.beta_3(),
    }
}

/// Spring matrices of a converged crystal.
pub fn build_spring_matrices(
    trap: &DimensionlessTrap,
    state: &CrystalState,
) -> Result<SpringMatrices, ModeError> {
    if !state.converged {
        return Err(ModeError::NotConverged {
            gradient_norm: state.gradient_norm,
        });
    }
    Ok(spring_matrices_from_positions(trap, &state.positions))
}

/// Phonon spectrum of a planar crystal. Frequencies are in units of
/// `omega_psi3`, ascending, and signed: a negative entry is
/// `-sqrt(-lambda)` for a soft eigenvalue `lambda < 0`. Eigenvectors follow
/// the layout of their matrices (axial: one entry per ion; planar: ion
/// x-components stacked before y-components).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSpectrum {
    pub axial_freqs: Vec<f64>,
    pub axial_vectors: Vec<Vec<f64>>,
    pub planar_freqs: Vec<f64>,
    pub planar_vectors: Vec<Vec<f64>>,
    /// An axial eigenvalue fell below the soft threshold: the plane is
    /// unstable against zig-zag buckling.
    pub soft_axial: bool,
    /// Index into the planar lists of the rotational zero mode, if one is
    /// present.
    pub zero_rotation_index: Option<usize>,
}

fn signed_freq(lambda: f64) -> f64 {
    if lambda < 0.0 {
        -(-lambda).sqrt()
    } else {
        lambda.sqrt()
    }
}

fn check_symmetric(name: &'static str, m: &DMatrix<f64>) -> Result<(), ModeError> {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if dev > SYMMETRY_TOL {
        Err(ModeError::Asymmetric {
            name,
            deviation: dev,
        })
    } else {
        Ok(())
    }
}

/// Diagonalize the axial and planar sectors.
pub fn solve_modes(mats: &SpringMatrices) -> Result<ModeSpectrum, ModeError> {
    let n = mats.n_ions();
    if mats.k11.nrows() != n
        || mats.k22.nrows() != n
        || mats.k12.nrows() != n
        || !mats.k11.is_square()
        || !mats.k22.is_square()
        || !mats.k12.is_square()
        || !mats.k33.is_square()
    {
        return Err(ModeError::SizeMismatch);
    }
    check_symmetric("K11", &mats.k11)?;
    check_symmetric("K22", &mats.k22)?;
    check_symmetric("K12", &mats.k12)?;
    check_symmetric("K33", &mats.k33)?;

    let (ax_vals, ax_vecs) = symmetric_eigen(&mats.k33);
    let (pl_vals, pl_vecs) = symmetric_eigen(&mats.planar_matrix());

    let soft_axial = ax_vals.iter().any(|&l| l < -SOFT_TOL);
    let zero_rotation_index = {
        let mut best: Option<(usize, f64)> = None;
        for (i, &l) in pl_vals.iter().enumerate() {
            if l.abs() < ZERO_MODE_TOL && best.map_or(true, |(_, b)| l.abs() < b) {
                best = Some((i, l.abs()));
            }
        }
        best.map(|(i, _)| i)
    };

    Ok(ModeSpectrum {
        axial_freqs: ax_vals.iter().map(|&l| signed_freq(l)).collect(),
        axial_vectors: (0..n).map(|k| ax_vecs.column(k).iter().copied().collect()).collect(),
        planar_freqs: pl_vals.iter().map(|&l| signed_freq(l)).collect(),
        planar_vectors: (0..2 * n)
            .map(|k| pl_vecs.column(k).iter().copied().collect())
            .collect(),
        soft_axial,
        zero_rotation_index,
    })
}

/// One point of a ring-voltage sweep.
#[derive(Debug)]
pub enum BandOutcome {
    Converged {
        state: CrystalState,
        spectrum: ModeSpectrum,
    },
    Unstable {
        beta1_sq: f64,
        beta3_sq: f64,
    },
    Failed {
        message: String,
    },
}

#[derive(Debug)]
pub struct BandPoint {
    pub v_ring: f64,
    pub outcome: BandOutcome,
}

#[derive(Debug)]
pub struct BandScan {
    pub points: Vec<BandPoint>,
}

impl BandScan {
    /// First swept ring voltage whose crystal shows a soft axial mode.
    pub fn first_soft_v_ring(&self) -> Option<f64> {
        self.points.iter().find_map(|p| match &p.outcome {
            BandOutcome::Converged { spectrum, .. } if spectrum.soft_axial => Some(p.v_ring),
            _ => None,
        })
    }
}

/// Re-solve the crystal and its spectrum across a list of ring voltages,
/// warm-starting each point from the previous converged configuration.
/// Unstable or non-converged points are recorded and the sweep continues.
pub fn mode_band_scan(
    species: &IonSpecies,
    geom: &TrapGeometry,
    drive: &DriveConfig,
    n_ions: usize,
    v_ring_values: &[f64],
    options: &SolveOptions,
    rng_seed: u64,
) -> BandScan {
    let base_seeds = generate_seeds(n_ions, default_seed_count(n_ions), rng_seed);
    let mut warm: Option<Vec<[f64; 2]>> = None;
    let mut points = Vec::with_capacity(v_ring_values.len());
    for &vr in v_ring_values {
        let d = drive.with_dc(vr, drive.v_top, drive.v_bottom);
        let trap = build_dimensionless(species, geom, &d);
        if !trap.stable {
            points.push(BandPoint {
                v_ring: vr,
                outcome: BandOutcome::Unstable {
                    beta1_sq: trap.beta1_sq,
                    beta3_sq: trap.beta3_sq,
                },
            });
            continue;
        }
        let mut seeds: Vec<Seed> = Vec::with_capacity(base_seeds.len() + 1);
        if let Some(w) = &warm {
            seeds.push(Seed {
                id: "warm".into(),
                positions: w.clone(),
            });
        }
        seeds.extend(base_seeds.iter().cloned());
        let outcome = match solve_equilibrium_report(&trap, n_ions, &seeds, options) {
            Ok(report) => {
                warm = Some(report.best.positions.clone());
                match build_spring_matrices(&trap, &report.best).and_then(|m| solve_modes(&m)) {
                    Ok(spectrum) => BandOutcome::Converged {
                        state: report.best,
                        spectrum,
                    },
                    Err(e) => BandOutcome::Failed {
                        message: e.to_string(),
                    },
                }
            }
            Err(e) => BandOutcome::Failed {
                message: e.to_string(),
            },
        };
        points.push(BandPoint { v_ring: vr, outcome });
    }
    BandScan { points }
}
