//! Phonon-mediated Ising couplings: the J matrix from the axial mode
//! spectrum, the physical coupling scale, and power-law fits of J against
//! ion separation.
//!
//! Couplings are dimensionless here. `J_mn` sums `b_ma b_na / (mu^2 - w_a^2)`
//! over axial modes, with mode frequencies and the beat-note detuning `mu`
//! both measured in units of the axial center-of-mass frequency; multiply by
//! [`j0_scale`] for rad/s. Squared frequencies keep their sign in the
//! denominator, so a soft mode shifts couplings smoothly instead of producing
//! a spurious resonance.

use serde::Serialize;
use thiserror::Error;

use crate::constants::HBAR;
use crate::equilibrium::CrystalState;
use crate::modes::ModeSpectrum;

/// Detunings closer than this to a mode frequency are rejected as resonant.
pub const RESONANCE_GUARD: f64 = 1e-9;
/// Couplings at or below this magnitude are dropped from power-law fits.
pub const FIT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpinError {
    #[error("detuning must be positive, got {mu}")]
    NonPositiveDetuning { mu: f64 },
    #[error("detuning {mu} is resonant with axial mode {mode_index} at {mode_freq} (units of the center-of-mass frequency)")]
    ResonantDetuning {
        mode_index: usize,
        mode_freq: f64,
        mu: f64,
    },
    #[error("state is not converged (gradient norm {gradient_norm:.3e})")]
    NotConverged { gradient_norm: f64 },
    #[error("state has {state_ions} ions but the spectrum has {spectrum_modes} axial modes")]
    DimensionMismatch {
        state_ions: usize,
        spectrum_modes: usize,
    },
    #[error("center-of-mass mode is soft (frequency {freq})")]
    SoftCenterOfMass { freq: f64 },
    #[error("power-law fit needs at least two couplings above the floor, got {usable}")]
    NotEnoughPairs { usable: usize },
    #[error("power-law fit needs at least two distinct separations")]
    DegenerateDistances,
}

/// One ion pair's separation and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCoupling {
    pub m: usize,
    pub n: usize,
    /// In-plane separation, units of the trap length scale.
    pub distance: f64,
    /// Dimensionless coupling; multiply by [`j0_scale`] for rad/s.
    pub j: f64,
}

/// Full coupling matrix at one detuning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingResult {
    /// Detuning in units of the axial center-of-mass frequency.
    pub detuning_mu: f64,
    /// Index of the center-of-mass mode in the spectrum's axial lists.
    pub com_index: usize,
    /// Center-of-mass frequency, units of `omega_psi3`.
    pub com_freq: f64,
    /// Symmetric coupling matrix with a zero diagonal, row-major.
    pub j: Vec<Vec<f64>>,
    /// Upper-triangle pairs (m < n).
    pub pairs: Vec<PairCoupling>,
}

/// Index of the axial center-of-mass mode: maximum overlap with the uniform
/// displacement.
pub fn com_mode_index(spectrum: &ModeSpectrum) -> usize {
    let mut best = 0;
    let mut best_overlap = f64::NEG_INFINITY;
    for (a, v) in spectrum.axial_vectors.iter().enumerate() {
        let overlap = v.iter().sum::<f64>().abs();
        if overlap > best_overlap {
            best_overlap = overlap;
            best = a;
        }
    }
    best
}

/// Physical coupling scale in rad/s: `rabi^2 hbar delta_k^2 / (2 m w_cm^2)`
/// with the Rabi frequency and the center-of-mass frequency in rad/s and the
/// beat-note wavevector difference in 1/m.
pub fn j0_scale(rabi: f64, delta_k: f64, mass: f64, omega_cm: f64) -> f64 {
    rabi * rabi * HBAR * delta_k * delta_k / (2.0 * mass * omega_cm * omega_cm)
}

/// Coupling matrix of a converged crystal at detuning `mu` (units of the
/// axial center-of-mass frequency).
pub fn compute_couplings(
    state: &CrystalState,
    spectrum: &ModeSpectrum,
    mu: f64,
) -> Result<CouplingResult, SpinError> {
    if !state.converged {
        return Err(SpinError::NotConverged {
            gradient_norm: state.gradient_norm,
        });
    }
    let n = state.n_ions();
    if spectrum.axial_freqs.len() != n {
        return Err(SpinError::DimensionMismatch {
            state_ions: n,
            spectrum_modes: spectrum.axial_freqs.len(),
        });
    }
    if !(mu > 0.0) {
        return Err(SpinError::NonPositiveDetuning { mu });
    }

    let com_index = com_mode_index(spectrum);
    let com_freq = spectrum.axial_freqs[com_index];
    if com_freq <= 0.0 {
        return Err(SpinError::SoftCenterOfMass { freq: com_freq });
    }
    let lambda_cm = com_freq * com_freq;

    // signed squared frequencies relative to the center of mass
    let lambda_hat: Vec<f64> = spectrum
        .axial_freqs
        .iter()
        .map(|&f| f * f.abs() / lambda_cm)
        .collect();
    for (a, &lh) in lambda_hat.iter().enumerate() {
        if lh > 0.0 && (mu - lh.sqrt()).abs() <= RESONANCE_GUARD {
            return Err(SpinError::ResonantDetuning {
                mode_index: a,
                mode_freq: lh.sqrt(),
                mu,
            });
        }
    }

    let mu_sq = mu * mu;
    let mut j = vec![vec![0.0f64; n]; n];
    for m in 0..n {
        for p in (m + 1)..n {
            let mut sum = 0.0;
            for a in 0..n {
                let b = &spectrum.axial_vectors[a];
                sum += b[m] * b[p] / (mu_sq - lambda_hat[a]);
            }
            j[m][p] = sum;
            j[p][m] = sum;
        }
    }

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for m in 0..n {
        for p in (m + 1)..n {
            let dx = state.positions[m][0] - state.positions[p][0];
            let dy = state.positions[m][1] - state.positions[p][1];
            pairs.push(PairCoupling {
                m,
                n: p,
                distance: dx.hypot(dy),
                j: j[m][p],
            });
        }
    }

    Ok(CouplingResult {
        detuning_mu: mu,
        com_index,
        com_freq,
        j,
        pairs,
    })
}

/// Least-squares power law through a set of couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    /// b in |J| = prefactor * r^(-b).
    pub exponent: f64,
    pub prefactor: f64,
    /// Coefficient of determination of the log-log fit; 1 when the log
    /// magnitudes have zero variance.
    pub r_squared: f64,
    pub n_pairs_used: usize,
    pub n_pairs_dropped: usize,
}

/// Fit `|J| = prefactor * r^(-b)` over pairs with `|J|` above the fit floor.
/// Pairs at identical separations are retained; they simply enter the fit
/// more than once.
pub fn fit_power_law(pairs: &[PairCoupling]) -> Result<PowerLawFit, SpinError> {
    let usable: Vec<&PairCoupling> = pairs.iter().filter(|p| p.j.abs() > FIT_FLOOR).collect();
    let n_pairs_dropped = pairs.len() - usable.len();
    if usable.len() < 2 {
        return Err(SpinError::NotEnoughPairs {
            usable: usable.len(),
        });
    }
    if usable
        .iter()
        .all(|p| p.distance == usable[0].distance)
    {
        return Err(SpinError::DegenerateDistances);
    }

    let pts: Vec<(f64, f64)> = usable
        .iter()
        .map(|p| (p.distance.ln(), p.j.abs().ln()))
        .collect();
    let k = pts.len() as f64;
    let x_mean = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &pts {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(x, y) in &pts {
        let fit = intercept + slope * x;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };

    Ok(PowerLawFit {
        exponent: -slope,
        prefactor: intercept.exp(),
        r_squared,
        n_pairs_used: usable.len(),
        n_pairs_dropped,
    })
}

/// Couplings at each listed detuning; failures are recorded per point and do
/// not abort the sweep.
#[derive(Debug, Clone)]
pub struct DetuningPoint {
    pub mu: f64,
    pub outcome: Result<CouplingResult, SpinError>,
}

pub fn detuning_sweep(
    state: &CrystalState,
    spectrum: &ModeSpectrum,
    mus: &[f64],
) -> Vec<DetuningPoint> {
    mus.iter()
        .map(|&mu| DetuningPoint {
            mu,
            outcome: compute_couplings(state, spectrum, mu),
        })
        .collect()
}
