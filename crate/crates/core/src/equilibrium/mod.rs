//! Planar crystal equilibria: the dimensionless potential, its gradient, a
//! damped Newton minimizer over multiple seeds, and radial shell analysis.
//!
//! Ions are restricted to the crystal plane at `trap.plane_z`; out-of-plane
//! stability is a property of the axial mode spectrum and is certified by the
//! mode analysis, not assumed here. Positions and energies are dimensionless
//! (units of `trap.length_scale` and `k_e q^2 / length_scale`).

mod seeds;
mod solver;

pub use seeds::{default_seed_count, generate_seeds, Seed};
pub use solver::{solve_equilibrium, solve_equilibrium_report, SeedSummary, SolveOptions, SolveReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trap::DimensionlessTrap;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("ions {m} and {n} coincide")]
    CoincidentIons { m: usize, n: usize },
    #[error("trap is not stable for a planar crystal (beta1_sq = {beta1_sq}, beta3_sq = {beta3_sq})")]
    TrapUnstable { beta1_sq: f64, beta3_sq: f64 },
    #[error("need at least one ion")]
    NoIons,
    #[error("need at least one seed")]
    NoSeeds,
    #[error("seed {index} has {got} ions, expected {expected}")]
    SeedSizeMismatch { index: usize, got: usize, expected: usize },
    #[error("no seed converged to a certified minimum; best residual gradient norm {gradient_norm:.3e}")]
    NoConvergence { best: Box<CrystalState>, gradient_norm: f64 },
    #[error("state is not converged (gradient norm {gradient_norm:.3e})")]
    NotConverged { gradient_norm: f64 },
}

/// A planar ion configuration with its convergence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalState {
    pub positions: Vec<[f64; 2]>,
    /// Height of the crystal plane, units of the trap length scale.
    pub plane_z: f64,
    /// Total dimensionless potential at `positions`.
    pub energy: f64,
    /// Max-norm of the potential gradient at `positions`.
    pub gradient_norm: f64,
    pub converged: bool,
    /// Identifier of the initial configuration that produced this state.
    pub seed_id: String,
}

impl CrystalState {
    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }
}

fn check_distinct(positions: &[[f64; 2]]) -> Result<(), EquilibriumError> {
    for m in 0..positions.len() {
        for n in (m + 1)..positions.len() {
            let dx = positions[m][0] - positions[n][0];
            let dy = positions[m][1] - positions[n][1];
            if dx * dx + dy * dy == 0.0 {
                return Err(EquilibriumError::CoincidentIons { m, n });
            }
        }
    }
    Ok(())
}

/// Trap plus Coulomb energy of the in-plane coordinates only. Coincident ions
/// produce +inf rather than an error, which rejects them in any line search.
pub(crate) fn structure_energy(trap: &DimensionlessTrap, positions: &[[f64; 2]]) -> f64 {
    let b1 = trap.beta1_sq;
    let mut e = 0.0;
    for p in positions {
        e += 0.5 * b1 * (p[0] * p[0] + p[1] * p[1]);
    }
    for m in 0..positions.len() {
        for n in (m + 1)..positions.len() {
            let dx = positions[m][0] - positions[n][0];
            let dy = positions[m][1] - positions[n][1];
            e += 1.0 / (dx * dx + dy * dy).sqrt();
        }
    }
    e
}

/// Axial electrode energy per ion at the crystal plane. Constant over the
/// in-plane coordinates.
pub(crate) fn axial_offset_energy(trap: &DimensionlessTrap) -> f64 {
    let z = trap.plane_z;
    let zt = z + trap.x_offset_top;
    let zb = z + trap.x_offset_bottom;
    0.5 * ((1.0 - trap.beta_r3_sq) * z * z
        + trap.beta_t3_sq * zt * zt
        + trap.beta_b3_sq * zb * zb)
}

/// Total dimensionless potential of a planar configuration, axial electrode
/// terms included (evaluated at the plane height).
pub fn potential(
    trap: &DimensionlessTrap,
    positions: &[[f64; 2]],
) -> Result<f64, EquilibriumError> {
    if positions.is_empty() {
        return Err(EquilibriumError::NoIons);
    }
    check_distinct(positions)?;
    Ok(structure_energy(trap, positions) + positions.len() as f64 * axial_offset_energy(trap))
}

pub(crate) fn gradient_into(
    trap: &DimensionlessTrap,
    positions: &[[f64; 2]],
    out: &mut Vec<[f64; 2]>,
) {
    let b1 = trap.beta1_sq;
    out.clear();
    out.extend(positions.iter().map(|p| [b1 * p[0], b1 * p[1]]));
    for m in 0..positions.len() {
        for n in (m + 1)..positions.len() {
            let dx = positions[m][0] - positions[n][0];
            let dy = positions[m][1] - positions[n][1];
            let r_sq = dx * dx + dy * dy;
            let inv_r3 = 1.0 / (r_sq * r_sq.sqrt());
            // mutual repulsion: d(1/r)/dx_m = -(x_m - x_n)/r^3
            out[m][0] -= dx * inv_r3;
            out[m][1] -= dy * inv_r3;
            out[n][0] += dx * inv_r3;
            out[n][1] += dy * inv_r3;
        }
    }
}

/// Gradient of the potential with respect to the in-plane coordinates.
pub fn gradient(
    trap: &DimensionlessTrap,
    positions: &[[f64; 2]],
) -> Result<Vec<[f64; 2]>, EquilibriumError> {
    if positions.is_empty() {
        return Err(EquilibriumError::NoIons);
    }
    check_distinct(positions)?;
    let mut g = Vec::new();
    gradient_into(trap, positions, &mut g);
    Ok(g)
}

pub(crate) fn max_norm(g: &[[f64; 2]]) -> f64 {
    g.iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// Radial shell structure of a crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellDecomposition {
    /// Ring occupancies, innermost first; a center ion counts as a ring of 1.
    pub ring_counts: Vec<usize>,
    /// Mean radius of each ring, strictly increasing.
    pub ring_radii: Vec<f64>,
    /// Ring index of each ion, parallel to the state's position list.
    pub ring_of: Vec<usize>,
    /// Set when a radial gap falls near the split threshold and the grouping
    /// could plausibly go either way.
    pub ambiguous: bool,
}

/// Group ions of a converged crystal into radial shells.
///
/// Sorted radii are split wherever a gap exceeds 25% of the mean
/// nearest-neighbor distance; ions closer to the center than 10% of the
/// outermost radius always form their own innermost group.
pub fn shell_decomposition(state: &CrystalState) -> Result<ShellDecomposition, EquilibriumError> {
    if !state.converged {
        return Err(EquilibriumError::NotConverged {
            gradient_norm: state.gradient_norm,
        });
    }
    let n = state.n_ions();
    let radii: Vec<f64> = state
        .positions
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .collect();
    if n == 1 {
        return Ok(ShellDecomposition {
            ring_counts: vec![1],
            ring_radii: vec![radii[0]],
            ring_of: vec![0],
            ambiguous: false,
        });
    }

    let mean_nn = {
        let mut acc = 0.0;
        for i in 0..n {
            let mut best = f64::INFINITY;
            for j in 0..n {
                if i != j {
                    let dx = state.positions[i][0] - state.positions[j][0];
                    let dy = state.positions[i][1] - state.positions[j][1];
                    best = best.min((dx * dx + dy * dy).sqrt());
                }
            }
            acc += best;
        }
        acc / n as f64
    };
    let threshold = 0.25 * mean_nn;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| radii[i].partial_cmp(&radii[j]).unwrap());
    let r_max = radii[order[n - 1]];

    let mut ring_of = vec![0usize; n];
    let mut ring = 0usize;
    let mut ambiguous = false;
    let mut had_center = false;
    for (k, &i) in order.iter().enumerate() {
        if k > 0 {
            let prev = order[k - 1];
            let gap = radii[i] - radii[prev];
            let center_boundary =
                !had_center && radii[prev] < 0.1 * r_max && radii[i] >= 0.1 * r_max;
            if gap > threshold || center_boundary {
                ring += 1;
                if center_boundary {
                    had_center = true;
                }
            }
            if (gap - threshold).abs() < 0.25 * threshold {
                ambiguous = true;
            }
        }
        ring_of[i] = ring;
    }

    let n_rings = ring + 1;
    let mut ring_counts = vec![0usize; n_rings];
    let mut ring_radii = vec![0.0f64; n_rings];
    for i in 0..n {
        ring_counts[ring_of[i]] += 1;
        ring_radii[ring_of[i]] += radii[i];
    }
    for r in 0..n_rings {
        ring_radii[r] /= ring_counts[r] as f64;
    }

    Ok(ShellDecomposition {
        ring_counts,
        ring_radii,
        ring_of,
        ambiguous,
    })
}
