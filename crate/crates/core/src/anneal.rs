//! Simulated-annealing cross-check for crystal equilibria.
//!
//! This is a deliberately independent minimizer: Metropolis moves on the
//! energy alone, followed by a steepest-descent polish whose gradients come
//! from central finite differences. No analytic gradient or curvature
//! information enters, so agreement with the Newton solver checks the whole
//! derivative stack, not just the line search. The polish tolerance is set
//! by what finite differences can resolve and is therefore much looser than
//! the Newton solver's; energies still agree far more tightly than positions
//! because the energy is quadratically flat around a minimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{
    axial_offset_energy, shell_decomposition, structure_energy, CrystalState, EquilibriumError,
};
use crate::trap::DimensionlessTrap;

/// Cooling schedule and polish thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    /// Starting temperature; default is a tenth of the per-ion confinement
    /// energy scale `beta1_sq^(1/3)`.
    pub initial_temperature: Option<f64>,
    /// Geometric cooling factor per sweep.
    pub cooling: f64,
    /// Number of sweeps (one attempted move per ion each).
    pub sweeps: usize,
    pub rng_seed: u64,
    /// Max-norm bound on the finite-difference gradient at which the polish
    /// stops; limited by finite-difference noise, so far looser than the
    /// Newton solver's tolerance.
    pub polish_tol: f64,
    pub polish_max_iters: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            initial_temperature: None,
            cooling: 0.995,
            sweeps: 2000,
            rng_seed: 0,
            polish_tol: 1e-7,
            polish_max_iters: 20_000,
        }
    }
}

/// Trap and Coulomb energy terms involving ion `i` only; moving one ion
/// changes the total by the change in this partial sum.
fn ion_energy(b1: f64, positions: &[[f64; 2]], i: usize, p: [f64; 2]) -> f64 {
    let mut e = 0.5 * b1 * (p[0] * p[0] + p[1] * p[1]);
    for (j, q) in positions.iter().enumerate() {
        if j != i {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            e += 1.0 / (dx * dx + dy * dy).sqrt();
        }
    }
    e
}

fn fd_gradient(b1: f64, positions: &[[f64; 2]], h: f64, out: &mut Vec<[f64; 2]>) {
    let n = positions.len();
    out.clear();
    out.resize(n, [0.0; 2]);
    for i in 0..n {
        for c in 0..2 {
            let orig = positions[i][c];
            let mut plus = positions[i];
            plus[c] = orig + h;
            let ep = ion_energy(b1, positions, i, plus);
            let mut minus = positions[i];
            minus[c] = orig - h;
            let em = ion_energy(b1, positions, i, minus);
            out[i][c] = (ep - em) / (2.0 * h);
        }
    }
}

/// Anneal `n_ions` into a planar crystal and polish the result.
///
/// Deterministic for a given schedule. The returned `gradient_norm` is the
/// final finite-difference value and `converged` compares it against the
/// schedule's polish tolerance.
pub fn anneal(
    trap: &DimensionlessTrap,
    n_ions: usize,
    schedule: &AnnealSchedule,
) -> Result<CrystalState, EquilibriumError> {
    if n_ions == 0 {
        return Err(EquilibriumError::NoIons);
    }
    if !trap.stable {
        return Err(EquilibriumError::TrapUnstable {
            beta1_sq: trap.beta1_sq,
            beta3_sq: trap.beta3_sq,
        });
    }
    let b1 = trap.beta1_sq;
    let n = n_ions;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.rng_seed);
    let radius = (2.0 * n as f64 / b1).cbrt();

    // initial placement: uniform over a disk, rejecting near collisions
    let mut positions: Vec<[f64; 2]> = Vec::with_capacity(n);
    while positions.len() < n {
        let r = radius * rng.gen::<f64>().sqrt();
        let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let cand = [r * th.cos(), r * th.sin()];
        let ok = positions.iter().all(|p| {
            let dx = p[0] - cand[0];
            let dy = p[1] - cand[1];
            dx * dx + dy * dy > 1e-4 * radius * radius
        });
        if ok {
            positions.push(cand);
        }
    }

    let mut temperature = schedule
        .initial_temperature
        .unwrap_or(0.1 * b1.cbrt());
    let mut step = 0.5 * radius / (n as f64).sqrt();
    let mut best = positions.clone();
    let mut best_energy = structure_energy(trap, &positions);

    for _ in 0..schedule.sweeps {
        let mut accepted = 0usize;
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            let old = positions[i];
            let cand = [
                old[0] + step * (2.0 * rng.gen::<f64>() - 1.0),
                old[1] + step * (2.0 * rng.gen::<f64>() - 1.0),
            ];
            let de = ion_energy(b1, &positions, i, cand) - ion_energy(b1, &positions, i, old);
            let take = de <= 0.0 || rng.gen::<f64>() < (-de / temperature).exp();
            if take {
                positions[i] = cand;
                accepted += 1;
            }
        }
        let ratio = accepted as f64 / n as f64;
        if ratio < 0.3 {
            step *= 0.9;
        } else if ratio > 0.5 {
            step *= 1.1;
        }
        temperature *= schedule.cooling;
        let e = structure_energy(trap, &positions);
        if e < best_energy {
            best_energy = e;
            best = positions.clone();
        }
    }

    // steepest-descent polish on the annealed best, finite differences only
    let mut x = best;
    let h = 1e-6 * radius.max(1.0);
    let mut g: Vec<[f64; 2]> = Vec::new();
    let mut energy = structure_energy(trap, &x);
    let mut alpha = 0.1;
    let mut gnorm = f64::INFINITY;
    for _ in 0..schedule.polish_max_iters {
        fd_gradient(b1, &x, h, &mut g);
        gnorm = g
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        if gnorm <= schedule.polish_tol {
            break;
        }
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<[f64; 2]> = x
                .iter()
                .zip(&g)
                .map(|(p, gi)| [p[0] - alpha * gi[0], p[1] - alpha * gi[1]])
                .collect();
            let et = structure_energy(trap, &trial);
            if et < energy {
                x = trial;
                energy = et;
                alpha *= 1.2;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }

    Ok(CrystalState {
        plane_z: trap.plane_z,
        energy: structure_energy(trap, &x) + n as f64 * axial_offset_energy(trap),
        gradient_norm: gnorm,
        converged: gnorm <= schedule.polish_tol,
        seed_id: format!("anneal:{}", schedule.rng_seed),
        positions: x,
    })
}

/// Energy and shell-structure agreement between two solved crystals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyComparison {
    /// `a.energy - b.energy`.
    pub energy_difference: f64,
    /// Both decompose into the same ring occupancies with mean radii within
    /// `radius_tol`.
    pub structural_match: bool,
}

pub fn energy_compare(a: &CrystalState, b: &CrystalState, radius_tol: f64) -> EnergyComparison {
    let energy_difference = a.energy - b.energy;
    let structural_match = match (shell_decomposition(a), shell_decomposition(b)) {
        (Ok(sa), Ok(sb)) => {
            sa.ring_counts == sb.ring_counts
                && sa
                    .ring_radii
                    .iter()
                    .zip(&sb.ring_radii)
                    .all(|(ra, rb)| (ra - rb).abs() <= radius_tol)
        }
        _ => false,
    };
    EnergyComparison {
        energy_difference,
        structural_match,
    }
}
