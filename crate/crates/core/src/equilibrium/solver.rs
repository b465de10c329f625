//! Damped Newton minimization over multiple seeds, curvature certification
//! of candidate minima, and a rotational gauge fix for the winner.
//!
//! The line search works on the structure energy alone: the axial electrode
//! offset is constant over the in-plane coordinates, and keeping it out of
//! the objective preserves the full f64 resolution of the decrease test.
//! Below a residual gradient of about 1e-6 even the structure energy can no
//! longer resolve a Newton step's decrease, so the damped iteration hands
//! over to undamped Newton steps, which are contractive near a minimum.

use nalgebra::{Cholesky, DVector};

use super::{
    axial_offset_energy, check_distinct, gradient_into, max_norm, structure_energy, CrystalState,
    EquilibriumError, Seed,
};
use crate::linalg::symmetric_eigen;
use crate::modes::spring_matrices_from_positions;
use crate::trap::DimensionlessTrap;

const ARMIJO_SLOPE_FRACTION: f64 = 1e-4;
const MAX_HALVINGS: u32 = 60;
/// Largest per-ion displacement accepted in one Newton step.
const STEP_CAP: f64 = 1.0;
/// Below this gradient norm the decrease test is abandoned (see module doc).
const ENDGAME_GNORM: f64 = 1e-6;
/// Curvature window for the zero rotation mode and floor for the rest.
const CURVATURE_TOL: f64 = 1e-8;
const ROTATION_OVERLAP: f64 = 0.9;

/// Convergence thresholds of the equilibrium solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Max-norm bound on the potential gradient at convergence.
    pub gradient_tol: f64,
    /// Newton iteration budget per seed.
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-10,
            max_iterations: 500,
        }
    }
}

/// Outcome of one seed's minimization.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SeedSummary {
    pub seed_id: String,
    pub converged: bool,
    /// Converged and the Hessian certifies a minimum (rotation mode aside).
    pub certified: bool,
    pub energy: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Winning crystal plus the per-seed record it was selected from.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub best: CrystalState,
    pub seeds: Vec<SeedSummary>,
}

struct Minimized {
    positions: Vec<[f64; 2]>,
    structure_energy: f64,
    gradient_norm: f64,
    iterations: usize,
    converged: bool,
}

fn newton_minimize(
    trap: &DimensionlessTrap,
    start: &[[f64; 2]],
    options: &SolveOptions,
) -> Minimized {
    let n = start.len();
    let mut x = start.to_vec();
    let mut g: Vec<[f64; 2]> = Vec::new();
    let mut f = structure_energy(trap, &x);
    gradient_into(trap, &x, &mut g);
    let mut gnorm = max_norm(&g);
    let mut iterations = 0;

    for _ in 0..options.max_iterations {
        if gnorm <= options.gradient_tol {
            break;
        }
        iterations += 1;

        let h = spring_matrices_from_positions(trap, &x).planar_matrix();
        let mut gv = DVector::<f64>::zeros(2 * n);
        for i in 0..n {
            gv[i] = g[i][0];
            gv[n + i] = g[i][1];
        }
        let scale = h.diagonal().amax().max(f64::MIN_POSITIVE);

        // Cholesky with a ramped Levenberg shift until the factorization
        // succeeds and the step is a descent direction
        let mut shift = 0.0f64;
        let mut dir: Option<DVector<f64>> = None;
        loop {
            let mut m = h.clone();
            if shift > 0.0 {
                for i in 0..2 * n {
                    m[(i, i)] += shift;
                }
            }
            if let Some(ch) = Cholesky::new(m) {
                let d = ch.solve(&(-&gv));
                if d.dot(&gv) < 0.0 {
                    dir = Some(d);
                    break;
                }
            }
            shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
            if shift > 1e10 * scale {
                break;
            }
        }
        let d = dir.unwrap_or_else(|| -&gv);

        let mut step: Vec<[f64; 2]> = (0..n).map(|i| [d[i], d[n + i]]).collect();
        let max_disp = step
            .iter()
            .map(|s| (s[0] * s[0] + s[1] * s[1]).sqrt())
            .fold(0.0f64, f64::max);
        if max_disp > STEP_CAP {
            let sc = STEP_CAP / max_disp;
            for s in &mut step {
                s[0] *= sc;
                s[1] *= sc;
            }
        }
        let slope: f64 = g
            .iter()
            .zip(&step)
            .map(|(gi, si)| gi[0] * si[0] + gi[1] * si[1])
            .sum();

        let endgame = gnorm < ENDGAME_GNORM;
        let mut alpha = 1.0f64;
        let mut accepted = false;
        let mut trial = vec![[0.0f64; 2]; n];
        for _ in 0..=MAX_HALVINGS {
            for i in 0..n {
                trial[i][0] = x[i][0] + alpha * step[i][0];
                trial[i][1] = x[i][1] + alpha * step[i][1];
            }
            let ft = structure_energy(trap, &trial);
            let ok = if endgame {
                ft.is_finite()
            } else {
                ft <= f + ARMIJO_SLOPE_FRACTION * alpha * slope
            };
            if ok {
                x.copy_from_slice(&trial);
                f = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        gradient_into(trap, &x, &mut g);
        gnorm = max_norm(&g);
    }

    Minimized {
        positions: x,
        structure_energy: f,
        gradient_norm: gnorm,
        iterations,
        converged: gnorm <= options.gradient_tol,
    }
}

/// Normalized in-plane rotation generator (-y, x), in the solver's stacked
/// layout; `None` when every ion sits at the origin.
fn rotation_generator(positions: &[[f64; 2]]) -> Option<DVector<f64>> {
    let n = positions.len();
    let mut t = DVector::<f64>::zeros(2 * n);
    for (i, p) in positions.iter().enumerate() {
        t[i] = -p[1];
        t[n + i] = p[0];
    }
    let norm = t.norm();
    if norm > 0.0 {
        Some(t / norm)
    } else {
        None
    }
}

/// True when every planar curvature is non-negative within tolerance, the
/// rotational zero mode excepted.
fn certified_minimum(trap: &DimensionlessTrap, positions: &[[f64; 2]]) -> bool {
    let h = spring_matrices_from_positions(trap, positions).planar_matrix();
    let (vals, vecs) = symmetric_eigen(&h);
    let rotation_index = rotation_generator(positions).and_then(|t| {
        let mut best: Option<(usize, f64)> = None;
        for (k, &l) in vals.iter().enumerate() {
            if l.abs() < CURVATURE_TOL
                && vecs.column(k).dot(&t).abs() > ROTATION_OVERLAP
                && best.map_or(true, |(_, b)| l.abs() < b)
            {
                best = Some((k, l.abs()));
            }
        }
        best.map(|(k, _)| k)
    });
    vals.iter()
        .enumerate()
        .all(|(k, &l)| Some(k) == rotation_index || l > -CURVATURE_TOL)
}

/// Rotate the configuration about the origin so the outermost ion (lowest
/// index on a tie) sits on the positive x axis.
fn rotate_to_gauge(positions: &mut [[f64; 2]]) {
    let mut k = 0usize;
    let mut r_best = -1.0f64;
    for (i, p) in positions.iter().enumerate() {
        let r = p[0].hypot(p[1]);
        if r > r_best {
            r_best = r;
            k = i;
        }
    }
    if r_best <= 0.0 {
        return;
    }
    let c = positions[k][0] / r_best;
    let s = positions[k][1] / r_best;
    for p in positions.iter_mut() {
        let (px, py) = (p[0], p[1]);
        p[0] = c * px + s * py;
        p[1] = -s * px + c * py;
    }
    // zero analytically; clear the last rounding bit for a clean gauge
    positions[k][1] = 0.0;
}

/// Fix the rotational gauge of a converged state, re-polishing if the
/// rotation's rounding pushed the residual back above tolerance.
fn gauge_fix(trap: &DimensionlessTrap, state: &mut CrystalState, options: &SolveOptions) {
    let offset = state.n_ions() as f64 * axial_offset_energy(trap);
    let mut g = Vec::new();
    for _ in 0..3 {
        rotate_to_gauge(&mut state.positions);
        gradient_into(trap, &state.positions, &mut g);
        state.gradient_norm = max_norm(&g);
        state.energy = structure_energy(trap, &state.positions) + offset;
        if state.gradient_norm <= options.gradient_tol {
            return;
        }
        let polish = newton_minimize(
            trap,
            &state.positions,
            &SolveOptions {
                gradient_tol: options.gradient_tol,
                max_iterations: 20,
            },
        );
        state.positions = polish.positions;
        state.gradient_norm = polish.gradient_norm;
        state.energy = polish.structure_energy + offset;
    }
    rotate_to_gauge(&mut state.positions);
    gradient_into(trap, &state.positions, &mut g);
    state.gradient_norm = max_norm(&g);
    state.energy = structure_energy(trap, &state.positions) + offset;
    state.converged = state.gradient_norm <= options.gradient_tol;
}

/// Minimize from every seed and report the winner with per-seed outcomes.
///
/// The winner is the lowest-energy certified minimum (first seed on an exact
/// tie), gauge-fixed so the outermost ion lies on the positive x axis. When
/// no seed certifies, the error carries the state with the smallest residual
/// gradient.
pub fn solve_equilibrium_report(
    trap: &DimensionlessTrap,
    n_ions: usize,
    seeds: &[Seed],
    options: &SolveOptions,
) -> Result<SolveReport, EquilibriumError> {
    if n_ions == 0 {
        return Err(EquilibriumError::NoIons);
    }
    if !trap.stable {
        return Err(EquilibriumError::TrapUnstable {
            beta1_sq: trap.beta1_sq,
            beta3_sq: trap.beta3_sq,
        });
    }
    if seeds.is_empty() {
        return Err(EquilibriumError::NoSeeds);
    }
    for (index, seed) in seeds.iter().enumerate() {
        if seed.positions.len() != n_ions {
            return Err(EquilibriumError::SeedSizeMismatch {
                index,
                got: seed.positions.len(),
                expected: n_ions,
            });
        }
        check_distinct(&seed.positions)?;
    }

    let offset = n_ions as f64 * axial_offset_energy(trap);
    let mut summaries = Vec::with_capacity(seeds.len());
    let mut winner: Option<CrystalState> = None;
    let mut fallback: Option<CrystalState> = None;

    for seed in seeds {
        let m = newton_minimize(trap, &seed.positions, options);
        let certified = m.converged && certified_minimum(trap, &m.positions);
        let state = CrystalState {
            positions: m.positions,
            plane_z: trap.plane_z,
            energy: m.structure_energy + offset,
            gradient_norm: m.gradient_norm,
            converged: m.converged,
            seed_id: seed.id.clone(),
        };
        summaries.push(SeedSummary {
            seed_id: seed.id.clone(),
            converged: m.converged,
            certified,
            energy: state.energy,
            gradient_norm: state.gradient_norm,
            iterations: m.iterations,
        });
        if certified {
            if winner.as_ref().map_or(true, |w| state.energy < w.energy) {
                winner = Some(state);
            }
        } else if fallback
            .as_ref()
            .map_or(true, |b| state.gradient_norm < b.gradient_norm)
        {
            fallback = Some(state);
        }
    }

    match winner {
        Some(mut state) => {
            gauge_fix(trap, &mut state, options);
            Ok(SolveReport {
                best: state,
                seeds: summaries,
            })
        }
        None => {
            let best = fallback.expect("at least one seed was minimized");
            let gradient_norm = best.gradient_norm;
            Err(EquilibriumError::NoConvergence {
                best: Box::new(best),
                gradient_norm,
            })
        }
    }
}

/// Winning crystal only; see `solve_equilibrium_report`.
pub fn solve_equilibrium(
    trap: &DimensionlessTrap,
    n_ions: usize,
    seeds: &[Seed],
    options: &SolveOptions,
) -> Result<CrystalState, EquilibriumError> {
    solve_equilibrium_report(trap, n_ions, seeds, options).map(|r| r.best)
}
