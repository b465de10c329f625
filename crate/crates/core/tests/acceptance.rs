//! Acceptance suite for the library: eight criteria, one test each. Every
//! test prints a single `acceptance <id>: PASS|FAIL` line and carries its
//! sub-check details in the panic message on failure.

mod common;

use oblate_core::anneal::{anneal, AnnealSchedule};
use oblate_core::equilibrium::{
    default_seed_count, generate_seeds, gradient, shell_decomposition, solve_equilibrium,
    CrystalState, SolveOptions,
};
use oblate_core::modes::{mode_band_scan, solve_modes, spring_matrices_from_positions, BandOutcome};
use oblate_core::spin::{compute_couplings, fit_power_law};
use oblate_core::trap::{
    build_dimensionless, DimensionlessTrap, DriveConfig, IonSpecies, TrapGeometry,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn real_trap(v_ring: f64, v_caps: f64) -> DimensionlessTrap {
    let species = IonSpecies::ytterbium_171();
    let geom = TrapGeometry::default();
    let drive = DriveConfig::default().with_dc(v_ring, v_caps, v_caps);
    build_dimensionless(&species, &geom, &drive)
}

fn solve_n(trap: &DimensionlessTrap, n: usize, rng_seed: u64) -> CrystalState {
    let seeds = generate_seeds(n, default_seed_count(n), rng_seed);
    solve_equilibrium(trap, n, &seeds, &SolveOptions::default()).expect("equilibrium search failed")
}

/// Converged crystals spanning both voltage-derived and synthetic traps,
/// used by the mode-identity criteria.
fn crystal_set() -> Vec<(String, DimensionlessTrap, CrystalState)> {
    let mut out = Vec::new();
    for &n in &[2usize, 3, 5, 7, 10, 13, 17, 20] {
        let trap = real_trap(46.3, 50.0);
        out.push((format!("n={n} at 46.3/50"), trap, solve_n(&trap, n, 7)));
    }
    let weak = real_trap(97.0, 100.0);
    out.push(("n=6 at 97/100".into(), weak, solve_n(&weak, 6, 7)));
    for &(n, b1, b3) in &[(9usize, 0.2, 1.1), (12usize, 0.45, 0.9)] {
        let trap = DimensionlessTrap::from_betas(b1, b3);
        out.push((format!("n={n} synthetic"), trap, solve_n(&trap, n, 7)));
    }
    out
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut failures = Vec::new();
    for case in 0..100 {
        let n = rng.gen_range(2usize..=20);
        let b1 = rng.gen_range(0.05..1.5);
        let b3 = rng.gen_range(0.3..2.5);
        let trap = DimensionlessTrap::from_betas(b1, b3);
        let half_width = 0.8 * (n as f64).sqrt() + 0.7;
        let pos = common::sample_positions(&mut rng, n, half_width, 0.4);

        let g = gradient(&trap, &pos).expect("distinct positions");
        let g_fd = common::fd_gradient(b1, &pos, 1e-6);
        let g_scale = g
            .iter()
            .flat_map(|p| p.iter())
            .fold(1.0f64, |acc, &x| acc.max(x.abs()));
        let g_err = g
            .iter()
            .zip(&g_fd)
            .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
            .fold(0.0f64, f64::max)
            / g_scale;
        if g_err >= 1e-6 {
            failures.push(format!("case {case} (n={n}): gradient error {g_err:.3e}"));
        }

        let mats = spring_matrices_from_positions(&trap, &pos);
        let planar = mats.planar_matrix();
        let mut analytic = DMatrix::<f64>::zeros(3 * n, 3 * n);
        analytic.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&planar);
        analytic
            .view_mut((2 * n, 2 * n), (n, n))
            .copy_from(mats.axial_matrix());

        let mut q = vec![0.0f64; 3 * n];
        for (i, p) in pos.iter().enumerate() {
            q[i] = p[0];
            q[n + i] = p[1];
        }
        let fd = common::fd_hessian(b1, b3, &q, n, 4e-4);
        let h_scale = analytic.amax().max(1.0);
        let h_err = (&analytic - &fd).amax() / h_scale;
        if h_err >= 1e-6 {
            failures.push(format!("case {case} (n={n}): spring matrix error {h_err:.3e}"));
        }
    }
    common::verdict("1 (derivatives vs central differences)", &failures);
}

#[test]
fn axial_spectrum_contains_uniform_com_mode() {
    let mut failures = Vec::new();
    for (name, trap, state) in crystal_set() {
        let mats = spring_matrices_from_positions(&trap, &state.positions);
        let spectrum = solve_modes(&mats).expect("mode solve failed");
        let n = state.positions.len();
        let uniform = 1.0 / (n as f64).sqrt();

        // the center-of-mass candidate is the mode with the largest overlap
        // against the uniform vector
        let (best, overlap) = spectrum
            .axial_vectors
            .iter()
            .enumerate()
            .map(|(a, v)| (a, (v.iter().sum::<f64>() * uniform).abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty spectrum");

        let f = spectrum.axial_freqs[best];
        let lambda = f * f.abs();
        let eig_err = (lambda - trap.beta3_sq).abs() / trap.beta3_sq;
        if eig_err >= 1e-10 {
            failures.push(format!("{name}: eigenvalue error {eig_err:.3e}"));
        }
        if 1.0 - overlap >= 1e-10 {
            failures.push(format!(
                "{name}: uniform-vector overlap deficit {:.3e}",
                1.0 - overlap
            ));
        }
    }
    common::verdict("2 (axial center-of-mass identity)", &failures);
}

#[test]
fn planar_spectrum_has_one_rotational_zero_mode() {
    let mut failures = Vec::new();
    for (name, trap, state) in crystal_set() {
        let n = state.positions.len();
        if n < 2 {
            continue;
        }
        let mats = spring_matrices_from_positions(&trap, &state.positions);
        let spectrum = solve_modes(&mats).expect("mode solve failed");

        let zero_indices: Vec<usize> = spectrum
            .planar_freqs
            .iter()
            .enumerate()
            .filter(|(_, &f)| (f * f.abs()).abs() < 1e-8)
            .map(|(a, _)| a)
            .collect();
        if zero_indices.len() != 1 {
            failures.push(format!(
                "{name}: {} near-zero planar eigenvalues, expected 1",
                zero_indices.len()
            ));
            continue;
        }

        // generator of rigid rotations about the trap axis
        let mut gen = vec![0.0f64; 2 * n];
        for (m, p) in state.positions.iter().enumerate() {
            gen[m] = -p[1];
            gen[n + m] = p[0];
        }
        let norm = gen.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v = &spectrum.planar_vectors[zero_indices[0]];
        let cosine = v
            .iter()
            .zip(&gen)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .abs()
            / norm;
        if 1.0 - cosine >= 1e-8 {
            failures.push(format!(
                "{name}: rotation-generator alignment deficit {:.3e}",
                1.0 - cosine
            ));
        }
    }
    common::verdict("3 (rotational zero mode)", &failures);
}

#[test]
fn triangle_radius_matches_closed_form() {
    let settings = [
        (43.0, 50.0),
        (46.3, 50.0),
        (50.0, 50.0),
        (55.0, 50.0),
        (60.0, 50.0),
        (65.0, 50.0),
        (97.0, 100.0),
        (103.0, 100.0),
        (110.0, 100.0),
        (115.0, 100.0),
    ];
    let mut failures = Vec::new();
    for (v_ring, v_caps) in settings {
        let trap = real_trap(v_ring, v_caps);
        let state = solve_n(&trap, 3, 5);
        let expected = (3.0f64.sqrt() * trap.beta1_sq).powf(-1.0 / 3.0);
        let err = state
            .positions
            .iter()
            .map(|p| ((p[0].hypot(p[1]) - expected) / expected).abs())
            .fold(0.0f64, f64::max);
        if err >= 1e-8 {
            failures.push(format!("{v_ring}/{v_caps}: radius error {err:.3e}"));
        }
    }
    common::verdict("4 (three-ion radius closed form)", &failures);
}

#[test]
fn shell_structure_and_annealed_energy_floor() {
    let trap = real_trap(46.3, 50.0);
    let mut failures = Vec::new();
    for &n in &[3usize, 4, 5, 10, 15, 16, 17, 18, 19, 20] {
        let state = solve_n(&trap, n, 1);
        let shells = shell_decomposition(&state).expect("converged crystal");
        let counts = &shells.ring_counts;
        match n {
            3..=5 => {
                if counts != &[n] {
                    failures.push(format!("n={n}: rings {counts:?}, expected a single ring"));
                }
            }
            10 => {
                if counts.first() != Some(&3) {
                    failures.push(format!(
                        "n=10: innermost ring holds {:?} ions, expected 3 (rings {counts:?})",
                        counts.first()
                    ));
                }
            }
            15 => {
                if counts.len() != 2 {
                    failures.push(format!("n=15: {} rings {counts:?}, expected 2", counts.len()));
                }
            }
            _ => {
                if counts.first() != Some(&1) {
                    failures.push(format!(
                        "n={n}: innermost occupancy {:?}, expected 1 (rings {counts:?})",
                        counts.first()
                    ));
                }
            }
        }

        let mut best = f64::INFINITY;
        for seed in 0..5u64 {
            let schedule = AnnealSchedule {
                rng_seed: seed,
                ..AnnealSchedule::default()
            };
            let annealed = anneal(&trap, n, &schedule).expect("anneal failed");
            best = best.min(annealed.energy);
        }
        if best < state.energy - 1e-9 {
            failures.push(format!(
                "n={n}: annealing found energy {:.12e}, below the solver's {:.12e}",
                best, state.energy
            ));
        }
    }
    common::verdict("5 (shell structure and anneal floor)", &failures);
}

#[test]
fn band_trends_and_soft_onset_before_instability() {
    let species = IonSpecies::ytterbium_171();
    let geom = TrapGeometry::default();
    let options = SolveOptions::default();
    let mut failures = Vec::new();

    // stable window sweep: axial band top falls, planar floor rises
    let drive50 = DriveConfig::default().with_dc(0.0, 50.0, 50.0);
    let values: Vec<f64> = (0..=54).map(|k| 42.5 + 0.5 * k as f64).collect();
    let scan = mode_band_scan(&species, &geom, &drive50, 5, &values, &options, 3);
    let mut prev: Option<(f64, f64)> = None;
    for point in &scan.points {
        match &point.outcome {
            BandOutcome::Converged { spectrum, .. } => {
                let ax_top = spectrum
                    .axial_freqs
                    .iter()
                    .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let pl_floor = spectrum
                    .planar_freqs
                    .iter()
                    .filter(|f| f.abs() > 1e-4)
                    .fold(f64::INFINITY, |a, &b| a.min(b));
                if let Some((pax, ppl)) = prev {
                    if ax_top > pax + 1e-12 * pax.max(1.0) {
                        failures.push(format!(
                            "v_ring {}: axial band top rose {pax} -> {ax_top}",
                            point.v_ring
                        ));
                    }
                    if pl_floor < ppl - 1e-12 * ppl.max(1.0) {
                        failures.push(format!(
                            "v_ring {}: planar floor fell {ppl} -> {pl_floor}",
                            point.v_ring
                        ));
                    }
                }
                prev = Some((ax_top, pl_floor));
            }
            other => failures.push(format!(
                "v_ring {}: expected a converged point, got {other:?}",
                point.v_ring
            )),
        }
    }

    // raising the ring voltage further softens an axial mode well before the
    // stiffness itself changes sign
    let drive100 = DriveConfig::default().with_dc(0.0, 100.0, 100.0);
    let values: Vec<f64> = (0..=48).map(|k| 95.0 + 0.5 * k as f64).collect();
    let scan = mode_band_scan(&species, &geom, &drive100, 5, &values, &options, 3);
    let first_unstable = scan
        .points
        .iter()
        .filter(|p| matches!(p.outcome, BandOutcome::Unstable { .. }))
        .map(|p| p.v_ring)
        .fold(f64::INFINITY, f64::min);
    match scan.first_soft_v_ring() {
        Some(soft) => {
            if !first_unstable.is_finite() {
                failures.push("sweep never reached the unstable edge".into());
            } else if soft >= first_unstable {
                failures.push(format!(
                    "soft mode at v_ring {soft} did not precede instability at {first_unstable}"
                ));
            }
        }
        None => failures.push("no soft axial mode detected across the sweep".into()),
    }

    common::verdict("6 (band trends and soft onset)", &failures);
}

#[test]
fn coupling_exponents_sweep_uniform_toward_dipolar() {
    let mus = [1.001, 1.01, 1.1, 2.0, 11.0];
    let mut failures = Vec::new();
    for &n in &[10usize, 20] {
        let trap = real_trap(94.9, 100.0);
        let state = solve_n(&trap, n, 1);
        let mats = spring_matrices_from_positions(&trap, &state.positions);
        let spectrum = solve_modes(&mats).expect("mode solve failed");

        let mut prev = f64::NEG_INFINITY;
        for (k, &mu) in mus.iter().enumerate() {
            let couplings =
                compute_couplings(&state, &spectrum, mu).expect("detuning off resonance");
            let fit = fit_power_law(&couplings.pairs).expect("enough pairs");
            let b = fit.exponent;
            if !(b > -0.1 && b < 3.3) {
                failures.push(format!("n={n} mu={mu}: exponent {b:.4} outside (-0.1, 3.3)"));
            }
            if b < prev - 1e-12 {
                failures.push(format!(
                    "n={n} mu={mu}: exponent {b:.4} fell below the previous {prev:.4}"
                ));
            }
            if k == 0 && b >= 0.3 {
                failures.push(format!(
                    "n={n} mu={mu}: exponent {b:.4}, expected below 0.3 near the band top"
                ));
            }
            if k == mus.len() - 1 && b <= 2.0 {
                failures.push(format!(
                    "n={n} mu={mu}: exponent {b:.4}, expected above 2.0 far from the band"
                ));
            }
            prev = b;
        }
    }
    common::verdict("7 (coupling power-law window)", &failures);
}

#[test]
fn two_ion_coupling_matches_closed_form() {
    let trap = DimensionlessTrap::from_betas(0.25, 1.0);
    let state = solve_n(&trap, 2, 1);
    let mats = spring_matrices_from_positions(&trap, &state.positions);
    let spectrum = solve_modes(&mats).expect("mode solve failed");
    let stretch_sq = (trap.beta3_sq - trap.beta1_sq) / trap.beta3_sq;

    let mus = [
        0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.05, 1.2, 1.4, 1.7, 2.0, 2.5, 3.0, 4.0, 5.0,
        7.0, 9.0, 11.0,
    ];
    let mut failures = Vec::new();
    for mu in mus {
        let couplings = compute_couplings(&state, &spectrum, mu).expect("detuning off resonance");
        let computed = couplings.j[0][1];
        let expected = 0.5 * (1.0 / (mu * mu - 1.0) - 1.0 / (mu * mu - stretch_sq));
        let err = ((computed - expected) / expected).abs();
        if err >= 1e-12 {
            failures.push(format!("mu={mu}: relative error {err:.3e}"));
        }
    }
    common::verdict("8 (two-ion coupling closed form)", &failures);
}
