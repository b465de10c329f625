//! Property tests on randomly generated configurations, checking the
//! structural guarantees that hold for any input: spring-matrix symmetry
//! and row sums, coupling-matrix shape, float formatting round-trips, and
//! exact recovery of planted power laws.

use oblate_core::equilibrium::CrystalState;
use oblate_core::io::fmt_f64;
use oblate_core::modes::{solve_modes, spring_matrices_from_positions};
use oblate_core::spin::{compute_couplings, fit_power_law, PairCoupling};
use oblate_core::trap::DimensionlessTrap;
use proptest::prelude::*;

fn min_distance(pos: &[(f64, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pos.len() {
        for j in (i + 1)..pos.len() {
            best = best.min((pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1));
        }
    }
    best
}

fn positions(n: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    proptest::collection::vec((-4.0..4.0f64, -4.0..4.0f64), n)
        .prop_filter("ions too close", |p| min_distance(p) > 0.3)
        .prop_map(|p| p.into_iter().map(|(x, y)| [x, y]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spring_blocks_are_exactly_symmetric(
        b1 in 0.05..1.5f64,
        b3 in 0.3..2.0f64,
        pos in (2usize..7).prop_flat_map(positions),
    ) {
        let trap = DimensionlessTrap::from_betas(b1, b3);
        let mats = spring_matrices_from_positions(&trap, &pos);
        let planar = mats.planar_matrix();
        prop_assert_eq!((&planar - &planar.transpose()).amax(), 0.0);
        let axial = mats.axial_matrix();
        prop_assert_eq!((axial - axial.transpose()).amax(), 0.0);
    }

    // Coulomb terms cancel in every axial row: what remains is the bare
    // axial stiffness
    #[test]
    fn axial_rows_sum_to_the_axial_stiffness(
        b1 in 0.05..1.5f64,
        b3 in 0.3..2.0f64,
        pos in (2usize..7).prop_flat_map(positions),
    ) {
        let trap = DimensionlessTrap::from_betas(b1, b3);
        let mats = spring_matrices_from_positions(&trap, &pos);
        let axial = mats.axial_matrix();
        for m in 0..pos.len() {
            let row: f64 = axial.row(m).iter().sum();
            let slack: f64 = 1e-12 * axial.row(m).iter().map(|x| x.abs()).sum::<f64>().max(1.0);
            prop_assert!((row - b3).abs() <= slack, "row {} sums to {}", m, row);
        }
    }

    #[test]
    fn couplings_are_symmetric_with_zero_diagonal(
        b1 in 0.1..1.0f64,
        b3 in 0.8..1.5f64,
        mu in 1.5..9.0f64,
        pos in (2usize..6).prop_flat_map(positions),
    ) {
        let trap = DimensionlessTrap::from_betas(b1, b3);
        let mats = spring_matrices_from_positions(&trap, &pos);
        let spectrum = solve_modes(&mats).unwrap();
        let state = CrystalState {
            positions: pos.clone(),
            plane_z: 0.0,
            energy: 0.0,
            gradient_norm: 0.0,
            converged: true,
            seed_id: "property".into(),
        };
        let result = compute_couplings(&state, &spectrum, mu);
        prop_assume!(result.is_ok());
        let j = result.unwrap().j;
        for m in 0..pos.len() {
            prop_assert_eq!(j[m][m], 0.0);
            for p in 0..pos.len() {
                prop_assert_eq!(j[m][p], j[p][m]);
            }
        }
    }

    #[test]
    fn formatted_floats_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let parsed: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(parsed, x);
        if x != 0.0 {
            prop_assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn power_law_fit_recovers_planted_exponent(
        b in -2.5..2.5f64,
        log_amp in -3.0..3.0f64,
        mut distances in proptest::collection::vec(0.5..50.0f64, 3..12),
    ) {
        distances.sort_by(f64::total_cmp);
        prop_assume!(distances.windows(2).all(|w| w[1] / w[0] > 1.001));
        let amp = log_amp.exp();
        let pairs: Vec<PairCoupling> = distances
            .iter()
            .enumerate()
            .map(|(i, &d)| PairCoupling { m: 0, n: i + 1, distance: d, j: amp * d.powf(-b) })
            .collect();
        let fit = fit_power_law(&pairs).unwrap();
        prop_assert!((fit.exponent - b).abs() <= 1e-9);
        prop_assert!(fit.r_squared >= 1.0 - 1e-9);
        prop_assert_eq!(fit.n_pairs_used, pairs.len());
    }
}
