// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use proptest::prelude::*;

use kraus_landscape::landscape::{
    critical_point_from_table, dynamical_range, riemannian_gradient, value_unitary, KinematicLandscape,
    GROUPING_REL_TOL,
};
use kraus_landscape::qmath::diag_real;
use kraus_landscape::topology::{
    asymptotic_count, binomial, composite_marginals, count_pure_env, count_tables, critical_values,
    enumerate_tables, enumerate_tables_capped, gaussian_count_estimate, hessian_count_global, spectrum_structure,
    CountInputs, SpectrumStructure, TemperatureRegime,
};
use kraus_landscape::{DensityOperator, Error};

/// Every cell vector in the box `0 ≤ c_ij ≤ min(r_i, c_j)`, filtered by margins.
fn brute_force_tables(rows: &[usize], cols: &[usize]) -> BTreeSet<Vec<usize>> {
    let (r, s) = (rows.len(), cols.len());
    let bounds: Vec<usize> = (0..r * s).map(|p| rows[p / s].min(cols[p % s])).collect();
    let mut out = BTreeSet::new();
    let mut cells = vec![0usize; r * s];
    loop {
        let row_ok = (0..r).all(|i| cells[i * s..(i + 1) * s].iter().sum::<usize>() == rows[i]);
        let col_ok = (0..s).all(|j| (0..r).map(|i| cells[i * s + j]).sum::<usize>() == cols[j]);
        if row_ok && col_ok {
            out.insert(cells.clone());
        }
        let mut p = 0;
        loop {
            if p == cells.len() {
                return out;
            }
            if cells[p] < bounds[p] {
                cells[p] += 1;
                break;
            }
            cells[p] = 0;
            p += 1;
        }
    }
}

fn sv(values: &[f64]) -> SpectrumStructure {
    SpectrumStructure::from_values(values, 1e-8)
}

#[test]
fn reference_table_counts() {
    assert_eq!(count_tables(&[10, 10, 10], &[15, 15], usize::MAX).unwrap(), 91);
    assert_eq!(count_tables(&[1, 1, 6], &[4, 4], usize::MAX).unwrap(), 4);
    assert_eq!(count_tables(&[2, 2], &[1, 1, 1, 1], usize::MAX).unwrap(), 6);
    assert!(matches!(count_tables(&[10, 10, 10], &[15, 15], 50), Err(Error::EnumerationCap(50))));
    assert!(matches!(enumerate_tables_capped(&[10, 10, 10], &[15, 15], 50), Err(Error::EnumerationCap(50))));
    assert!(matches!(count_tables(&[3], &[2], 10), Err(Error::MarginalMismatch(_))));
}

#[test]
fn closed_forms() {
    assert_eq!(binomial(10, 3), Some(120));
    assert_eq!(binomial(3, 5), Some(0));
    assert_eq!(binomial(200, 100), None);
    assert_eq!(count_pure_env(&[1, 1], 2).unwrap(), 4);
    assert_eq!(count_pure_env(&[2, 1], 3).unwrap(), 18);
    assert!(count_pure_env(&[1], 0).is_err());
    assert_eq!(hessian_count_global(2, 0, 1).unwrap(), 16);
    assert_eq!(hessian_count_global(3, 1, 2).unwrap(), 36);
    assert!(hessian_count_global(2, 2, 1).is_err());
    assert!(hessian_count_global(2, 0, 3).is_err());
}

#[test]
fn gaussian_reference_estimate() {
    let a = gaussian_count_estimate(&[10, 10, 10], &[15, 15]).unwrap();
    assert!((a - 96.95).abs() < 0.01, "{a}");
    assert!(gaussian_count_estimate(&[4], &[4]).is_err());
}

#[test]
fn accidental_degeneracy_is_reported() {
    let r = composite_marginals(&sv(&[0.6, 0.4]), &sv(&[0.6, 0.4]), &sv(&[0.5, -0.5]), 2);
    assert!(matches!(r, Err(Error::AccidentalDegeneracy(_))));
}

#[test]
fn observable_proportional_to_identity_has_one_table() {
    let m = composite_marginals(&sv(&[0.7, 0.3]), &sv(&[0.8, 0.2]), &sv(&[0.4, 0.4]), 2).unwrap();
    assert_eq!(m.col_sums, vec![4]);
    let tables = enumerate_tables(&m.row_sums, &m.col_sums).unwrap();
    assert_eq!(tables.len(), 1);
    let v = critical_values(&m, &tables).unwrap();
    assert!((v[0] - 0.4).abs() < 1e-12);
}

#[test]
fn zero_temperature_regime_is_closed_form() {
    let inputs = CountInputs::new(vec![1, 1], 0, vec![1, 1]);
    for lambda in [2, 5, 40] {
        assert_eq!(asymptotic_count(&inputs, lambda, TemperatureRegime::ZeroT).unwrap(), 4.0);
    }
}

#[test]
fn finite_temperature_regime_is_gaussian_of_composite_margins() {
    let inputs = CountInputs::new(vec![1, 1], 0, vec![1, 1]);
    for lambda in [3usize, 6, 12] {
        // non-degenerate environment: each system row is repeated λ times
        let rows = vec![1usize; 2 * lambda];
        let cols = vec![lambda, lambda];
        let direct = gaussian_count_estimate(&rows, &cols).unwrap();
        let asym = asymptotic_count(&inputs, lambda, TemperatureRegime::FiniteT).unwrap();
        assert!((asym / direct - 1.0).abs() < 1e-9, "λ={lambda}: {asym} vs {direct}");
    }
    let mut degenerate = inputs.clone();
    degenerate.env_degenerate = true;
    assert!(asymptotic_count(&degenerate, 4, TemperatureRegime::FiniteT).is_err());
}

#[test]
fn finite_temperature_estimate_improves_with_lambda() {
    let inputs = CountInputs::new(vec![1, 1], 0, vec![1, 1]);
    let rel = |lambda: usize| {
        let exact = count_tables(&vec![1; 2 * lambda], &[lambda, lambda], usize::MAX).unwrap() as f64;
        (asymptotic_count(&inputs, lambda, TemperatureRegime::FiniteT).unwrap() / exact - 1.0).abs()
    };
    let (a, b) = (rel(2), rel(8));
    assert!(b < a && b < 0.05, "{a} {b}");
}

#[test]
fn infinite_temperature_scaling_converges() {
    // rows [λ, λ] against columns [λ, λ] admit exactly λ + 1 tables
    let inputs = CountInputs::new(vec![1, 1], 0, vec![1, 1]);
    let ratio = |lambda: usize| {
        let exact = count_tables(&[lambda, lambda], &[lambda, lambda], usize::MAX).unwrap();
        assert_eq!(exact, lambda + 1);
        exact as f64 / asymptotic_count(&inputs, lambda, TemperatureRegime::InfiniteT).unwrap()
    };
    let limit = (std::f64::consts::PI / 3.0).sqrt();
    let (r1, r2) = (ratio(50), ratio(400));
    assert!((r2 - limit).abs() < (r1 - limit).abs());
    assert!((r2 - limit).abs() < 1e-2);
}

#[test]
fn regime_input_errors() {
    let inputs = CountInputs::new(vec![1, 1], 0, vec![1, 1]);
    assert!(asymptotic_count(&inputs, 0, TemperatureRegime::FiniteT).is_err());
    let mismatched = CountInputs::new(vec![1, 1], 0, vec![1, 2]);
    assert!(matches!(asymptotic_count(&mismatched, 2, TemperatureRegime::InfiniteT), Err(Error::MarginalMismatch(_))));
}

fn margins() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (prop::collection::vec(0usize..=4, 1..=3), 1usize..=3).prop_flat_map(|(rows, s)| {
        let total: usize = rows.iter().sum();
        (Just(rows), prop::collection::vec(0usize..=total, s - 1)).prop_map(move |(rows, mut cuts)| {
            cuts.sort_unstable();
            let mut cols = Vec::new();
            let mut prev = 0;
            for c in cuts.into_iter().chain(std::iter::once(total)) {
                cols.push(c - prev);
                prev = c;
            }
            (rows, cols)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn enumeration_matches_brute_force((rows, cols) in margins()) {
        let tables = enumerate_tables(&rows, &cols).unwrap();
        let got: Vec<Vec<usize>> = tables.iter().map(|t| t.cells().to_vec()).collect();
        let expected: Vec<Vec<usize>> = brute_force_tables(&rows, &cols).into_iter().collect();
        prop_assert_eq!(&got, &expected);
        prop_assert_eq!(count_tables(&rows, &cols, usize::MAX).unwrap(), expected.len());
        for t in &tables {
            prop_assert_eq!(t.row_sums(), rows.clone());
            prop_assert_eq!(t.col_sums(), cols.clone());
        }
    }

    #[test]
    fn gaussian_estimate_ignores_ordering((rows, cols) in margins(), rot in 0usize..3) {
        prop_assume!(cols.len() >= 2 && rows.iter().any(|&d| d > 0));
        let a = gaussian_count_estimate(&rows, &cols).unwrap();
        let mut r2 = rows.clone();
        r2.reverse();
        let mut c2 = cols.clone();
        let k = rot % c2.len();
        c2.rotate_left(k);
        let b = gaussian_count_estimate(&r2, &c2).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn critical_extremes_equal_range_and_points_are_stationary(
        p0 in 0.05f64..0.95,
        q0 in 0.05f64..0.95,
        t0 in -1.0f64..1.0,
        t1 in -1.0f64..1.0,
    ) {
        let p = [p0, 1.0 - p0];
        let q = [q0, 1.0 - q0];
        let products = [p[0] * q[0], p[0] * q[1], p[1] * q[0], p[1] * q[1]];
        let distinct = |a: f64, b: f64| (a - b).abs() > 1e-6;
        prop_assume!(distinct(p[0], p[1]) && distinct(q[0], q[1]) && distinct(t0, t1));
        prop_assume!((0..4).all(|i| (i + 1..4).all(|j| distinct(products[i], products[j]))));

        let rho = DensityOperator::from_populations(&p).unwrap();
        let env = DensityOperator::from_populations(&q).unwrap();
        let theta = diag_real(&[t0, t1]);
        let m = composite_marginals(&sv(&p), &sv(&q), &sv(&[t0, t1]), 2).unwrap();
        let tables = enumerate_tables(&m.row_sums, &m.col_sums).unwrap();
        let values = critical_values(&m, &tables).unwrap();
        let (lo, hi) = dynamical_range(&rho, &env, &theta).unwrap();
        prop_assert!((values[0] - hi).abs() < 1e-12);
        prop_assert!((values[values.len() - 1] - lo).abs() < 1e-12);

        let land = KinematicLandscape::new(&rho, &env, &theta).unwrap();
        let ps = spectrum_structure(land.p_op(), GROUPING_REL_TOL).unwrap();
        let ts = spectrum_structure(land.theta_op(), GROUPING_REL_TOL).unwrap();
        for t in enumerate_tables(&ps.mults, &ts.mults).unwrap() {
            let u = critical_point_from_table(&land, &t).unwrap();
            prop_assert!(riemannian_gradient(&land, &u).unwrap().norm() <= 1e-10);
            let j = value_unitary(&land, &u).unwrap();
            prop_assert!((j - t.weighted_value(&ps.values, &ts.values)).abs() <= 1e-12);
        }
    }
}
