// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded invariant suite behind `kraus-landscape validate`.
//!
//! Setting `KRAUS_LANDSCAPE_FAULT=kraus_identity` corrupts one Kraus operator
//! before the completeness check so the failure path can be exercised.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    build_model, field_gradient, lie_algebra_rank, objective, optimize_cg, propagate, thermal_state, CgOptions,
    ControlField, EnvironmentSpec,
};
use crate::error::Result;
use crate::kraus::{apply_kraus, channel_distance, kraus_from_unitary, kraus_identity_residual, reduce_composite};
use crate::landscape::{
    ascend, critical_point_from_table, dynamical_range, hessian_index_at, riemannian_gradient, value_kraus,
    value_unitary, KinematicLandscape,
};
use crate::qmath::{
    c, diag_real, expm_anti_hermitian, haar_unitary, haar_unitary_from, is_psd, random_hermitian,
    unitary_residual, von_neumann_entropy, DensityOperator,
};
use crate::topology::{
    asymptotic_count, composite_marginals, count_pure_env, critical_values, enumerate_tables, gaussian_count_estimate,
    CountInputs, SpectrumStructure, TemperatureRegime, DEGENERACY_REL_TOL,
};

pub const FAULT_ENV: &str = "KRAUS_LANDSCAPE_FAULT";

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    /// `None` when the check itself raised an error.
    pub residual: Option<f64>,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub invariants: Vec<InvariantResult>,
}

type Check = (&'static str, f64, fn(usize) -> Result<f64>);

/// Residuals are compared with `residual <= threshold`.
const CHECKS: &[Check] = &[
    ("density_entropy_bounds", 1e-12, entropy_bounds),
    ("haar_unitarity", 1e-12, haar_unitarity),
    ("kraus_identity", 1e-9, kraus_identity),
    ("kraus_matches_composite_reduction", 1e-9, kraus_reduction),
    ("kraus_environment_rotation_equivalence", 1e-9, kraus_rotation),
    ("landscape_unitary_matches_kraus_value", 1e-9, landscape_routes),
    ("landscape_gradient_matches_finite_difference", 1e-6, landscape_gradient),
    ("landscape_values_within_range", 1e-12, landscape_bounds),
    ("zero_temperature_range_is_one", 1e-9, zero_temperature_range),
    ("infinite_temperature_range_limit", 1e-6, infinite_temperature_range),
    ("range_non_increasing_in_temperature", 1e-12, range_monotone),
    ("table_count_matches_closed_form", 0.0, closed_form_count),
    ("critical_value_extremes_match_range", 1e-12, critical_extremes),
    ("table_critical_points_are_stationary", 1e-9, table_critical_points),
    ("gaussian_estimate_relative_error", 0.1, gaussian_example),
    ("finite_temperature_count_matches_replicated_margins", 1e-9, finite_temperature_count),
    ("global_maximum_hessian_count", 0.0, hessian_count),
    ("kinematic_ascent_trap_free", 1e-6, trap_free),
    ("lie_rank_full_with_coupling", 0.0, lie_rank),
    ("propagator_unitarity", 1e-9, propagator_unitarity),
    ("objective_phase_invariance", 1e-12, phase_invariance),
    ("objective_matches_kraus_route", 1e-9, objective_route),
    ("reduced_state_valid", 1e-9, reduced_state_valid),
    ("field_gradient_matches_finite_difference", 1e-6, field_gradient_fd),
    ("uncoupled_optimum_within_closed_bound", 1e-6, uncoupled_bound),
];

pub fn invariant_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

pub fn run_validation(trials: usize) -> ValidationReport {
    let trials = trials.max(1);
    let invariants: Vec<InvariantResult> = CHECKS
        .par_iter()
        .map(|&(name, threshold, check)| match check(trials) {
            Ok(r) => InvariantResult { name: name.into(), passed: r <= threshold, residual: Some(r), threshold, error: None },
            Err(e) => InvariantResult {
                name: name.into(),
                passed: false,
                residual: None,
                threshold,
                error: Some(e.to_string()),
            },
        })
        .collect();
    ValidationReport { passed: invariants.iter().all(|i| i.passed), invariants }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x6b72_6175_7300_0000 ^ tag)
}

const SHAPES: [(usize, usize); 5] = [(2, 2), (2, 4), (3, 3), (4, 4), (2, 8)];

fn max_of(mut it: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    it.try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}

fn qubit_state() -> DensityOperator {
    DensityOperator::from_populations(&[0.7, 0.3]).expect("valid populations")
}

fn spin_half() -> crate::ComplexMatrix {
    diag_real(&[0.5, -0.5])
}

fn entropy_bounds(trials: usize) -> Result<f64> {
    let mut r = rng(1);
    max_of((0..trials).map(|t| {
        let n = 2 + t % 5;
        let s = von_neumann_entropy(&DensityOperator::random(n, &mut r));
        Ok((-s).max(s - (n as f64).ln()).max(0.0))
    }))
}

fn haar_unitarity(trials: usize) -> Result<f64> {
    max_of((0..trials).map(|t| Ok(unitary_residual(&haar_unitary(2 + t % 7, t as u64)))))
}

fn kraus_identity(trials: usize) -> Result<f64> {
    let fault = std::env::var(FAULT_ENV).is_ok_and(|v| v == "kraus_identity");
    let mut r = rng(2);
    max_of((0..trials * 5).map(|t| {
        let (n, l) = SHAPES[t % SHAPES.len()];
        let env = DensityOperator::random(l, &mut r);
        let mut k = kraus_from_unitary(&haar_unitary_from(n * l, &mut r), &env)?;
        if fault {
            k.block_mut(0, 0)[(0, 0)] += c(1e-6, 0.0);
        }
        Ok(kraus_identity_residual(&k))
    }))
}

fn kraus_reduction(trials: usize) -> Result<f64> {
    let mut r = rng(3);
    max_of((0..trials * 5).map(|t| {
        let (n, l) = SHAPES[t % SHAPES.len()];
        let env = DensityOperator::random(l, &mut r);
        let rho = DensityOperator::random(n, &mut r);
        let u = haar_unitary_from(n * l, &mut r);
        let k = kraus_from_unitary(&u, &env)?;
        let a = apply_kraus(&k, &rho)?;
        let b = reduce_composite(&u, &rho, &env)?;
        Ok((a.matrix() - b).norm())
    }))
}

fn kraus_rotation(trials: usize) -> Result<f64> {
    let mut r = rng(4);
    max_of((0..trials).map(|t| {
        let (n, l) = SHAPES[t % SHAPES.len()];
        let env = DensityOperator::random(l, &mut r);
        let k = kraus_from_unitary(&haar_unitary_from(n * l, &mut r), &env)?;
        let rotated = k.rotate_environment(&haar_unitary_from(l, &mut r))?;
        channel_distance(&k, &rotated)
    }))
}

fn landscape_routes(trials: usize) -> Result<f64> {
    let mut r = rng(5);
    max_of((0..trials).map(|t| {
        let (n, l) = SHAPES[t % SHAPES.len()];
        let rho = DensityOperator::random(n, &mut r);
        let env = DensityOperator::random(l, &mut r);
        let theta = random_hermitian(n, &mut r);
        let u = haar_unitary_from(n * l, &mut r);
        let land = KinematicLandscape::new(&rho, &env, &theta)?;
        let a = value_unitary(&land, &u)?;
        let b = value_kraus(&kraus_from_unitary(&u, &env)?, &rho, &theta)?;
        Ok((a - b).abs())
    }))
}

fn landscape_gradient(trials: usize) -> Result<f64> {
    let mut r = rng(6);
    max_of((0..trials).map(|t| {
        let (n, l) = SHAPES[t % 3];
        let rho = DensityOperator::random(n, &mut r);
        let env = DensityOperator::random(l, &mut r);
        let theta = random_hermitian(n, &mut r);
        let land = KinematicLandscape::new(&rho, &env, &theta)?;
        let u = haar_unitary_from(n * l, &mut r);
        let g = riemannian_gradient(&land, &u)?;
        let h = random_hermitian(n * l, &mut r);
        let a = &h * c(0.0, 1.0 / h.norm());
        let eps = 1e-5;
        let plus = value_unitary(&land, &(expm_anti_hermitian(&(&a * c(eps, 0.0)))? * &u))?;
        let minus = value_unitary(&land, &(expm_anti_hermitian(&(&a * c(-eps, 0.0)))? * &u))?;
        let fd = (plus - minus) / (2.0 * eps);
        let exact = crate::qmath::inner(&a, &g);
        Ok((fd - exact).abs() / g.norm().max(1e-12))
    }))
}

fn landscape_bounds(trials: usize) -> Result<f64> {
    let mut r = rng(7);
    max_of((0..trials).map(|t| {
        let (n, l) = SHAPES[t % SHAPES.len()];
        let rho = DensityOperator::random(n, &mut r);
        let env = DensityOperator::random(l, &mut r);
        let theta = random_hermitian(n, &mut r);
        let land = KinematicLandscape::new(&rho, &env, &theta)?;
        let (lo, hi) = land.dynamical_range();
        let j = value_unitary(&land, &haar_unitary_from(n * l, &mut r))?;
        Ok((lo - j).max(j - hi).max(0.0))
    }))
}

fn zero_temperature_range(_: usize) -> Result<f64> {
    max_of((2..=8).map(|l| {
        let (lo, hi) = dynamical_range(&qubit_state(), &DensityOperator::basis_state(l, 0), &spin_half())?;
        Ok((hi - lo - 1.0).abs())
    }))
}

fn infinite_temperature_range(_: usize) -> Result<f64> {
    let envs = [EnvironmentSpec::spin(2, 1.0), EnvironmentSpec::spin(6, 1.0), EnvironmentSpec::oscillator(8, 1.0)];
    let mut worst = 0.0f64;
    for pops in [[0.7, 0.3], [0.55, 0.45]] {
        let rho = DensityOperator::from_populations(&pops)?;
        for e in &envs {
            let env = thermal_state(&e.hamiltonian()?, 1e6)?.state;
            let (lo, hi) = dynamical_range(&rho, &env, &spin_half())?;
            worst = worst.max((hi - lo - (pops[0] - pops[1])).abs());
        }
    }
    Ok(worst)
}

fn range_monotone(_: usize) -> Result<f64> {
    let envs = [EnvironmentSpec::spin(2, 1.0), EnvironmentSpec::spin(6, 1.0), EnvironmentSpec::oscillator(8, 1.0)];
    let mut worst = 0.0f64;
    for e in &envs {
        let h = e.hamiltonian()?;
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let env = thermal_state(&h, 0.2 * k as f64)?.state;
            let (lo, hi) = dynamical_range(&qubit_state(), &env, &spin_half())?;
            worst = worst.max(hi - lo - prev);
            prev = hi - lo;
        }
    }
    Ok(worst)
}

/// Multiplicity patterns of `n` items into ordered groups.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    (1..=n)
        .flat_map(|first| {
            compositions(n - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn closed_form_count(_: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for pattern in compositions(n) {
            for zero in [false, true] {
                let (nonzero, d_r) = if zero && pattern.len() > 1 {
                    (pattern[..pattern.len() - 1].to_vec(), *pattern.last().expect("non-empty"))
                } else {
                    (pattern.clone(), 0)
                };
                for s in 1..=3usize.min(n) {
                    for theta in compositions(n).into_iter().filter(|t| t.len() == s) {
                        // pure environment of dimension λ = n
                        let lambda = n;
                        let mut rows = nonzero.clone();
                        let zero_row = d_r * lambda + (lambda - 1) * n - d_r * (lambda - 1);
                        if zero_row > 0 {
                            rows.push(zero_row);
                        }
                        let cols: Vec<usize> = theta.iter().map(|e| e * lambda).collect();
                        let exact = enumerate_tables(&rows, &cols)?.len() as f64;
                        let closed = count_pure_env(&nonzero, s)? as f64;
                        worst = worst.max((exact - closed).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn critical_extremes(trials: usize) -> Result<f64> {
    let mut r = rng(8);
    max_of((0..trials).map(|_| {
        let rho = DensityOperator::random(2, &mut r);
        let env = DensityOperator::random(2, &mut r);
        let theta = diag_real(&[0.5, -0.5]);
        let marg = composite_marginals(
            &SpectrumStructure::from_values(&rho.spectrum().values, DEGENERACY_REL_TOL),
            &SpectrumStructure::from_values(&env.spectrum().values, DEGENERACY_REL_TOL),
            &SpectrumStructure::from_values(&[0.5, -0.5], DEGENERACY_REL_TOL),
            2,
        )?;
        let vals = critical_values(&marg, &enumerate_tables(&marg.row_sums, &marg.col_sums)?)?;
        let (lo, hi) = dynamical_range(&rho, &env, &theta)?;
        Ok((vals[0] - hi).abs().max((vals[vals.len() - 1] - lo).abs()))
    }))
}

fn table_critical_points(_: usize) -> Result<f64> {
    let rho = DensityOperator::from_populations(&[0.6, 0.3, 0.1])?;
    let env = DensityOperator::from_populations(&[0.8, 0.2])?;
    let theta = diag_real(&[1.0, 0.0, -1.0]);
    let land = KinematicLandscape::new(&rho, &env, &theta)?;
    let p = crate::topology::spectrum_structure(land.p_op(), crate::landscape::GROUPING_REL_TOL)?;
    let t = crate::topology::spectrum_structure(land.theta_op(), crate::landscape::GROUPING_REL_TOL)?;
    max_of(enumerate_tables(&p.mults, &t.mults)?.iter().map(|tab| {
        let u = critical_point_from_table(&land, tab)?;
        Ok(riemannian_gradient(&land, &u)?.norm())
    }))
}

fn gaussian_example(_: usize) -> Result<f64> {
    let rows = [10, 10, 10];
    let cols = [15, 15];
    let exact = enumerate_tables(&rows, &cols)?.len() as f64;
    Ok((gaussian_count_estimate(&rows, &cols)? - exact).abs() / exact)
}

fn finite_temperature_count(_: usize) -> Result<f64> {
    let inputs = CountInputs::new(vec![1, 2], 0, vec![2, 1]);
    let mut worst = 0.0f64;
    for lambda in [1usize, 3, 7] {
        let a = asymptotic_count(&inputs, lambda, TemperatureRegime::FiniteT)?;
        let rows: Vec<usize> = (0..lambda).flat_map(|_| [1usize, 2]).collect();
        let b = gaussian_count_estimate(&rows, &[2 * lambda, lambda])?;
        worst = worst.max((a / b - 1.0).abs());
    }
    Ok(worst)
}

fn qubit_full_kraus() -> Result<KinematicLandscape> {
    KinematicLandscape::new(&qubit_state(), &DensityOperator::basis_state(4, 0), &spin_half())
}

fn hessian_count(_: usize) -> Result<f64> {
    let land = qubit_full_kraus()?;
    let u = super::experiments::extremal_unitary(&land, super::config::SearchMode::Ascend)?;
    let idx = hessian_index_at(&land, &u, 1e-4, None)?;
    Ok((idx.n_neg as f64 - 16.0).abs() + idx.n_pos as f64)
}

fn trap_free(_: usize) -> Result<f64> {
    let land = qubit_full_kraus()?;
    let (_, hi) = land.dynamical_range();
    max_of((0..5u64).map(|s| Ok((ascend(&land, &haar_unitary(8, 100 + s), 2000, 1e-10)?.final_value() - hi).abs())))
}

fn lie_rank(_: usize) -> Result<f64> {
    let m = build_model(1.0, 0.21, &EnvironmentSpec::spin(6, 0.37))?;
    Ok((lie_algebra_rank(&m.h0, &m.hc, 1e-9)? as f64 - 144.0).abs())
}

fn model_cases() -> Result<Vec<crate::dynamics::SpinBathModel>> {
    [EnvironmentSpec::spin(3, 1.1), EnvironmentSpec::oscillator(4, 0.8), EnvironmentSpec::oscillator_pair(2, 0.9)]
        .iter()
        .map(|e| build_model(1.0, 0.25, e))
        .collect()
}

fn propagator_unitarity(trials: usize) -> Result<f64> {
    let models = model_cases()?;
    max_of((0..trials).map(|t| {
        let f = ControlField::random(3.0, 30, 0.8, t as u64)?;
        Ok(unitary_residual(&propagate(&models[t % models.len()], &f)?))
    }))
}

fn phase_invariance(trials: usize) -> Result<f64> {
    let models = model_cases()?;
    max_of((0..trials).map(|t| {
        let m = &models[t % models.len()];
        let f = ControlField::random(2.0, 10, 0.5, t as u64)?;
        let env = thermal_state(&m.h_env, 1.0)?.state;
        let a = objective(m, &f, &qubit_state(), &env, &spin_half())?.j;
        let b = objective(&m.with_phase_shift(0.73), &f, &qubit_state(), &env, &spin_half())?.j;
        Ok((a - b).abs())
    }))
}

fn objective_route(trials: usize) -> Result<f64> {
    let models = model_cases()?;
    max_of((0..trials).map(|t| {
        let m = &models[t % models.len()];
        let f = ControlField::random(2.0, 10, 0.5, t as u64)?;
        let env = thermal_state(&m.h_env, 0.7)?.state;
        let a = objective(m, &f, &qubit_state(), &env, &spin_half())?.j;
        let k = kraus_from_unitary(&propagate(m, &f)?, &env)?;
        Ok((a - value_kraus(&k, &qubit_state(), &spin_half())?).abs())
    }))
}

fn reduced_state_valid(trials: usize) -> Result<f64> {
    let models = model_cases()?;
    max_of((0..trials).map(|t| {
        let m = &models[t % models.len()];
        let f = ControlField::random(2.0, 10, 0.5, t as u64)?;
        let env = thermal_state(&m.h_env, 0.7)?.state;
        let red = objective(m, &f, &qubit_state(), &env, &spin_half())?.reduced;
        let trace_err = (red.matrix().trace().re - 1.0).abs();
        Ok(if is_psd(red.matrix(), 1e-9) { trace_err } else { f64::INFINITY })
    }))
}

fn field_gradient_fd(trials: usize) -> Result<f64> {
    let models = model_cases()?;
    max_of((0..trials.min(10)).map(|t| {
        let m = &models[t % models.len()];
        let f = ControlField::random(3.0, 12, 0.6, t as u64)?;
        let env = thermal_state(&m.h_env, 1.0)?.state;
        let rho = qubit_state();
        let g = field_gradient(m, &f, &rho, &env, &spin_half())?;
        let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        let h = 1e-6;
        let mut worst = 0.0f64;
        for k in 0..f.n_slices() {
            let mut plus = f.clone();
            plus.amplitudes[k] += h;
            let mut minus = f.clone();
            minus.amplitudes[k] -= h;
            let fd = (objective(m, &plus, &rho, &env, &spin_half())?.j
                - objective(m, &minus, &rho, &env, &spin_half())?.j)
                / (2.0 * h);
            worst = worst.max((fd - g[k]).abs() / scale);
        }
        Ok(worst)
    }))
}

fn uncoupled_bound(_: usize) -> Result<f64> {
    let m = build_model(1.0, 0.0, &EnvironmentSpec::spin(2, 1.2))?;
    let env = thermal_state(&m.h_env, 1.0)?.state;
    let f0 = ControlField::random(10.0, 50, 0.1, 5)?;
    let opts = CgOptions { max_iters: 60, ..CgOptions::default() };
    let tr = optimize_cg(&m, &f0, &qubit_state(), &env, &spin_half(), &opts)?;
    let bound = 0.2;
    Ok(tr.objective_per_iter.iter().fold(0.0f64, |a, &j| a.max(j - bound)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names = invariant_names();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), CHECKS.len());
    }

    #[test]
    fn compositions_of_three() {
        assert_eq!(compositions(3).len(), 4);
    }
}
