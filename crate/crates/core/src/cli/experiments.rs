// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use super::config::{DynamicConfig, KinematicConfig, RangeSweepConfig, SearchMode, Temperature, TopologyConfig};
use super::format_g12;
use crate::dynamics::{build_model, optimize_cg, thermal_state, CgOptions, ControlField, OptimizationTrace};
use crate::error::{Error, Result};
use crate::landscape::{
    critical_point_from_table, dynamical_range, multi_start, search, AscentOptions, AscentReport,
    KinematicLandscape, SearchDirection, GROUPING_REL_TOL,
};
use crate::qmath::{diag_real, DensityOperator};
use crate::topology::{
    composite_marginals, count_pure_env, critical_values, enumerate_tables_capped, gaussian_count_estimate,
    hessian_count_global, spectrum_structure, ContingencyTable, SpectrumStructure, DEGENERACY_REL_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeRow {
    pub environment: String,
    pub temperature: Temperature,
    pub j_min: f64,
    pub j_max: f64,
    pub delta_j: f64,
}

/// Dynamical range for every (temperature, environment) pair, ordered by
/// temperature and then by environment.
pub fn range_sweep(cfg: &RangeSweepConfig) -> Result<Vec<RangeRow>> {
    let rho = DensityOperator::from_populations(&cfg.populations)?;
    let theta = diag_real(&cfg.theta);
    let hamiltonians = cfg.environments.iter().map(|e| e.hamiltonian()).collect::<Result<Vec<_>>>()?;
    let points: Vec<(Temperature, usize)> = cfg
        .temperatures
        .iter()
        .flat_map(|&t| (0..cfg.environments.len()).map(move |e| (t, e)))
        .collect();
    points
        .par_iter()
        .map(|&(t, e)| {
            let env = thermal_state(&hamiltonians[e], t.0)?.state;
            let (j_min, j_max) = dynamical_range(&rho, &env, &theta)?;
            Ok(RangeRow { environment: cfg.environments[e].label(), temperature: t, j_min, j_max, delta_j: j_max - j_min })
        })
        .collect()
}

pub fn write_range_csv<W: Write>(rows: &[RangeRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["environment", "temperature", "j_min", "j_max", "delta_j"])?;
    for r in rows {
        w.write_record([
            r.environment.clone(),
            format_g12(r.temperature.0),
            format_g12(r.j_min),
            format_g12(r.j_max),
            format_g12(r.delta_j),
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologyReport {
    pub row_values: Option<Vec<f64>>,
    pub row_sums: Vec<usize>,
    pub col_values: Option<Vec<f64>>,
    pub col_sums: Vec<usize>,
    /// `None` when the enumeration cap was hit.
    pub exact_count: Option<usize>,
    pub cap_exceeded: bool,
    pub critical_values: Option<Vec<f64>>,
    /// Closed-form count, available for a pure environment.
    pub closed_form_count: Option<u128>,
    pub hessian_negative_count: Option<u64>,
    pub gaussian_estimate: Option<f64>,
    pub gaussian_relative_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<Vec<Vec<usize>>>>,
}

fn structure(values: &[f64]) -> SpectrumStructure {
    SpectrumStructure::from_values(values, DEGENERACY_REL_TOL)
}

pub fn topology_report(cfg: &TopologyConfig) -> Result<TopologyReport> {
    let (row_values, row_sums, col_values, col_sums, closed_form, hessian) = match &cfg.margins {
        Some(m) => (None, m.rows.clone(), None, m.cols.clone(), None, None),
        None => {
            let sys = structure(&cfg.populations);
            let env = structure(&cfg.env_populations);
            let theta = structure(&cfg.theta);
            let lambda = cfg.env_populations.len();
            let marg = composite_marginals(&sys, &env, &theta, lambda)?;
            let sys_nz: Vec<usize> = sys.nonzero().iter().map(|&(_, d)| d).collect();
            let env_pure = env.nonzero().iter().map(|&(_, f)| f).collect::<Vec<_>>() == [1];
            let closed_form = if env_pure { Some(count_pure_env(&sys_nz, theta.len())?) } else { None };
            let hessian = hessian_count_global(sys.total_dim, sys.zero_mult(), theta.mults[0]).ok();
            (Some(marg.row_values), marg.row_sums, Some(marg.col_values), marg.col_sums, closed_form, hessian)
        }
    };
    let enumerated = match enumerate_tables_capped(&row_sums, &col_sums, cfg.table_cap) {
        Ok(t) => Some(t),
        Err(Error::EnumerationCap(_)) => None,
        Err(e) => return Err(e),
    };
    let crit = match (&enumerated, &row_values, &col_values) {
        (Some(tables), Some(rv), Some(cv)) => {
            let m = crate::topology::CompositeMarginals {
                row_values: rv.clone(),
                row_sums: row_sums.clone(),
                col_values: cv.clone(),
                col_sums: col_sums.clone(),
            };
            Some(critical_values(&m, tables)?)
        }
        _ => None,
    };
    let exact = enumerated.as_ref().map(Vec::len);
    let estimate = gaussian_count_estimate(&row_sums, &col_sums).ok();
    let rel = match (exact, estimate) {
        (Some(n), Some(a)) if n > 0 => Some((a - n as f64).abs() / n as f64),
        _ => None,
    };
    let tables = if cfg.include_tables {
        enumerated.as_ref().map(|ts| ts.iter().map(ContingencyTable::to_rows).collect())
    } else {
        None
    };
    Ok(TopologyReport {
        row_values,
        row_sums,
        col_values,
        col_sums,
        exact_count: exact,
        cap_exceeded: enumerated.is_none(),
        critical_values: crit,
        closed_form_count: closed_form,
        hessian_negative_count: hessian,
        gaussian_estimate: estimate,
        gaussian_relative_error: rel,
        tables,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StartResult {
    pub seed: Option<u64>,
    pub final_j: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KinematicReport {
    pub mode: SearchMode,
    pub j_min: f64,
    pub j_max: f64,
    pub target: f64,
    pub tolerance: f64,
    pub trap_free: bool,
    pub starts: Vec<StartResult>,
}

/// Unitary realizing the extremal table of the landscape.
pub fn extremal_unitary(l: &KinematicLandscape, mode: SearchMode) -> Result<nalgebra::DMatrix<crate::C64>> {
    let p = spectrum_structure(l.p_op(), GROUPING_REL_TOL)?;
    let t = spectrum_structure(l.theta_op(), GROUPING_REL_TOL)?;
    let tables = enumerate_tables_capped(&p.mults, &t.mults, crate::topology::DEFAULT_TABLE_CAP)?;
    let value = |tab: &ContingencyTable| tab.weighted_value(&p.values, &t.values);
    let best = match mode {
        SearchMode::Ascend => tables.iter().max_by(|a, b| value(a).total_cmp(&value(b))),
        SearchMode::Descend => tables.iter().min_by(|a, b| value(a).total_cmp(&value(b))),
    };
    critical_point_from_table(l, best.expect("at least one table exists"))
}

pub fn kinematic_search(cfg: &KinematicConfig, seed: u64) -> Result<KinematicReport> {
    let rho = DensityOperator::from_populations(&cfg.populations)?;
    let env = DensityOperator::from_populations(&cfg.env_populations)?;
    let l = KinematicLandscape::new(&rho, &env, &diag_real(&cfg.theta))?;
    let (j_min, j_max) = l.dynamical_range();
    let direction = match cfg.mode {
        SearchMode::Ascend => SearchDirection::Ascend,
        SearchMode::Descend => SearchDirection::Descend,
    };
    let opts = AscentOptions { max_iters: cfg.max_iters, grad_tol: cfg.grad_tol, direction, ..AscentOptions::default() };
    let seeds: Vec<u64> = (0..cfg.n_starts as u64).map(|i| seed.wrapping_add(i)).collect();
    let reports: Vec<AscentReport> = if cfg.start_from_optimum {
        let u0 = extremal_unitary(&l, cfg.mode)?;
        (0..cfg.n_starts).map(|_| search(&l, &u0, &opts)).collect::<Result<_>>()?
    } else {
        multi_start(&l, &seeds, &opts)?
    };
    let target = match cfg.mode {
        SearchMode::Ascend => j_max,
        SearchMode::Descend => j_min,
    };
    let starts: Vec<StartResult> = reports
        .iter()
        .zip(&seeds)
        .map(|(r, &s)| StartResult {
            seed: (!cfg.start_from_optimum).then_some(s),
            final_j: r.final_value(),
            gradient_norm: r.final_gradient_norm(),
            iterations: r.iterations,
            converged: r.converged,
        })
        .collect();
    let trap_free = starts.iter().all(|s| (s.final_j - target).abs() <= cfg.tolerance);
    Ok(KinematicReport { mode: cfg.mode, j_min, j_max, target, tolerance: cfg.tolerance, trap_free, starts })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub gamma: f64,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub initial_entropy: f64,
    pub final_entropy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_gradient_norm: f64,
    pub final_reduced_populations: Vec<f64>,
    /// Angular frequency of the largest non-DC Fourier component of the
    /// optimized field; absent for zero duration or a single slice.
    pub dominant_angular_frequency: Option<f64>,
    #[serde(skip)]
    pub trace: Option<OptimizationTrace>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicReport {
    pub environment: String,
    pub temperature: Temperature,
    /// Best value reachable by unitary control of the system alone.
    pub closed_system_bound: f64,
    pub kinematic_j_min: f64,
    pub kinematic_j_max: f64,
    pub runs: Vec<RunSummary>,
}

pub fn dominant_angular_frequency(f: &ControlField) -> Option<f64> {
    let n = f.n_slices();
    if n < 2 || f.t_final <= 0.0 {
        return None;
    }
    let mut buf: Vec<Complex<f64>> = f.amplitudes.iter().map(|&a| Complex::new(a, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let k = (1..=n / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()).then(b.cmp(&a)))?;
    Some(2.0 * std::f64::consts::PI * k as f64 / f.t_final)
}

pub fn dynamic_optimize(cfg: &DynamicConfig, seed: u64) -> Result<DynamicReport> {
    let rho = DensityOperator::from_populations(&cfg.populations)?;
    let theta = diag_real(&cfg.theta);
    let coupled = build_model(cfg.omega0, cfg.gamma, &cfg.environment)?;
    let env_state = thermal_state(&coupled.h_env, cfg.temperature.0)?.state;
    let f0 = ControlField::random(cfg.t_final, cfg.n_slices, cfg.initial_amplitude, seed)?;
    let (_, closed_system_bound) = dynamical_range(&rho, &DensityOperator::maximally_mixed(1), &theta)?;
    let (kinematic_j_min, kinematic_j_max) = dynamical_range(&rho, &env_state, &theta)?;

    let mut models = vec![("coupled", coupled)];
    if cfg.baseline {
        models.push(("uncoupled", build_model(cfg.omega0, 0.0, &cfg.environment)?));
    }
    let opts = CgOptions { max_iters: cfg.max_iters, grad_tol: cfg.grad_tol, ..CgOptions::default() };
    let runs = models
        .par_iter()
        .map(|(label, m)| {
            let trace = optimize_cg(m, &f0, &rho, &env_state, &theta, &opts)?;
            let pops = trace.final_reduced_state.matrix().diagonal().iter().map(|z| z.re).collect();
            Ok(RunSummary {
                label: label.to_string(),
                gamma: m.gamma,
                initial_objective: trace.objective_per_iter[0],
                final_objective: trace.final_objective(),
                initial_entropy: trace.entropy_per_iter[0],
                final_entropy: trace.final_entropy(),
                iterations: trace.iterations,
                converged: trace.converged,
                final_gradient_norm: *trace.gradient_norm_per_iter.last().expect("non-empty"),
                final_reduced_populations: pops,
                dominant_angular_frequency: dominant_angular_frequency(&trace.final_field),
                trace: Some(trace),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DynamicReport {
        environment: cfg.environment.label(),
        temperature: cfg.temperature,
        closed_system_bound,
        kinematic_j_min,
        kinematic_j_max,
        runs,
    })
}

/// Columns `run,iteration,objective,entropy,gradient_norm`.
pub fn write_trace_csv<W: Write>(report: &DynamicReport, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run", "iteration", "objective", "entropy", "gradient_norm"])?;
    for run in &report.runs {
        let Some(tr) = &run.trace else { continue };
        for (i, ((j, s), g)) in
            tr.objective_per_iter.iter().zip(&tr.entropy_per_iter).zip(&tr.gradient_norm_per_iter).enumerate()
        {
            w.write_record([run.label.clone(), i.to_string(), format_g12(*j), format_g12(*s), format_g12(*g)])?;
        }
    }
    w.flush()
}

/// Columns `run,slice,time,amplitude`; time is the slice midpoint.
pub fn write_field_csv<W: Write>(report: &DynamicReport, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run", "slice", "time", "amplitude"])?;
    for run in &report.runs {
        let Some(tr) = &run.trace else { continue };
        let f = &tr.final_field;
        for (k, (t, a)) in f.times().iter().zip(&f.amplitudes).enumerate() {
            w.write_record([run.label.clone(), k.to_string(), format_g12(*t), format_g12(*a)])?;
        }
    }
    w.flush()
}
