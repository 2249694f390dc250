// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! The kinematic landscape `J(U) = Tr(U P U† Θ)` over the composite unitary
//! group, with `P = ρ ⊗ ϱ` and `Θ = θ ⊗ I_λ`, and its Kraus form
//! `J(K) = Tr(Σ K_{αβ} ρ K_{αβ}† θ)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kraus::{KrausSet, UNITARY_TOL};
use crate::qmath::{
    c, commutator, eigh, expm_anti_hermitian, haar_unitary, identity, is_hermitian, kron,
    trace_product, unitary_residual, ComplexMatrix, DensityOperator,
};
use crate::topology::{spectrum_structure, ContingencyTable};

/// Gradient norm above which a point is not treated as critical.
pub const CRITICAL_GRAD_TOL: f64 = 1e-7;

/// Relative tolerance for grouping degenerate eigenvalues.
pub const GROUPING_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct KinematicLandscape {
    p_op: ComplexMatrix,
    theta_op: ComplexMatrix,
    n_sys: usize,
    n_env: usize,
}

impl KinematicLandscape {
    pub fn new(rho: &DensityOperator, env: &DensityOperator, theta: &ComplexMatrix) -> Result<Self> {
        check_observable(theta, rho.dim())?;
        Ok(Self {
            p_op: kron(rho.matrix(), env.matrix()),
            theta_op: kron(theta, &identity(env.dim())),
            n_sys: rho.dim(),
            n_env: env.dim(),
        })
    }

    pub fn p_op(&self) -> &ComplexMatrix {
        &self.p_op
    }

    pub fn theta_op(&self) -> &ComplexMatrix {
        &self.theta_op
    }

    pub fn dim(&self) -> usize {
        self.n_sys * self.n_env
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn n_env(&self) -> usize {
        self.n_env
    }

    /// `UPU†`.
    fn rotated_state(&self, u: &ComplexMatrix) -> ComplexMatrix {
        u * &self.p_op * u.adjoint()
    }

    fn check_unitary(&self, u: &ComplexMatrix) -> Result<()> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} unitary, got {1}x{2}",
                self.dim(),
                u.nrows(),
                u.ncols()
            )));
        }
        let r = unitary_residual(u);
        if r > UNITARY_TOL {
            return Err(Error::NotUnitary(r));
        }
        Ok(())
    }

    fn value_of_state(&self, state: &ComplexMatrix) -> f64 {
        let v = trace_product(state, &self.theta_op);
        debug_assert!(v.im.abs() <= 1e-10 * (1.0 + v.re.abs()), "imaginary residue {}", v.im);
        v.re
    }

    fn value_unchecked(&self, u: &ComplexMatrix) -> f64 {
        self.value_of_state(&self.rotated_state(u))
    }

    fn gradient_unchecked(&self, u: &ComplexMatrix) -> ComplexMatrix {
        commutator(&self.theta_op, &self.rotated_state(u))
    }
}

fn check_observable(theta: &ComplexMatrix, n: usize) -> Result<()> {
    if theta.nrows() != n || theta.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "observable must be {n}x{n}, got {}x{}",
            theta.nrows(),
            theta.ncols()
        )));
    }
    if !is_hermitian(theta, 1e-10) {
        return Err(Error::NotHermitian(crate::qmath::hermitian_residual(theta)));
    }
    Ok(())
}

pub fn value_unitary(l: &KinematicLandscape, u: &ComplexMatrix) -> Result<f64> {
    l.check_unitary(u)?;
    Ok(l.value_unchecked(u))
}

pub fn value_kraus(k: &KrausSet, rho: &DensityOperator, theta: &ComplexMatrix) -> Result<f64> {
    check_observable(theta, k.n_sys())?;
    let out = k.apply_operator(rho.matrix())?;
    Ok(trace_product(&out, theta).re)
}

/// Riemannian gradient `G = [Θ, UPU†]`.
///
/// `G` is anti-Hermitian, and for `U(ε) = exp(εA)U` with anti-Hermitian `A`
/// the derivative `dJ/dε` at zero equals `Re Tr(A† G)`.
pub fn riemannian_gradient(l: &KinematicLandscape, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    l.check_unitary(u)?;
    Ok(l.gradient_unchecked(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchDirection {
    Ascend,
    Descend,
}

impl SearchDirection {
    fn sign(self) -> f64 {
        match self {
            Self::Ascend => 1.0,
            Self::Descend => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub direction: SearchDirection,
    pub initial_step: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-9,
            direction: SearchDirection::Ascend,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AscentReport {
    pub final_unitary: ComplexMatrix,
    /// `J` before the first step and after every accepted step.
    pub value_trace: Vec<f64>,
    pub gradient_norm_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl AscentReport {
    pub fn final_value(&self) -> f64 {
        *self.value_trace.last().expect("trace holds the initial value")
    }

    pub fn final_gradient_norm(&self) -> f64 {
        *self.gradient_norm_trace.last().expect("trace holds the initial gradient")
    }
}

pub fn ascend(l: &KinematicLandscape, u0: &ComplexMatrix, max_iters: usize, grad_tol: f64) -> Result<AscentReport> {
    search(l, u0, &AscentOptions { max_iters, grad_tol, ..AscentOptions::default() })
}

pub fn descend(l: &KinematicLandscape, u0: &ComplexMatrix, max_iters: usize, grad_tol: f64) -> Result<AscentReport> {
    search(
        l,
        u0,
        &AscentOptions { max_iters, grad_tol, direction: SearchDirection::Descend, ..AscentOptions::default() },
    )
}

/// Gradient flow with exponential retraction `U ← exp(±ηG) U` and an Armijo
/// backtracking line search.
pub fn search(l: &KinematicLandscape, u0: &ComplexMatrix, opts: &AscentOptions) -> Result<AscentReport> {
    l.check_unitary(u0)?;
    let sign = opts.direction.sign();
    let mut u = u0.clone();
    let mut value = l.value_unchecked(&u);
    let mut grad = l.gradient_unchecked(&u);
    let mut gnorm = grad.norm();
    let mut value_trace = vec![value];
    let mut gradient_norm_trace = vec![gnorm];
    let mut iterations = 0;
    let mut converged = gnorm <= opts.grad_tol;

    while !converged && iterations < opts.max_iters {
        let mut step = opts.initial_step;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = expm_anti_hermitian(&(&grad * c(sign * step, 0.0)))? * &u;
            let v = l.value_unchecked(&trial);
            if sign * (v - value) >= opts.armijo * step * gnorm * gnorm {
                accepted = Some((trial, v));
                break;
            }
            step *= opts.shrink;
        }
        let Some((next, v)) = accepted else { break };
        u = next;
        value = v;
        grad = l.gradient_unchecked(&u);
        gnorm = grad.norm();
        iterations += 1;
        value_trace.push(value);
        gradient_norm_trace.push(gnorm);
        converged = gnorm <= opts.grad_tol;
    }

    Ok(AscentReport { final_unitary: u, value_trace, gradient_norm_trace, iterations, converged })
}

/// Independent searches from Haar-random starts, one per seed, returned in
/// seed order.
pub fn multi_start(l: &KinematicLandscape, seeds: &[u64], opts: &AscentOptions) -> Result<Vec<AscentReport>> {
    seeds
        .par_iter()
        .map(|&s| search(l, &haar_unitary(l.dim(), s), opts))
        .collect()
}

/// Orthonormal basis of anti-Hermitian `n×n` matrices under `Re Tr(A†B)`.
pub fn anti_hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(a, a)] = c(0.0, 1.0);
        out.push(m);
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(a, b)] = c(s, 0.0);
            m[(b, a)] = c(-s, 0.0);
            out.push(m);
            let mut m = ComplexMatrix::zeros(n, n);
            m[(a, b)] = c(0.0, s);
            m[(b, a)] = c(0.0, s);
            out.push(m);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct HessianIndex {
    pub n_neg: usize,
    pub n_pos: usize,
    pub n_zero: usize,
    /// Hessian eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub zero_tol: f64,
}

/// Signature of the finite-difference Hessian of `J(exp(X) U)` over the
/// `(λN)²` canonical anti-Hermitian directions.
///
/// `zero_tol = None` selects `1e-6 · max|μ|`.
pub fn hessian_index_at(
    l: &KinematicLandscape,
    u: &ComplexMatrix,
    fd_step: f64,
    zero_tol: Option<f64>,
) -> Result<HessianIndex> {
    l.check_unitary(u)?;
    let gnorm = l.gradient_unchecked(u).norm();
    if gnorm > CRITICAL_GRAD_TOL {
        return Err(Error::NotCritical(gnorm));
    }
    let state = l.rotated_state(u);
    let basis = anti_hermitian_basis(l.dim());
    let m = basis.len();
    let h = fd_step;
    let eval = |x: &ComplexMatrix| -> Result<f64> {
        let e = expm_anti_hermitian(x)?;
        Ok(l.value_of_state(&(&e * &state * e.adjoint())))
    };
    let j0 = l.value_of_state(&state);

    let diag: Vec<f64> = basis
        .par_iter()
        .map(|a| {
            let plus = eval(&(a * c(h, 0.0)))?;
            let minus = eval(&(a * c(-h, 0.0)))?;
            Ok((plus - 2.0 * j0 + minus) / (h * h))
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| ((a + 1)..m).map(move |b| (a, b))).collect();
    let off: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (x, y) = (&basis[a], &basis[b]);
            let pp = eval(&((x + y) * c(h, 0.0)))?;
            let pm = eval(&((x - y) * c(h, 0.0)))?;
            let mp = eval(&((y - x) * c(h, 0.0)))?;
            let mm = eval(&((x + y) * c(-h, 0.0)))?;
            Ok((pp - pm - mp + mm) / (4.0 * h * h))
        })
        .collect::<Result<_>>()?;

    let mut hess = DMatrix::<f64>::zeros(m, m);
    for (a, d) in diag.iter().enumerate() {
        hess[(a, a)] = *d;
    }
    for (&(a, b), v) in pairs.iter().zip(&off) {
        hess[(a, b)] = *v;
        hess[(b, a)] = *v;
    }
    let mut eigenvalues: Vec<f64> = hess.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let scale = eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = zero_tol.unwrap_or(1e-6 * scale);
    let n_neg = eigenvalues.iter().filter(|&&v| v < -tol).count();
    let n_pos = eigenvalues.iter().filter(|&&v| v > tol).count();
    Ok(HessianIndex { n_neg, n_pos, n_zero: m - n_neg - n_pos, eigenvalues, zero_tol: tol })
}

fn sorted_pairing(p: &[f64], theta: &[f64]) -> (f64, f64) {
    let mut p = p.to_vec();
    let mut t = theta.to_vec();
    p.sort_by(|a, b| b.total_cmp(a));
    t.sort_by(|a, b| b.total_cmp(a));
    let max = p.iter().zip(&t).map(|(a, b)| a * b).sum();
    let min = p.iter().rev().zip(&t).map(|(a, b)| a * b).sum();
    (min, max)
}

/// `(J_min, J_max)` from sorted pairing of the spectra of `ρ⊗ϱ` and `θ⊗I_λ`.
pub fn dynamical_range(
    rho: &DensityOperator,
    env: &DensityOperator,
    theta: &ComplexMatrix,
) -> Result<(f64, f64)> {
    check_observable(theta, rho.dim())?;
    let p = rho.spectrum().values;
    let q = env.spectrum().values;
    let products: Vec<f64> = p.iter().flat_map(|a| q.iter().map(move |b| a * b)).collect();
    let lambda = env.dim();
    let obs: Vec<f64> = eigh(theta)?
        .values
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, lambda))
        .collect();
    Ok(sorted_pairing(&products, &obs))
}

impl KinematicLandscape {
    pub fn dynamical_range(&self) -> (f64, f64) {
        let p = eigh(&self.p_op).expect("P is Hermitian").values;
        let t = eigh(&self.theta_op).expect("Θ is Hermitian").values;
        sorted_pairing(&p, &t)
    }
}

/// Unitary whose rotated state `UPU†` realizes the given table: for each cell
/// `c_ij`, `c_ij` eigenvectors from the `i`-th eigenvalue group of `P` are sent
/// into the `j`-th eigenspace of `Θ`.
pub fn critical_point_from_table(l: &KinematicLandscape, t: &ContingencyTable) -> Result<ComplexMatrix> {
    let p_spec = eigh(&l.p_op)?;
    let t_spec = eigh(&l.theta_op)?;
    let p_groups = spectrum_structure(&l.p_op, GROUPING_REL_TOL)?;
    let t_groups = spectrum_structure(&l.theta_op, GROUPING_REL_TOL)?;
    if t.row_sums() != p_groups.mults || t.col_sums() != t_groups.mults {
        return Err(Error::MarginalMismatch(format!(
            "table margins {:?}/{:?} do not match spectra {:?}/{:?}",
            t.row_sums(),
            t.col_sums(),
            p_groups.mults,
            t_groups.mults
        )));
    }
    let offsets = |mults: &[usize]| -> Vec<usize> {
        mults
            .iter()
            .scan(0, |acc, &m| {
                let start = *acc;
                *acc += m;
                Some(start)
            })
            .collect()
    };
    let p_start = offsets(&p_groups.mults);
    let mut t_cursor = offsets(&t_groups.mults);

    let n = l.dim();
    let mut u = ComplexMatrix::zeros(n, n);
    for i in 0..t.rows() {
        let mut p_idx = p_start[i];
        for (j, cursor) in t_cursor.iter_mut().enumerate() {
            for _ in 0..t.get(i, j) {
                // |θ_b⟩⟨p_a|
                let pa = p_spec.vectors.column(p_idx);
                let tb = t_spec.vectors.column(*cursor);
                u += tb * pa.adjoint();
                p_idx += 1;
                *cursor += 1;
            }
        }
    }
    Ok(u)
}
