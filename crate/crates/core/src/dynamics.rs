// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! A spin-1/2 system coupled to a spin or oscillator bath, driven by a
//! piecewise-constant field on the system alone:
//!
//! `H(t) = ω₀ σ_z⊗I + I⊗H_E + γ V + ε(t) σ_x⊗I`
//!
//! The system operators are the spin-1/2 matrices `σ_α = Pauli_α / 2`, so the
//! observable `σ_z` has eigenvalues `±1/2`. For a spin bath `H_E = ω_e J_z`
//! and `V = Σ σ_α⊗J_α`; for oscillator baths `H_E = ω_e Σ (n + 1/2)` and
//! `V = σ_x ⊗ Σ (a + a†)`. Units have `ħ = k = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    c, commutator, eigh, identity, inner, kron, partial_trace_env, trace_product,
    von_neumann_entropy, ComplexMatrix, DensityOperator, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    Spin,
    Oscillator,
    OscillatorPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub kind: EnvironmentKind,
    /// Hilbert-space dimension `λ`.
    pub dim: usize,
    pub omega_e: f64,
    /// Levels kept per oscillator mode; equals `dim` for spin baths.
    pub truncation: usize,
}

impl EnvironmentSpec {
    pub fn spin(dim: usize, omega_e: f64) -> Self {
        Self { kind: EnvironmentKind::Spin, dim, omega_e, truncation: dim }
    }

    pub fn oscillator(truncation: usize, omega_e: f64) -> Self {
        Self { kind: EnvironmentKind::Oscillator, dim: truncation, omega_e, truncation }
    }

    pub fn oscillator_pair(truncation: usize, omega_e: f64) -> Self {
        Self { kind: EnvironmentKind::OscillatorPair, dim: truncation * truncation, omega_e, truncation }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            EnvironmentKind::Spin => self.dim >= 1,
            EnvironmentKind::Oscillator => self.dim >= 1 && self.dim == self.truncation,
            EnvironmentKind::OscillatorPair => self.truncation >= 1 && self.dim == self.truncation * self.truncation,
        };
        if !ok || !self.omega_e.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid environment {self:?}")));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self.kind {
            EnvironmentKind::Spin => format!("spin{}", self.dim),
            EnvironmentKind::Oscillator => format!("oscillator{}", self.truncation),
            EnvironmentKind::OscillatorPair => format!("oscillator_pair{}", self.truncation),
        }
    }

    /// Bare environment Hamiltonian `H_E`.
    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        self.validate()?;
        Ok(match self.kind {
            EnvironmentKind::Spin => spin_matrices(self.dim)[2].clone() * c(self.omega_e, 0.0),
            EnvironmentKind::Oscillator => number_plus_half(self.truncation) * c(self.omega_e, 0.0),
            EnvironmentKind::OscillatorPair => {
                let h = number_plus_half(self.truncation);
                let id = identity(self.truncation);
                (kron(&h, &id) + kron(&id, &h)) * c(self.omega_e, 0.0)
            }
        })
    }
}

/// Irreducible angular-momentum matrices `(J_x, J_y, J_z)` of dimension `dim`,
/// `j = (dim − 1)/2`, basis ordered `m = j, j−1, …, −j`.
pub fn spin_matrices(dim: usize) -> [ComplexMatrix; 3] {
    let j = (dim as f64 - 1.0) / 2.0;
    let m = |k: usize| j - k as f64;
    let mut jp = ComplexMatrix::zeros(dim, dim);
    for k in 1..dim {
        // J+ |m⟩ = sqrt(j(j+1) − m(m+1)) |m+1⟩
        let mk = m(k);
        jp[(k - 1, k)] = c((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * c(0.5, 0.0);
    let jy = (&jp - &jm) * c(0.0, -0.5);
    let jz = ComplexMatrix::from_fn(dim, dim, |a, b| if a == b { c(m(a), 0.0) } else { c(0.0, 0.0) });
    [jx, jy, jz]
}

/// Truncated annihilation operator on `levels` Fock states.
pub fn annihilation(levels: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(levels, levels, |a, b| {
        if b == a + 1 {
            c((b as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

fn number_plus_half(levels: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(levels, levels, |a, b| if a == b { c(a as f64 + 0.5, 0.0) } else { c(0.0, 0.0) })
}

#[derive(Debug, Clone)]
pub struct SpinBathModel {
    pub omega0: f64,
    pub gamma: f64,
    pub env: EnvironmentSpec,
    /// Drift on the composite space, dimension `2λ`.
    pub h0: ComplexMatrix,
    /// Control operator `σ_x ⊗ I_λ`.
    pub hc: ComplexMatrix,
    pub h_env: ComplexMatrix,
}

impl SpinBathModel {
    pub fn dim(&self) -> usize {
        2 * self.env.dim
    }

    pub fn n_env(&self) -> usize {
        self.env.dim
    }

    /// Same model with an extra multiple of the identity in the drift.
    pub fn with_phase_shift(&self, shift: f64) -> Self {
        let mut m = self.clone();
        m.h0 += identity(self.dim()) * c(shift, 0.0);
        m
    }
}

pub fn build_model(omega0: f64, gamma: f64, env: &EnvironmentSpec) -> Result<SpinBathModel> {
    env.validate()?;
    if !omega0.is_finite() || !gamma.is_finite() {
        return Err(Error::InvalidArgument("non-finite model parameter".into()));
    }
    let sys = spin_matrices(2);
    let lambda = env.dim;
    let id_env = identity(lambda);
    let h_env = env.hamiltonian()?;
    let coupling = match env.kind {
        EnvironmentKind::Spin => {
            let bath = spin_matrices(lambda);
            sys.iter().zip(bath.iter()).map(|(s, j)| kron(s, j)).fold(ComplexMatrix::zeros(2 * lambda, 2 * lambda), |a, b| a + b)
        }
        EnvironmentKind::Oscillator => {
            let a = annihilation(env.truncation);
            kron(&sys[0], &(&a + a.adjoint()))
        }
        EnvironmentKind::OscillatorPair => {
            let a = annihilation(env.truncation);
            let x = &a + a.adjoint();
            let id = identity(env.truncation);
            kron(&sys[0], &(kron(&x, &id) + kron(&id, &x)))
        }
    };
    let h0 = kron(&sys[2], &id_env) * c(omega0, 0.0) + kron(&identity(2), &h_env) + coupling * c(gamma, 0.0);
    let hc = kron(&sys[0], &id_env);
    Ok(SpinBathModel { omega0, gamma, env: env.clone(), h0, hc, h_env })
}

#[derive(Debug, Clone)]
pub struct ThermalState {
    pub state: DensityOperator,
    /// Dimension of the ground space, relevant at zero temperature.
    pub ground_degeneracy: usize,
}

/// Gibbs state `exp(−H/T)/Z`. `T = 0` gives the normalized ground-space
/// projector and `T = ∞` the maximally mixed state.
pub fn thermal_state(h_env: &ComplexMatrix, temperature: f64) -> Result<ThermalState> {
    if temperature.is_nan() || temperature < 0.0 {
        return Err(Error::InvalidArgument(format!("temperature {temperature}")));
    }
    let spec = eigh(h_env)?;
    let n = spec.values.len();
    let e_min = *spec.values.last().expect("non-empty spectrum");
    let scale = spec.values[0].abs().max(e_min.abs()).max(1.0);
    let ground_degeneracy = spec.values.iter().filter(|&&e| e - e_min <= 1e-10 * scale).count();
    let weights: Vec<f64> = if temperature == f64::INFINITY {
        vec![1.0; n]
    } else if temperature == 0.0 {
        spec.values.iter().map(|&e| if e - e_min <= 1e-10 * scale { 1.0 } else { 0.0 }).collect()
    } else {
        spec.values.iter().map(|&e| (-(e - e_min) / temperature).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    let v = &spec.vectors;
    let scaled = ComplexMatrix::from_fn(n, n, |a, b| v[(a, b)] * c(weights[b] / z, 0.0));
    let m = scaled * v.adjoint();
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    Ok(ThermalState { state: DensityOperator::with_tolerance(m, 1e-9)?, ground_degeneracy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    pub t_final: f64,
    pub amplitudes: Vec<f64>,
}

impl ControlField {
    pub fn new(t_final: f64, amplitudes: Vec<f64>) -> Result<Self> {
        if !(t_final >= 0.0 && t_final.is_finite()) || amplitudes.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "field needs t_final >= 0 and at least one slice (t_final={t_final}, slices={})",
                amplitudes.len()
            )));
        }
        Ok(Self { t_final, amplitudes })
    }

    pub fn constant(t_final: f64, n_slices: usize, value: f64) -> Result<Self> {
        Self::new(t_final, vec![value; n_slices])
    }

    /// Uniform random amplitudes in `[−amplitude, amplitude]`.
    pub fn random(t_final: f64, n_slices: usize, amplitude: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..n_slices).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
        Self::new(t_final, amps)
    }

    pub fn n_slices(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.amplitudes.len() as f64
    }

    /// Slice midpoints.
    pub fn times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.n_slices()).map(|k| (k as f64 + 0.5) * dt).collect()
    }
}

/// Eigen-decomposed slice propagator `exp(−i H_k Δt)`.
struct Slice {
    energies: Vec<f64>,
    vectors: ComplexMatrix,
    unitary: ComplexMatrix,
}

fn slices(m: &SpinBathModel, f: &ControlField) -> Result<Vec<Slice>> {
    let dt = f.dt();
    f.amplitudes
        .iter()
        .map(|&eps| {
            let spec = eigh(&(&m.h0 + &m.hc * c(eps, 0.0)))?;
            let unitary = spec.map_complex(|e| C64::from_polar(1.0, -e * dt));
            Ok(Slice { energies: spec.values, vectors: spec.vectors, unitary })
        })
        .collect()
}

/// `U = U_n ⋯ U_1`, `U_k = exp(−i (H₀ + ε_k H_c) Δt)`.
pub fn propagate(m: &SpinBathModel, f: &ControlField) -> Result<ComplexMatrix> {
    Ok(slices(m, f)?.iter().fold(identity(m.dim()), |u, s| &s.unitary * u))
}

fn check_dims(m: &SpinBathModel, rho: &DensityOperator, env_state: &DensityOperator, theta: &ComplexMatrix) -> Result<()> {
    if rho.dim() != 2 || env_state.dim() != m.n_env() || theta.nrows() != 2 || theta.ncols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "model expects a qubit state, qubit observable and {}-dim environment",
            m.n_env()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ObjectiveValue {
    pub j: f64,
    pub reduced: DensityOperator,
    pub entropy: f64,
}

pub fn objective(
    m: &SpinBathModel,
    f: &ControlField,
    rho: &DensityOperator,
    env_state: &DensityOperator,
    theta: &ComplexMatrix,
) -> Result<ObjectiveValue> {
    check_dims(m, rho, env_state, theta)?;
    let u = propagate(m, f)?;
    let total = &u * kron(rho.matrix(), env_state.matrix()) * u.adjoint();
    let big_theta = kron(theta, &identity(m.n_env()));
    let j = trace_product(&total, &big_theta).re;
    let reduced = partial_trace_env(&total, 2, m.n_env())?;
    let reduced = DensityOperator::with_tolerance((&reduced + reduced.adjoint()) * c(0.5, 0.0), 1e-9)?;
    let entropy = von_neumann_entropy(&reduced);
    Ok(ObjectiveValue { j, reduced, entropy })
}

/// Exact `∂J/∂ε_k` for every slice.
///
/// The derivative of `exp(−i Δt H)` along `H_c` is evaluated in the eigenbasis
/// of `H`: `dU = V (Ĥ_c ∘ Φ) V†` with
/// `Φ_ab = −iΔt · exp(−iΔt(e_a+e_b)/2) · sinc(Δt(e_a−e_b)/2)`.
pub fn field_gradient(
    m: &SpinBathModel,
    f: &ControlField,
    rho: &DensityOperator,
    env_state: &DensityOperator,
    theta: &ComplexMatrix,
) -> Result<Vec<f64>> {
    Ok(value_and_gradient(m, f, rho, env_state, theta)?.1)
}

fn value_and_gradient(
    m: &SpinBathModel,
    f: &ControlField,
    rho: &DensityOperator,
    env_state: &DensityOperator,
    theta: &ComplexMatrix,
) -> Result<(f64, Vec<f64>)> {
    check_dims(m, rho, env_state, theta)?;
    let dt = f.dt();
    let sl = slices(m, f)?;
    let n = sl.len();

    // forward[k] is the state before slice k
    let mut forward = Vec::with_capacity(n + 1);
    forward.push(kron(rho.matrix(), env_state.matrix()));
    for s in &sl {
        let prev = forward.last().expect("non-empty");
        forward.push(&s.unitary * prev * s.unitary.adjoint());
    }
    let big_theta = kron(theta, &identity(m.n_env()));
    let j = trace_product(&forward[n], &big_theta).re;

    let mut grad = vec![0.0; n];
    let mut back = big_theta;
    for k in (0..n).rev() {
        let s = &sl[k];
        let hc_eig = s.vectors.adjoint() * &m.hc * &s.vectors;
        let dim = s.energies.len();
        let mut inner_m = hc_eig;
        for a in 0..dim {
            for b in 0..dim {
                let (ea, eb) = (s.energies[a], s.energies[b]);
                let x = 0.5 * dt * (ea - eb);
                let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                let phi = C64::from_polar(1.0, -0.5 * dt * (ea + eb)) * c(0.0, -dt * sinc);
                inner_m[(a, b)] *= phi;
            }
        }
        let du = &s.vectors * inner_m * s.vectors.adjoint();
        // dJ = 2 Re Tr(dU ρ_{k} U_k† Λ_{k+1})
        let t = du * &forward[k] * s.unitary.adjoint();
        grad[k] = 2.0 * trace_product(&t, &back).re;
        back = s.unitary.adjoint() * back * &s.unitary;
    }
    Ok((j, grad))
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Restart period; `None` uses the number of slices.
    pub restart_every: Option<usize>,
    pub max_halvings: usize,
    pub armijo: f64,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { max_iters: 300, grad_tol: 1e-8, restart_every: None, max_halvings: 40, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    /// Objective at the start and after every accepted iteration.
    pub objective_per_iter: Vec<f64>,
    pub entropy_per_iter: Vec<f64>,
    pub gradient_norm_per_iter: Vec<f64>,
    pub final_field: ControlField,
    pub final_reduced_state: DensityOperator,
    pub iterations: usize,
    pub converged: bool,
}

impl OptimizationTrace {
    pub fn final_objective(&self) -> f64 {
        *self.objective_per_iter.last().expect("trace holds the initial value")
    }

    pub fn final_entropy(&self) -> f64 {
        *self.entropy_per_iter.last().expect("trace holds the initial value")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Polak–Ribière (non-negative) conjugate-gradient ascent on the slice
/// amplitudes with Armijo backtracking.
pub fn optimize_cg(
    m: &SpinBathModel,
    f0: &ControlField,
    rho: &DensityOperator,
    env_state: &DensityOperator,
    theta: &ComplexMatrix,
    opts: &CgOptions,
) -> Result<OptimizationTrace> {
    let restart = opts.restart_every.unwrap_or(f0.n_slices()).max(1);
    let mut field = f0.clone();
    let (mut value, mut grad) = value_and_gradient(m, &field, rho, env_state, theta)?;
    let first = objective(m, &field, rho, env_state, theta)?;
    let mut objective_per_iter = vec![value];
    let mut entropy_per_iter = vec![first.entropy];
    let mut gnorm = dot(&grad, &grad).sqrt();
    let mut gradient_norm_per_iter = vec![gnorm];
    let mut reduced = first.reduced;

    let mut dir = grad.clone();
    let mut step_hint = 1.0 / grad.iter().fold(0.0f64, |a, g| a.max(g.abs())).max(1e-12);
    let mut since_restart = 0;
    let mut iterations = 0;
    let mut converged = gnorm <= opts.grad_tol;

    while !converged && iterations < opts.max_iters {
        let mut slope = dot(&grad, &dir);
        if slope <= 0.0 || since_restart >= restart {
            dir = grad.clone();
            slope = gnorm * gnorm;
            since_restart = 0;
        }
        let mut accepted = None;
        for attempt in 0..2 {
            let dmax = dir.iter().fold(0.0f64, |a, d| a.max(d.abs())).max(1e-300);
            let mut alpha = (2.0 * step_hint).min(1.0 / dmax * 10.0);
            for _ in 0..opts.max_halvings {
                let amps: Vec<f64> = field.amplitudes.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
                let trial = ControlField { t_final: field.t_final, amplitudes: amps };
                let obj = objective(m, &trial, rho, env_state, theta)?;
                if obj.j - value >= opts.armijo * alpha * slope {
                    accepted = Some((trial, obj, alpha));
                    break;
                }
                alpha *= 0.5;
            }
            if accepted.is_some() || attempt == 1 {
                break;
            }
            // conjugate direction failed; fall back to steepest ascent
            dir = grad.clone();
            slope = gnorm * gnorm;
            since_restart = 0;
        }
        let Some((next, obj, alpha)) = accepted else { break };
        step_hint = alpha;
        field = next;
        let (v, g_new) = value_and_gradient(m, &field, rho, env_state, theta)?;
        value = v;
        let beta = (dot(&g_new, &g_new) - dot(&g_new, &grad)) / (gnorm * gnorm).max(1e-300);
        let beta = beta.max(0.0);
        dir = g_new.iter().zip(&dir).map(|(g, d)| g + beta * d).collect();
        grad = g_new;
        gnorm = dot(&grad, &grad).sqrt();
        reduced = obj.reduced;
        iterations += 1;
        since_restart += 1;
        objective_per_iter.push(value);
        entropy_per_iter.push(obj.entropy);
        gradient_norm_per_iter.push(gnorm);
        converged = gnorm <= opts.grad_tol;
    }

    Ok(OptimizationTrace {
        objective_per_iter,
        entropy_per_iter,
        gradient_norm_per_iter,
        final_field: field,
        final_reduced_state: reduced,
        iterations,
        converged,
    })
}

/// Dimension of the real Lie algebra generated by `{i h0, i hc}`.
pub fn generated_algebra_dim(h0: &ComplexMatrix, hc: &ComplexMatrix, tol: f64) -> Result<usize> {
    Ok(generated_algebra(h0, hc, tol)?.len())
}

/// Rank of the control algebra counted in `u(n)`: the dimension of the
/// algebra generated by `{i h0, i hc}` together with the global-phase
/// generator `i I`. Full rank `n²` means the composite propagator can reach
/// all of `U(n)`.
pub fn lie_algebra_rank(h0: &ComplexMatrix, hc: &ComplexMatrix, tol: f64) -> Result<usize> {
    let basis = generated_algebra(h0, hc, tol)?;
    let n = h0.nrows();
    let phase = identity(n) * c(0.0, 1.0 / (n as f64).sqrt());
    let residual = orthogonal_residual(&basis, &phase);
    Ok(basis.len() + usize::from(residual.norm() > tol))
}

fn orthogonal_residual(basis: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let mut r = x.clone();
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let p = inner(b, &r);
            r -= b * c(p, 0.0);
        }
    }
    r
}

fn generated_algebra(h0: &ComplexMatrix, hc: &ComplexMatrix, tol: f64) -> Result<Vec<ComplexMatrix>> {
    let n = h0.nrows();
    if !h0.is_square() || hc.nrows() != n || hc.ncols() != n {
        return Err(Error::DimensionMismatch("generators must be square and equal-sized".into()));
    }
    for h in [h0, hc] {
        if !crate::qmath::is_hermitian(h, 1e-10) {
            return Err(Error::NotHermitian(crate::qmath::hermitian_residual(h)));
        }
    }
    let gens: Vec<ComplexMatrix> = [h0, hc].iter().map(|h| *h * c(0.0, 1.0)).collect();
    let cap = n * n;
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    let mut queue = std::collections::VecDeque::new();

    let push = |x: ComplexMatrix, basis: &mut Vec<ComplexMatrix>| -> Option<ComplexMatrix> {
        let norm = x.norm();
        if norm <= tol || basis.len() >= cap {
            return None;
        }
        let r = orthogonal_residual(basis, &(x / c(norm, 0.0)));
        let rn = r.norm();
        if rn <= tol {
            return None;
        }
        let e = r / c(rn, 0.0);
        basis.push(e.clone());
        Some(e)
    };
    for g in &gens {
        if let Some(e) = push(g.clone(), &mut basis) {
            queue.push_back(e);
        }
    }
    // Left-normed brackets [g, x] with the generators span the generated algebra.
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            if let Some(e) = push(commutator(g, &x), &mut basis) {
                queue.push_back(e);
            }
        }
        if basis.len() >= cap {
            break;
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{diag_real, unitary_residual};

    #[test]
    fn spin_half_algebra() {
        let [jx, jy, jz] = spin_matrices(2);
        assert!((&jz - diag_real(&[0.5, -0.5])).norm() < 1e-15);
        assert!((commutator(&jx, &jy) - &jz * c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn spin_five_halves_spectrum() {
        let [jx, jy, jz] = spin_matrices(6);
        let vals = eigh(&jz).unwrap().values;
        for (v, want) in vals.iter().zip([2.5, 1.5, 0.5, -0.5, -1.5, -2.5]) {
            assert!((v - want).abs() < 1e-14);
        }
        // Casimir j(j+1) = 35/4
        let casimir = &jx * &jx + &jy * &jy + &jz * &jz;
        assert!((casimir - identity(6) * c(8.75, 0.0)).norm() < 1e-12);
        assert!((commutator(&jy, &jz) - &jx * c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn decoupled_drift_commutes_with_system_z() {
        let m = build_model(1.0, 0.0, &EnvironmentSpec::spin(4, 0.7)).unwrap();
        let sz = kron(&spin_matrices(2)[2], &identity(4));
        assert!(commutator(&m.h0, &sz).norm() < 1e-14);
        let coupled = build_model(1.0, 0.3, &EnvironmentSpec::spin(4, 0.7)).unwrap();
        assert!(commutator(&coupled.h0, &sz).norm() > 1e-3);
    }

    #[test]
    fn model_operators_are_hermitian() {
        for env in [
            EnvironmentSpec::spin(6, 1.2),
            EnvironmentSpec::oscillator(5, 0.9),
            EnvironmentSpec::oscillator_pair(3, 0.9),
        ] {
            let m = build_model(1.0, 0.2, &env).unwrap();
            assert!(crate::qmath::hermitian_residual(&m.h0) < 1e-12);
            assert!(crate::qmath::hermitian_residual(&m.h_env) < 1e-12);
            assert_eq!(m.hc, kron(&spin_matrices(2)[0], &identity(env.dim)));
            assert_eq!(m.dim(), 2 * env.dim);
        }
        let bad = EnvironmentSpec { kind: EnvironmentKind::OscillatorPair, dim: 5, omega_e: 1.0, truncation: 2 };
        assert!(build_model(1.0, 0.1, &bad).is_err());
        assert!(build_model(1.0, 0.1, &EnvironmentSpec::spin(0, 1.0)).is_err());
    }

    #[test]
    fn thermal_limits() {
        let h = diag_real(&[0.5, -0.5]);
        let cold = thermal_state(&h, 0.0).unwrap();
        assert_eq!(cold.ground_degeneracy, 1);
        assert!((cold.state.matrix() - diag_real(&[0.0, 1.0])).norm() < 1e-14);
        let hot = thermal_state(&h, f64::INFINITY).unwrap();
        assert!((hot.state.matrix() - diag_real(&[0.5, 0.5])).norm() < 1e-14);

        // populations e^{∓1/2}/Z at T = ω_e
        let w = 1.7;
        let th = thermal_state(&(h.clone() * c(w, 0.0)), w).unwrap();
        let z = (-0.5f64).exp() + 0.5f64.exp();
        let upper = th.state.matrix()[(0, 0)].re;
        assert!((upper - (-0.5f64).exp() / z).abs() < 1e-14);
        assert!((upper - 0.2689).abs() < 1e-4);

        let degenerate = thermal_state(&diag_real(&[1.0, 0.0, 0.0]), 0.0).unwrap();
        assert_eq!(degenerate.ground_degeneracy, 2);
        assert!((degenerate.state.matrix() - diag_real(&[0.0, 0.5, 0.5])).norm() < 1e-14);
        assert!(thermal_state(&h, -1.0).is_err());
    }

    #[test]
    fn zero_time_propagator_is_identity() {
        let m = build_model(1.0, 0.2, &EnvironmentSpec::spin(3, 1.1)).unwrap();
        let f = ControlField::constant(0.0, 5, 0.3).unwrap();
        assert!((propagate(&m, &f).unwrap() - identity(6)).norm() < 1e-12);
    }

    #[test]
    fn propagator_is_unitary() {
        let m = build_model(1.0, 0.2, &EnvironmentSpec::oscillator(4, 1.1)).unwrap();
        let f = ControlField::random(3.0, 40, 0.5, 3).unwrap();
        assert!(unitary_residual(&propagate(&m, &f).unwrap()) < 1e-9);
    }

    #[test]
    fn flat_observable_has_zero_field_gradient() {
        let m = build_model(1.0, 0.2, &EnvironmentSpec::spin(3, 1.1)).unwrap();
        let f = ControlField::random(2.0, 10, 0.5, 1).unwrap();
        let rho = DensityOperator::from_populations(&[0.7, 0.3]).unwrap();
        let env = thermal_state(&m.h_env, 1.0).unwrap().state;
        let g = field_gradient(&m, &f, &rho, &env, &identity(2)).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn lie_rank_qubit() {
        let [sx, _, sz] = spin_matrices(2);
        assert_eq!(lie_algebra_rank(&sz, &sx, 1e-9).unwrap(), 4);
        assert_eq!(generated_algebra_dim(&sz, &sx, 1e-9).unwrap(), 3);
        // commuting generators stay two-dimensional, plus the phase
        assert_eq!(lie_algebra_rank(&sz, &(sz.clone() * c(2.0, 0.0) + identity(2)), 1e-9).unwrap(), 2);
    }

    #[test]
    fn objective_dimension_errors() {
        let m = build_model(1.0, 0.2, &EnvironmentSpec::spin(3, 1.1)).unwrap();
        let f = ControlField::constant(1.0, 2, 0.0).unwrap();
        let rho = DensityOperator::from_populations(&[0.7, 0.3]).unwrap();
        let wrong_env = DensityOperator::maximally_mixed(2);
        assert!(matches!(
            objective(&m, &f, &rho, &wrong_env, &diag_real(&[0.5, -0.5])),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(ControlField::new(-1.0, vec![0.0]).is_err());
        assert!(ControlField::new(1.0, vec![]).is_err());
    }
}
