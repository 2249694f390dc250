// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Kraus operator-sum representations induced by an environment state.
//!
//! A composite unitary `U` on system ⊗ environment and an environment state
//! `ϱ` give `K = U (I_N ⊗ ϱ^{1/2})`. The Kraus operator `K_{αβ}` is the
//! `N×N` matrix `K_{αβ}[i, j] = K[(i, α), (j, β)]`, i.e. the `(α, β)`
//! environment block under the system ⊗ environment index ordering.

use crate::error::{Error, Result};
use crate::qmath::{
    c, identity, kron, partial_trace_env, unitary_residual, ComplexMatrix, DensityOperator,
};

/// Unitarity tolerance for inducing unitaries.
pub const UNITARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct KrausSet {
    n_sys: usize,
    n_env: usize,
    /// Row-major over `(α, β)`: index `α * n_env + β`.
    blocks: Vec<ComplexMatrix>,
    env_state: DensityOperator,
}

impl KrausSet {
    /// Splits an assembled `λN×λN` matrix into its `λ²` Kraus blocks.
    pub fn from_assembled(k: &ComplexMatrix, n_sys: usize, env_state: DensityOperator) -> Result<Self> {
        let n_env = env_state.dim();
        let dim = n_sys * n_env;
        if k.nrows() != dim || k.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "assembled Kraus matrix must be {dim}x{dim}, got {}x{}",
                k.nrows(),
                k.ncols()
            )));
        }
        let mut blocks = Vec::with_capacity(n_env * n_env);
        for a in 0..n_env {
            for b in 0..n_env {
                blocks.push(ComplexMatrix::from_fn(n_sys, n_sys, |i, j| {
                    k[(i * n_env + a, j * n_env + b)]
                }));
            }
        }
        Ok(Self { n_sys, n_env, blocks, env_state })
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn n_env(&self) -> usize {
        self.n_env
    }

    pub fn env_state(&self) -> &DensityOperator {
        &self.env_state
    }

    pub fn block(&self, alpha: usize, beta: usize) -> &ComplexMatrix {
        &self.blocks[alpha * self.n_env + beta]
    }

    pub fn block_mut(&mut self, alpha: usize, beta: usize) -> &mut ComplexMatrix {
        &mut self.blocks[alpha * self.n_env + beta]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.blocks.iter()
    }

    pub fn assembled(&self) -> ComplexMatrix {
        let n = self.n_env;
        ComplexMatrix::from_fn(self.n_sys * n, self.n_sys * n, |r, col| {
            let (i, a) = (r / n, r % n);
            let (j, b) = (col / n, col % n);
            self.block(a, b)[(i, j)]
        })
    }

    /// `(I_N ⊗ V) K`, an environment basis change.
    pub fn rotate_environment(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.nrows() != self.n_env || v.ncols() != self.n_env {
            return Err(Error::DimensionMismatch("environment rotation".into()));
        }
        let k = kron(&identity(self.n_sys), v) * self.assembled();
        Self::from_assembled(&k, self.n_sys, self.env_state.clone())
    }

    /// Linear action `X ↦ Σ K_{αβ} X K_{αβ}†` on an arbitrary `N×N` operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.nrows() != self.n_sys || x.ncols() != self.n_sys {
            return Err(Error::DimensionMismatch(format!(
                "operator must be {0}x{0}, got {1}x{2}",
                self.n_sys,
                x.nrows(),
                x.ncols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.n_sys, self.n_sys);
        for k in &self.blocks {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }
}

pub fn kraus_from_unitary(u: &ComplexMatrix, env: &DensityOperator) -> Result<KrausSet> {
    let n_env = env.dim();
    if !u.is_square() || !u.nrows().is_multiple_of(n_env) {
        return Err(Error::DimensionMismatch(format!(
            "unitary of size {}x{} is not a multiple of the environment dimension {n_env}",
            u.nrows(),
            u.ncols()
        )));
    }
    let res = unitary_residual(u);
    if res > UNITARY_TOL {
        return Err(Error::NotUnitary(res));
    }
    let n_sys = u.nrows() / n_env;
    let k = u * kron(&identity(n_sys), &env.sqrt());
    KrausSet::from_assembled(&k, n_sys, env.clone())
}

/// `‖K†K − I_N ⊗ ϱ‖_F`.
pub fn kraus_identity_residual(k: &KrausSet) -> f64 {
    let assembled = k.assembled();
    let target = kron(&identity(k.n_sys), k.env_state.matrix());
    (assembled.adjoint() * assembled - target).norm()
}

pub fn apply_kraus(k: &KrausSet, rho: &DensityOperator) -> Result<DensityOperator> {
    let out = k.apply_operator(rho.matrix())?;
    // Restore exact Hermiticity lost to rounding.
    let out = (&out + out.adjoint()) * c(0.5, 0.0);
    DensityOperator::with_tolerance(out, 1e-9)
}

/// Reduction route: `Tr_E(U (ρ ⊗ ϱ) U†)`.
pub fn reduce_composite(
    u: &ComplexMatrix,
    rho: &DensityOperator,
    env: &DensityOperator,
) -> Result<ComplexMatrix> {
    let total = u * kron(rho.matrix(), env.matrix()) * u.adjoint();
    partial_trace_env(&total, rho.dim(), env.dim())
}

/// Hermitian operator basis of `N×N` matrices: `E_ii`, `(E_ij + E_ji)/√2`,
/// `i(E_ij − E_ji)/√2`.
pub fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(i, i)] = c(1.0, 0.0);
        out.push(m);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(i, j)] = c(s, 0.0);
            m[(j, i)] = c(s, 0.0);
            out.push(m);
            let mut m = ComplexMatrix::zeros(n, n);
            m[(i, j)] = c(0.0, s);
            m[(j, i)] = c(0.0, -s);
            out.push(m);
        }
    }
    out
}

/// Largest Frobenius difference of the two channels over the Hermitian basis.
pub fn channel_distance(k1: &KrausSet, k2: &KrausSet) -> Result<f64> {
    if k1.n_sys != k2.n_sys {
        return Err(Error::DimensionMismatch(format!(
            "system dimensions {} and {} differ",
            k1.n_sys, k2.n_sys
        )));
    }
    let mut worst = 0.0f64;
    for b in hermitian_basis(k1.n_sys) {
        let d = (k1.apply_operator(&b)? - k2.apply_operator(&b)?).norm();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Whether the two sets realize the same channel, within `tol` on every
/// Hermitian basis operator.
pub fn channels_equivalent(k1: &KrausSet, k2: &KrausSet, tol: f64) -> bool {
    channel_distance(k1, k2).is_ok_and(|d| d <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{haar_unitary, haar_unitary_from};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn swap2() -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                s[(j * 2 + i, i * 2 + j)] = c(1.0, 0.0);
            }
        }
        s
    }

    #[test]
    fn identity_unitary_with_pure_env_has_one_block() {
        let env = DensityOperator::basis_state(3, 1);
        let k = kraus_from_unitary(&identity(6), &env).unwrap();
        let nonzero: Vec<(usize, usize)> = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|&(a, b)| k.block(a, b).norm() > 1e-14)
            .collect();
        assert_eq!(nonzero, vec![(1, 1)]);
        assert!((k.block(1, 1) - identity(2)).norm() < 1e-14);
        let rho = DensityOperator::from_populations(&[0.7, 0.3]).unwrap();
        assert!((apply_kraus(&k, &rho).unwrap().matrix() - rho.matrix()).norm() < 1e-14);
    }

    #[test]
    fn identity_residual_and_broken_identity() {
        let env = DensityOperator::from_populations(&[0.5, 0.3, 0.2]).unwrap();
        let k = kraus_from_unitary(&haar_unitary(6, 3), &env).unwrap();
        assert!(kraus_identity_residual(&k) < 1e-10);
        let mut broken = k.clone();
        *broken.block_mut(0, 0) = ComplexMatrix::zeros(2, 2);
        assert!(kraus_identity_residual(&broken) > 1e-3);
    }

    #[test]
    fn residual_grows_linearly_under_perturbation() {
        // r(ε) = ‖ε(K†E + E†K) + ε²E†E‖, so r(ε)/ε → ‖K†E + E†K‖.
        let env = DensityOperator::from_populations(&[0.6, 0.4]).unwrap();
        let k = kraus_from_unitary(&haar_unitary(4, 9), &env).unwrap();
        let e = haar_unitary(4, 10);
        let a = k.assembled();
        let slope = (a.adjoint() * &e + e.adjoint() * &a).norm();
        for eps in [1e-4, 1e-5, 1e-6] {
            let perturbed = KrausSet::from_assembled(&(&a + &e * c(eps, 0.0)), 2, env.clone()).unwrap();
            let r = kraus_identity_residual(&perturbed);
            assert!((r / eps - slope).abs() < 1e-3 * slope + 1e-8 / eps, "eps {eps}");
        }
    }

    #[test]
    fn swap_channel_outputs_environment_state() {
        let env = DensityOperator::from_populations(&[0.8, 0.2]).unwrap();
        let rho = DensityOperator::from_populations(&[0.3, 0.7]).unwrap();
        let k = kraus_from_unitary(&swap2(), &env).unwrap();
        let out = apply_kraus(&k, &rho).unwrap();
        assert!((out.matrix() - env.matrix()).norm() < 1e-12);
    }

    #[test]
    fn haar_channel_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let env = DensityOperator::maximally_mixed(2);
        let k = kraus_from_unitary(&haar_unitary(4, 17), &env).unwrap();
        let rho = DensityOperator::random(2, &mut rng);
        let out = apply_kraus(&k, &rho).unwrap();
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn environment_rotation_is_equivalent() {
        let env = DensityOperator::from_populations(&[0.5, 0.25, 0.25]).unwrap();
        let k = kraus_from_unitary(&haar_unitary(6, 21), &env).unwrap();
        let v = haar_unitary(3, 22);
        let rotated = k.rotate_environment(&v).unwrap();
        assert!(channels_equivalent(&k, &rotated, 1e-10));
        assert!(channels_equivalent(&k, &k, 0.0));
    }

    #[test]
    fn independent_haar_channels_differ() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let env = DensityOperator::basis_state(2, 0);
        let k1 = kraus_from_unitary(&haar_unitary_from(4, &mut rng), &env).unwrap();
        let k2 = kraus_from_unitary(&haar_unitary_from(4, &mut rng), &env).unwrap();
        assert!(channel_distance(&k1, &k2).unwrap() > 1e-2);
        assert!(!channels_equivalent(&k1, &k2, 1e-6));
    }

    #[test]
    fn errors() {
        let env = DensityOperator::maximally_mixed(2);
        assert!(matches!(
            kraus_from_unitary(&identity(5), &env),
            Err(Error::DimensionMismatch(_))
        ));
        let mut bad = identity(4);
        bad[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(kraus_from_unitary(&bad, &env), Err(Error::NotUnitary(_))));
        let k = kraus_from_unitary(&identity(4), &env).unwrap();
        assert!(apply_kraus(&k, &DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let ip = crate::qmath::inner(x, y);
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
