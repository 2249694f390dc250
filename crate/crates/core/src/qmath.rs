// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra and quantum primitives.
//!
//! Composite spaces are always ordered system ⊗ environment: the basis index
//! of `|i⟩⊗|α⟩` is `i * n_env + α`.

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Hermiticity tolerance enforced on density operators.
pub const DENSITY_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Frobenius norm of `m - m†`.
pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (m - m.adjoint()).norm()
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_residual(m) <= tol * m.norm().max(1.0)
}

/// Frobenius norm of `u†u - I`.
pub fn unitary_residual(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    unitary_residual(u) <= tol
}

pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    if !is_hermitian(m, tol) {
        return false;
    }
    match eigh(m) {
        Ok(spec) => spec.values.last().is_none_or(|&v| v >= -tol),
        Err(_) => false,
    }
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Real part of `Tr(a† b)`.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Traces out the environment factor of an `(n_sys·n_env)`-square matrix.
pub fn partial_trace_env(m: &ComplexMatrix, n_sys: usize, n_env: usize) -> Result<ComplexMatrix> {
    let dim = n_sys * n_env;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(n_sys, n_sys, |i, j| {
        (0..n_env).map(|a| m[(i * n_env + a, j * n_env + a)]).sum()
    }))
}

/// Traces out the system factor, leaving the environment block.
pub fn partial_trace_sys(m: &ComplexMatrix, n_sys: usize, n_env: usize) -> Result<ComplexMatrix> {
    let dim = n_sys * n_env;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(n_env, n_env, |a, b| {
        (0..n_sys).map(|i| m[(i * n_env + a, i * n_env + b)]).sum()
    }))
}

/// Eigen-decomposition of a Hermitian matrix, values sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns aligned with `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.vectors * diag_real(&self.values) * self.vectors.adjoint()
    }

    /// `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let vals: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        &self.vectors * diag_real(&vals) * self.vectors.adjoint()
    }

    pub fn map_complex(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn first_significant(v: &[C64]) -> usize {
    v.iter().position(|z| z.norm() > 1e-8).unwrap_or(0)
}

pub fn eigh(h: &ComplexMatrix) -> Result<HermitianSpectrum> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigh expects a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if !is_hermitian(h, 1e-9) {
        return Err(Error::NotHermitian(hermitian_residual(h)));
    }
    let n = h.nrows();
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();

    let cols: Vec<Vec<C64>> = (0..n)
        .map(|j| eig.eigenvectors.column(j).iter().copied().collect())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        if (va - vb).abs() <= 1e-12 * va.abs().max(vb.abs()).max(1.0) {
            first_significant(&cols[a]).cmp(&first_significant(&cols[b]))
        } else {
            vb.total_cmp(&va)
        }
    });

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = &cols[src];
        // Phase convention: first significant component real and positive.
        let lead = col[first_significant(col)];
        let phase = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { c(1.0, 0.0) };
        for (i, z) in col.iter().enumerate() {
            vectors[(i, dst)] = z * phase;
        }
    }
    Ok(HermitianSpectrum { values, vectors })
}

/// `exp(-i h t)` for Hermitian `h`.
pub fn expm_i(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let spec = eigh(h)?;
    Ok(spec.map_complex(|e| C64::from_polar(1.0, -e * t)))
}

/// `exp(a)` for anti-Hermitian `a`, computed as `exp(-i (i a))`.
pub fn expm_anti_hermitian(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    expm_i(&(a * c(0.0, 1.0)), 1.0)
}

/// Haar-distributed unitary from a seeded complex Ginibre matrix.
pub fn haar_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_from(n, &mut rng)
}

pub fn haar_unitary_from<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let n = n.max(1);
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with standard complex Gaussian entries.
pub fn random_hermitian<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DENSITY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "shape {}x{} is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = hermitian_residual(&matrix);
        if herm > tol {
            return Err(Error::InvalidDensity(format!("Hermitian residual {herm:.3e}")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = eigh(&matrix)?.values.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidDensity(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Diagonal state with the given populations; they must sum to one.
    pub fn from_populations(pops: &[f64]) -> Result<Self> {
        if pops.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDensity(format!("populations {pops:?}")));
        }
        Self::new(diag_real(pops))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: identity(dim) * c(1.0 / dim as f64, 0.0) }
    }

    /// `|k⟩⟨k|` in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn from_ket(ket: &DVector<C64>) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(Error::InvalidDensity("zero vector".into()));
        }
        let v = ket / c(norm, 0.0);
        Ok(Self { matrix: &v * v.adjoint() })
    }

    /// Random full-rank state `G G† / Tr(G G†)` from a Ginibre matrix.
    pub fn random<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        let mut m = m / c(tr, 0.0);
        // exact Hermitian symmetrisation
        m = (&m + m.adjoint()) * c(0.5, 0.0);
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> HermitianSpectrum {
        eigh(&self.matrix).expect("density operators are Hermitian")
    }

    /// Principal square root, negative eigenvalues clamped to zero.
    pub fn sqrt(&self) -> ComplexMatrix {
        self.spectrum().map_real(|v| v.max(0.0).sqrt())
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self { matrix: kron(&self.matrix, &other.matrix) }
    }
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.spectrum()
        .values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    fn swap() -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                s[(j * 2 + i, i * 2 + j)] = c(1.0, 0.0);
            }
        }
        s
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&identity(2), &identity(3)), identity(6));
        let d = kron(&diag_real(&[2.0, 5.0]), &identity(2));
        assert_eq!(d, diag_real(&[2.0, 2.0, 5.0, 5.0]));
        let xx = kron(&sigma_x(), &sigma_x());
        let mut e = DVector::<C64>::zeros(4);
        e[1] = c(1.0, 0.0);
        assert_eq!(&xx * (&xx * &e), e);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = DensityOperator::from_populations(&[0.7, 0.3]).unwrap();
        let env = DensityOperator::from_populations(&[0.8, 0.2]).unwrap();
        let p = kron(rho.matrix(), env.matrix());
        assert!((partial_trace_env(&p, 2, 2).unwrap() - rho.matrix()).norm() < 1e-15);

        let mixed = identity(4) * c(0.25, 0.0);
        let half = identity(2) * c(0.5, 0.0);
        assert!((partial_trace_env(&mixed, 2, 2).unwrap() - half).norm() < 1e-15);

        // SWAP exchanges the factors, so the system inherits the environment state.
        let s = swap();
        let swapped = &s * &p * s.adjoint();
        assert!((partial_trace_env(&swapped, 2, 2).unwrap() - env.matrix()).norm() < 1e-15);

        assert!(matches!(
            partial_trace_env(&identity(5), 2, 2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn eigh_examples() {
        let s = eigh(&diag_real(&[0.3, 0.7])).unwrap();
        assert_eq!(s.values, vec![0.7, 0.3]);
        let s = eigh(&sigma_x()).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-14 && (s.values[1] + 1.0).abs() < 1e-14);

        let p = kron(&diag_real(&[0.7, 0.3]), &diag_real(&[0.8, 0.2]));
        let s = eigh(&p).unwrap();
        let want = [0.56, 0.24, 0.14, 0.06];
        for (a, b) in s.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }

        let mut bad = identity(2);
        bad[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(eigh(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigh_degenerate_ordering_is_deterministic() {
        let s = eigh(&identity(3)).unwrap();
        assert!((s.vectors.clone() - identity(3)).norm() < 1e-14);
    }

    #[test]
    fn expm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(5, &mut rng);
        assert!((expm_i(&h, 0.0).unwrap() - identity(5)).norm() < 1e-13);

        let w = 1.3;
        let t = 0.7;
        let u = expm_i(&diag_real(&[w, -w]), t).unwrap();
        assert!((u[(0, 0)] - C64::from_polar(1.0, -w * t)).norm() < 1e-15);
        assert!((u[(1, 1)] - C64::from_polar(1.0, w * t)).norm() < 1e-15);

        let a = expm_i(&h, 0.4).unwrap();
        let b = expm_i(&h, 1.1).unwrap();
        assert!((a * b - expm_i(&h, 1.5).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn haar_is_unitary_and_seeded() {
        let u = haar_unitary(4, 11);
        assert!(unitary_residual(&u) < 1e-12);
        assert_eq!(u, haar_unitary(4, 11));
        assert_ne!(u, haar_unitary(4, 12));
    }

    #[test]
    fn haar_first_moment() {
        // E|u_11|^2 = 1/n and E|u_11|^4 = 2/(n(n+1)) under Haar measure.
        let n = 3usize;
        let samples = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mean = (0..samples)
            .map(|_| haar_unitary_from(n, &mut rng)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / samples as f64;
        let nf = n as f64;
        let var = 2.0 / (nf * (nf + 1.0)) - 1.0 / (nf * nf);
        let sigma = (var / samples as f64).sqrt();
        assert!((mean - 1.0 / nf).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&DensityOperator::basis_state(3, 1)).abs() < 1e-15);
        assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(4)) - 4f64.ln()).abs() < 1e-12);
        let rho = DensityOperator::from_populations(&[0.7, 0.3]).unwrap();
        let direct = -(0.7f64 * 0.7f64.ln() + 0.3 * 0.3f64.ln());
        assert!((von_neumann_entropy(&rho) - direct).abs() < 1e-14);
        assert!((direct - 0.6109).abs() < 5e-5);
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::from_populations(&[0.6, 0.6]).is_err());
        assert!(DensityOperator::from_populations(&[1.2, -0.2]).is_err());
        let mut m = diag_real(&[0.5, 0.5]);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityOperator::new(m).is_err());
    }
}
