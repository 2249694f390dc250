// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Critical topology of the lifted landscape `Tr(U P U† Θ)`.
//!
//! Critical submanifolds are indexed by contingency tables whose rows are the
//! degenerate eigenvalue groups of `P = ρ ⊗ ϱ` and whose columns are those of
//! `Θ = θ ⊗ I_λ`. This module builds the marginals, enumerates the tables,
//! and provides the closed-form and Gaussian counts.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::qmath::{eigh, ComplexMatrix};

/// Default cap on the number of enumerated tables.
pub const DEFAULT_TABLE_CAP: usize = 10_000_000;

/// Eigenvalues at or below this magnitude are treated as exact zeros.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-12;

/// Relative tolerance used to detect coinciding products `p_i q_j`.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumStructure {
    /// Distinct eigenvalues, strictly decreasing.
    pub values: Vec<f64>,
    pub mults: Vec<usize>,
    pub total_dim: usize,
}

impl SpectrumStructure {
    /// Clusters real values: `a` and `b` merge when `|a−b| ≤ rel_tol·max(1,|a|)`.
    pub fn from_values(values: &[f64], rel_tol: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut groups: Vec<(f64, usize, f64)> = Vec::new();
        for v in sorted {
            match groups.last_mut() {
                Some((sum, count, last)) if (*last - v).abs() <= rel_tol * last.abs().max(1.0) => {
                    *sum += v;
                    *count += 1;
                    *last = v;
                }
                _ => groups.push((v, 1, v)),
            }
        }
        Self {
            values: groups.iter().map(|(s, n, _)| s / *n as f64).collect(),
            mults: groups.iter().map(|(_, n, _)| *n).collect(),
            total_dim: values.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplicity of the zero eigenvalue (0 when absent).
    pub fn zero_mult(&self) -> usize {
        self.values
            .iter()
            .zip(&self.mults)
            .filter(|(v, _)| v.abs() <= ZERO_EIGENVALUE_TOL)
            .map(|(_, m)| *m)
            .sum()
    }

    /// `(value, mult)` pairs with nonzero value.
    pub fn nonzero(&self) -> Vec<(f64, usize)> {
        self.values
            .iter()
            .zip(&self.mults)
            .filter(|(v, _)| v.abs() > ZERO_EIGENVALUE_TOL)
            .map(|(v, m)| (*v, *m))
            .collect()
    }
}

pub fn spectrum_structure(h: &ComplexMatrix, rel_tol: f64) -> Result<SpectrumStructure> {
    Ok(SpectrumStructure::from_values(&eigh(h)?.values, rel_tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeMarginals {
    /// Eigenvalues of `P` per row group, descending; the zero group is last.
    pub row_values: Vec<f64>,
    pub row_sums: Vec<usize>,
    pub col_values: Vec<f64>,
    pub col_sums: Vec<usize>,
}

impl CompositeMarginals {
    pub fn total(&self) -> usize {
        self.row_sums.iter().sum()
    }
}

/// Row and column marginals of the composite table.
///
/// Rows are `D_ij = d_i f_j` for every nonzero product `p_i q_j`, plus the
/// zero group `d_r λ + f_m N − d_r f_m`; columns are `λ e_k`.
pub fn composite_marginals(
    sys: &SpectrumStructure,
    env: &SpectrumStructure,
    theta: &SpectrumStructure,
    lambda: usize,
) -> Result<CompositeMarginals> {
    if env.total_dim != lambda {
        return Err(Error::DimensionMismatch(format!(
            "environment structure has dimension {}, expected {lambda}",
            env.total_dim
        )));
    }
    if theta.total_dim != sys.total_dim {
        return Err(Error::DimensionMismatch(format!(
            "observable dimension {} differs from system dimension {}",
            theta.total_dim, sys.total_dim
        )));
    }
    let n = sys.total_dim;
    let sys_nz = sys.nonzero();
    let env_nz = env.nonzero();

    let mut products = Vec::new();
    for (i, &(p, d)) in sys_nz.iter().enumerate() {
        for (j, &(q, f)) in env_nz.iter().enumerate() {
            products.push(((i, j), p * q, d * f));
        }
    }
    let mut collisions = Vec::new();
    for a in 0..products.len() {
        for b in (a + 1)..products.len() {
            let (x, y) = (products[a].1, products[b].1);
            if (x - y).abs() <= DEGENERACY_REL_TOL * x.abs().max(y.abs()) {
                collisions.push((products[a].0, products[b].0));
            }
        }
    }
    if !collisions.is_empty() {
        return Err(Error::AccidentalDegeneracy(collisions));
    }
    products.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut row_values: Vec<f64> = products.iter().map(|p| p.1).collect();
    let mut row_sums: Vec<usize> = products.iter().map(|p| p.2).collect();
    let d_r = sys.zero_mult();
    let f_m = env.zero_mult();
    let zero = d_r * lambda + f_m * n - d_r * f_m;
    if zero > 0 {
        row_values.push(0.0);
        row_sums.push(zero);
    }
    Ok(CompositeMarginals {
        row_values,
        row_sums,
        col_values: theta.values.clone(),
        col_sums: theta.mults.iter().map(|e| e * lambda).collect(),
    })
}

/// Non-negative integer matrix with fixed margins, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    cells: Vec<usize>,
}

impl ContingencyTable {
    pub fn new(rows: usize, cols: usize, cells: Vec<usize>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {rows}x{cols} table",
                cells.len()
            )));
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.cols + j]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.cells.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.cells.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    /// `Σ c_ij · row_value_i · col_value_j`.
    pub fn weighted_value(&self, row_values: &[f64], col_values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self.get(i, j) as f64 * row_values[i] * col_values[j];
            }
        }
        acc
    }
}

fn check_margins(row_sums: &[usize], col_sums: &[usize]) -> Result<()> {
    let (r, c): (usize, usize) = (row_sums.iter().sum(), col_sums.iter().sum());
    if r != c {
        return Err(Error::MarginalMismatch(format!("row total {r} != column total {c}")));
    }
    if row_sums.is_empty() || col_sums.is_empty() {
        return Err(Error::MarginalMismatch("empty margins".into()));
    }
    Ok(())
}

/// Depth-first walk over all tables in lexicographic order of the row-major
/// cell vector. Every partial assignment it visits is completable.
struct TableWalker<'a> {
    row_sums: &'a [usize],
    cols: usize,
    col_rem: Vec<usize>,
    cells: Vec<usize>,
}

impl TableWalker<'_> {
    fn walk<F: FnMut(&[usize]) -> bool>(&mut self, pos: usize, row_rem: usize, visit: &mut F) -> bool {
        let rows = self.row_sums.len();
        let cols = self.cols;
        if pos == rows * cols {
            return visit(&self.cells);
        }
        let (i, j) = (pos / cols, pos % cols);
        let row_rem = if j == 0 { self.row_sums[i] } else { row_rem };
        if i == rows - 1 {
            // last row is forced by the column remainders
            let v = self.col_rem[j];
            if v > row_rem {
                return true;
            }
            self.cells[pos] = v;
            self.col_rem[j] -= v;
            let ok = self.walk(pos + 1, row_rem - v, visit);
            self.col_rem[j] += v;
            return ok;
        }
        let later: usize = self.col_rem[j + 1..].iter().sum();
        let lo = row_rem.saturating_sub(later);
        let hi = row_rem.min(self.col_rem[j]);
        if j == cols - 1 {
            if row_rem > self.col_rem[j] {
                return true;
            }
            self.cells[pos] = row_rem;
            self.col_rem[j] -= row_rem;
            let ok = self.walk(pos + 1, 0, visit);
            self.col_rem[j] += row_rem;
            return ok;
        }
        for v in lo..=hi {
            self.cells[pos] = v;
            self.col_rem[j] -= v;
            let ok = self.walk(pos + 1, row_rem - v, visit);
            self.col_rem[j] += v;
            if !ok {
                return false;
            }
        }
        true
    }
}

fn walk_tables<F: FnMut(&[usize]) -> bool>(row_sums: &[usize], col_sums: &[usize], mut visit: F) -> Result<()> {
    check_margins(row_sums, col_sums)?;
    let mut walker = TableWalker {
        row_sums,
        cols: col_sums.len(),
        col_rem: col_sums.to_vec(),
        cells: vec![0; row_sums.len() * col_sums.len()],
    };
    walker.walk(0, 0, &mut visit);
    Ok(())
}

pub fn enumerate_tables(row_sums: &[usize], col_sums: &[usize]) -> Result<Vec<ContingencyTable>> {
    enumerate_tables_capped(row_sums, col_sums, DEFAULT_TABLE_CAP)
}

pub fn enumerate_tables_capped(
    row_sums: &[usize],
    col_sums: &[usize],
    cap: usize,
) -> Result<Vec<ContingencyTable>> {
    let mut out = Vec::new();
    let mut overflow = false;
    walk_tables(row_sums, col_sums, |cells| {
        if out.len() == cap {
            overflow = true;
            return false;
        }
        out.push(ContingencyTable { rows: row_sums.len(), cols: col_sums.len(), cells: cells.to_vec() });
        true
    })?;
    if overflow {
        return Err(Error::EnumerationCap(cap));
    }
    Ok(out)
}

/// Number of tables without materializing them.
pub fn count_tables(row_sums: &[usize], col_sums: &[usize], cap: usize) -> Result<usize> {
    let mut n = 0usize;
    let mut overflow = false;
    walk_tables(row_sums, col_sums, |_| {
        if n == cap {
            overflow = true;
            return false;
        }
        n += 1;
        true
    })?;
    if overflow {
        return Err(Error::EnumerationCap(cap));
    }
    Ok(n)
}

/// Critical values of all tables, sorted descending.
pub fn critical_values(m: &CompositeMarginals, tables: &[ContingencyTable]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(tables.len());
    for t in tables {
        if t.row_sums() != m.row_sums || t.col_sums() != m.col_sums {
            return Err(Error::MarginalMismatch(format!("table {:?} does not match margins", t.to_rows())));
        }
        out.push(t.weighted_value(&m.row_values, &m.col_values));
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Exact binomial coefficient; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `ln[(d+s−1)! / (d!(s−1)!)]`, the number of ordered splits of `d` into `s` parts.
fn ln_compositions(d: usize, s: usize) -> f64 {
    let n = d + s - 1;
    if n <= 20 {
        (binomial(n as u64, (s - 1) as u64).expect("20! fits in u128") as f64).ln()
    } else {
        ln_binomial(n as u64, (s - 1) as u64)
    }
}

/// Closed-form table count for a pure environment:
/// `Π_i (d_i+s−1)! / (d_i!(s−1)!)` over nonzero-eigenvalue multiplicities.
///
/// Each nonzero row is placed freely and the zero row absorbs the rest, which
/// requires `λ e_k ≥ Σ d_i` for every column; this holds whenever `λ ≥ N`.
pub fn count_pure_env(d_nonzero: &[usize], s: usize) -> Result<u128> {
    if s == 0 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    d_nonzero.iter().try_fold(1u128, |acc, &d| {
        binomial((d + s - 1) as u64, (s - 1) as u64)
            .and_then(|b| acc.checked_mul(b))
            .ok_or_else(|| Error::InvalidArgument("count overflows u128".into()))
    })
}

/// Number of nonzero (all negative) Hessian eigenvalues at the global maximum
/// of the full Kraus landscape: `2 N² (N − d_r)(N − e₁)`.
pub fn hessian_count_global(n_sys: usize, d_r: usize, e1: usize) -> Result<u64> {
    if d_r >= n_sys || e1 == 0 || e1 > n_sys {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= d_r < N and 1 <= e1 <= N (N={n_sys}, d_r={d_r}, e1={e1})"
        )));
    }
    let n = n_sys as u64;
    Ok(2 * n * n * (n - d_r as u64) * (n - e1 as u64))
}

/// Gaussian approximation of the number of tables with the given margins.
pub fn gaussian_count_estimate(row_sums: &[usize], col_sums: &[usize]) -> Result<f64> {
    check_margins(row_sums, col_sums)?;
    let s = col_sums.len();
    if s < 2 {
        return Err(Error::InvalidArgument("at least two columns are required".into()));
    }
    let sf = s as f64;
    let total: f64 = col_sums.iter().sum::<usize>() as f64;
    let q = col_sums.iter().map(|&e| (e as f64).powi(2)).sum::<f64>() - total * total / sf;
    let ln_m: f64 = row_sums.iter().map(|&d| ln_compositions(d, s)).sum();
    let beta: f64 = row_sums
        .iter()
        .map(|&d| {
            let d = d as f64;
            d * (d + sf)
        })
        .sum::<f64>()
        / (sf * (sf + 1.0));
    if beta <= 0.0 {
        return Err(Error::InvalidArgument("all row sums are zero".into()));
    }
    let ln_a = 0.5 * sf.ln() - 0.5 * (sf - 1.0) * (2.0 * std::f64::consts::PI * beta).ln() + ln_m
        - q / (2.0 * beta);
    Ok(ln_a.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureRegime {
    FiniteT,
    ZeroT,
    InfiniteT,
}

/// Degeneracy data of `ρ`, `ϱ` and `θ` needed by the asymptotic counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountInputs {
    /// Multiplicities of the nonzero eigenvalues of `ρ`.
    pub nonzero_mults: Vec<usize>,
    /// Multiplicity of the zero eigenvalue of `ρ`.
    pub zero_mult: usize,
    /// Multiplicities of the distinct eigenvalues of `θ`.
    pub theta_mults: Vec<usize>,
    /// Whether the environment Hamiltonian has a degenerate spectrum.
    pub env_degenerate: bool,
}

impl CountInputs {
    pub fn new(nonzero_mults: Vec<usize>, zero_mult: usize, theta_mults: Vec<usize>) -> Self {
        Self { nonzero_mults, zero_mult, theta_mults, env_degenerate: false }
    }

    pub fn n_sys(&self) -> usize {
        self.nonzero_mults.iter().sum::<usize>() + self.zero_mult
    }

    fn q(&self) -> f64 {
        let s = self.theta_mults.len() as f64;
        let n = self.n_sys() as f64;
        self.theta_mults.iter().map(|&e| (e as f64).powi(2)).sum::<f64>() - n * n / s
    }
}

/// Approximate number of critical submanifolds for a `λ`-dimensional
/// environment in the given temperature regime.
///
/// * `ZeroT`: exact closed-form count, independent of `λ`.
/// * `FiniteT`: `s^{1/2} M₀^λ (2πλβ)^{−(s−1)/2} exp(−λQ/2β)` with `Q` and `β`
///   from the `λ = 1` margins over the nonzero rows.
/// * `InfiniteT`: `[s^{1/2} e^{−Q/2β∞} (2πβ∞)^{−(s−1)/2} Π d_i^{s−1}/(s−1)!] λ^{(r−1)(s−1)}`
///   where `β∞ = Σ d_i² / (s(s+1))` is the large-`λ` limit of `β_λ/λ²`.
pub fn asymptotic_count(inputs: &CountInputs, lambda: usize, regime: TemperatureRegime) -> Result<f64> {
    let s = inputs.theta_mults.len();
    if s == 0 || inputs.nonzero_mults.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    if inputs.theta_mults.iter().sum::<usize>() != inputs.n_sys() {
        return Err(Error::MarginalMismatch("observable and state dimensions differ".into()));
    }
    if lambda == 0 {
        return Err(Error::InvalidArgument("environment dimension must be positive".into()));
    }
    let sf = s as f64;
    let lf = lambda as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    match regime {
        TemperatureRegime::ZeroT => Ok(count_pure_env(&inputs.nonzero_mults, s)? as f64),
        TemperatureRegime::FiniteT => {
            if inputs.env_degenerate {
                return Err(Error::InvalidArgument(
                    "finite-temperature estimate requires a non-degenerate environment spectrum".into(),
                ));
            }
            if s < 2 {
                return Err(Error::InvalidArgument("at least two observable eigenvalues are required".into()));
            }
            let ln_m0: f64 = inputs.nonzero_mults.iter().map(|&d| ln_compositions(d, s)).sum();
            let beta: f64 = inputs
                .nonzero_mults
                .iter()
                .map(|&d| (d * (d + s)) as f64)
                .sum::<f64>()
                / (sf * (sf + 1.0));
            let ln_a = 0.5 * sf.ln() + lf * ln_m0
                - 0.5 * (sf - 1.0) * (two_pi * lf * beta).ln()
                - lf * inputs.q() / (2.0 * beta);
            Ok(ln_a.exp())
        }
        TemperatureRegime::InfiniteT => {
            if s < 2 {
                return Err(Error::InvalidArgument("at least two observable eigenvalues are required".into()));
            }
            let mut rows = inputs.nonzero_mults.clone();
            if inputs.zero_mult > 0 {
                rows.push(inputs.zero_mult);
            }
            let r = rows.len() as f64;
            let beta_inf: f64 = rows.iter().map(|&d| (d * d) as f64).sum::<f64>() / (sf * (sf + 1.0));
            let ln_fact = statrs::function::factorial::ln_factorial((s - 1) as u64);
            let ln_prod: f64 = rows.iter().map(|&d| (sf - 1.0) * (d as f64).ln() - ln_fact).sum();
            let ln_pref = 0.5 * sf.ln() - inputs.q() / (2.0 * beta_inf)
                - 0.5 * (sf - 1.0) * (two_pi * beta_inf).ln()
                + ln_prod;
            Ok((ln_pref + (r - 1.0) * (sf - 1.0) * lf.ln()).exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{diag_real, identity, kron};

    fn sv(values: &[f64]) -> SpectrumStructure {
        SpectrumStructure::from_values(values, 1e-8)
    }

    #[test]
    fn spectrum_structure_examples() {
        let s = spectrum_structure(&diag_real(&[0.7, 0.3]), 1e-8).unwrap();
        assert_eq!((s.values.clone(), s.mults.clone()), (vec![0.7, 0.3], vec![1, 1]));

        let theta = kron(&diag_real(&[0.5, -0.5]), &identity(4));
        let s = spectrum_structure(&theta, 1e-8).unwrap();
        assert_eq!(s.mults, vec![4, 4]);
        assert!((s.values[0] - 0.5).abs() < 1e-14 && (s.values[1] + 0.5).abs() < 1e-14);

        let p = kron(&diag_real(&[0.7, 0.3]), &diag_real(&[0.8, 0.2]));
        let s = spectrum_structure(&p, 1e-8).unwrap();
        assert_eq!(s.mults, vec![1, 1, 1, 1]);
        for (a, b) in s.values.iter().zip([0.56, 0.24, 0.14, 0.06]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn marginals_fictitious_environment() {
        let m = composite_marginals(
            &sv(&[0.7, 0.3]),
            &sv(&[1.0, 0.0, 0.0, 0.0]),
            &sv(&[0.5, -0.5]),
            4,
        )
        .unwrap();
        assert_eq!(m.row_sums, vec![1, 1, 6]);
        assert_eq!(m.col_sums, vec![4, 4]);
        assert_eq!(m.row_values, vec![0.7, 0.3, 0.0]);
    }

    #[test]
    fn marginals_mixed_environment_and_zero_groups() {
        let m = composite_marginals(&sv(&[0.7, 0.3]), &sv(&[0.8, 0.2]), &sv(&[0.5, -0.5]), 2).unwrap();
        assert_eq!(m.row_sums, vec![1, 1, 1, 1]);
        assert_eq!(m.col_sums, vec![2, 2]);

        // ρ with a zero eigenvalue and ϱ with a zero eigenvalue:
        // D_rm = d_r λ + f_m N − d_r f_m = 1·3 + 1·3 − 1 = 5.
        let m = composite_marginals(
            &sv(&[0.6, 0.4, 0.0]),
            &sv(&[0.9, 0.1, 0.0]),
            &sv(&[1.0, 0.0, -1.0]),
            3,
        )
        .unwrap();
        assert_eq!(m.row_sums, vec![1, 1, 1, 1, 5]);
        assert_eq!(m.total(), 9);
    }

    #[test]
    fn accidental_degeneracy_is_reported() {
        let err = composite_marginals(&sv(&[0.7, 0.3]), &sv(&[0.7, 0.3]), &sv(&[0.5, -0.5]), 2).unwrap_err();
        match err {
            Error::AccidentalDegeneracy(pairs) => assert_eq!(pairs, vec![((0, 1), (1, 0))]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_tables(&[1, 1], &[1, 1]).unwrap().len(), 2);
        assert_eq!(enumerate_tables(&[1, 1, 6], &[4, 4]).unwrap().len(), 4);
        assert_eq!(enumerate_tables(&[10, 10, 10], &[15, 15]).unwrap().len(), 91);
        assert!(matches!(enumerate_tables(&[1, 2], &[1, 1]), Err(Error::MarginalMismatch(_))));
        assert!(matches!(
            enumerate_tables_capped(&[10, 10, 10], &[15, 15], 50),
            Err(Error::EnumerationCap(50))
        ));
    }

    #[test]
    fn enumeration_is_lexicographic_and_valid() {
        let tables = enumerate_tables(&[2, 3, 1], &[3, 1, 2]).unwrap();
        for w in tables.windows(2) {
            assert!(w[0].cells() < w[1].cells());
        }
        for t in &tables {
            assert_eq!(t.row_sums(), vec![2, 3, 1]);
            assert_eq!(t.col_sums(), vec![3, 1, 2]);
        }
    }

    #[test]
    fn critical_values_qubit() {
        let m = CompositeMarginals {
            row_values: vec![0.7, 0.3, 0.0],
            row_sums: vec![1, 1, 6],
            col_values: vec![0.5, -0.5],
            col_sums: vec![4, 4],
        };
        let tables = enumerate_tables(&m.row_sums, &m.col_sums).unwrap();
        let vals = critical_values(&m, &tables).unwrap();
        let want = [0.5, 0.2, -0.2, -0.5];
        for (a, b) in vals.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_values_flat_observable() {
        let m = composite_marginals(&sv(&[0.7, 0.3]), &sv(&[0.8, 0.2]), &sv(&[0.25, 0.25]), 2).unwrap();
        let tables = enumerate_tables(&m.row_sums, &m.col_sums).unwrap();
        assert_eq!(tables.len(), 1);
        let v = critical_values(&m, &tables).unwrap();
        assert!((v[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(count_pure_env(&[1, 1], 2).unwrap(), 4);
        assert_eq!(count_pure_env(&[2], 3).unwrap(), 6);
        for s in 1..6 {
            assert_eq!(count_pure_env(&[1], s).unwrap(), s as u128);
        }
        assert!(count_pure_env(&[1], 0).is_err());
    }

    #[test]
    fn global_hessian_counts() {
        assert_eq!(hessian_count_global(2, 0, 1).unwrap(), 16);
        assert_eq!(hessian_count_global(2, 1, 1).unwrap(), 8);
        assert_eq!(hessian_count_global(3, 1, 3).unwrap(), 0);
        assert!(hessian_count_global(2, 2, 1).is_err());
        assert!(hessian_count_global(2, 0, 0).is_err());
    }

    #[test]
    fn gaussian_estimate_examples() {
        let a = gaussian_count_estimate(&[10, 10, 10], &[15, 15]).unwrap();
        // sqrt(2) * 11^3 / sqrt(2π·60)
        let closed = 2f64.sqrt() * 1331.0 / (2.0 * std::f64::consts::PI * 60.0).sqrt();
        assert!((a - closed).abs() < 1e-9 * closed);
        assert!((a - 96.95).abs() < 0.01);
        assert!(gaussian_count_estimate(&[3], &[3]).is_err());
        assert!(gaussian_count_estimate(&[0, 0], &[0, 0]).is_err());
    }

    #[test]
    fn gaussian_estimate_log_space_matches_small_case() {
        // Rows above 20 exercise the log-gamma path; compare with a direct product.
        let a = gaussian_count_estimate(&[25, 5], &[10, 20]).unwrap();
        let m = 26.0 * 6.0;
        let beta = (25.0 * 27.0 + 5.0 * 7.0) / 6.0;
        let q = 100.0 + 400.0 - 450.0;
        let want = 2f64.sqrt() * m / (2.0 * std::f64::consts::PI * beta).sqrt() * (-q / (2.0 * beta)).exp();
        assert!((a - want).abs() < 1e-9 * want);
    }

    #[test]
    fn asymptotic_zero_temperature() {
        let inputs = CountInputs::new(vec![1, 1], 0, vec![1, 1]);
        for lambda in [4, 10, 100] {
            assert_eq!(asymptotic_count(&inputs, lambda, TemperatureRegime::ZeroT).unwrap(), 4.0);
        }
    }

    #[test]
    fn finite_temperature_matches_replicated_gaussian() {
        // Without a zero group the finite-T formula is the Gaussian estimate of
        // the margins (d_i repeated λ times, λ e_k).
        let inputs = CountInputs::new(vec![2, 1], 0, vec![2, 1]);
        for lambda in [1usize, 2, 5] {
            let rows: Vec<usize> = (0..lambda).flat_map(|_| [2usize, 1]).collect();
            let cols = vec![2 * lambda, lambda];
            let g = gaussian_count_estimate(&rows, &cols).unwrap();
            let a = asymptotic_count(&inputs, lambda, TemperatureRegime::FiniteT).unwrap();
            assert!((a - g).abs() < 1e-9 * g, "λ={lambda}: {a} vs {g}");
        }
        let mut degenerate = inputs.clone();
        degenerate.env_degenerate = true;
        assert!(asymptotic_count(&degenerate, 3, TemperatureRegime::FiniteT).is_err());
    }
}
