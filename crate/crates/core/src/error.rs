// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("accidental degeneracy in the composite spectrum: {0:?}")]
    AccidentalDegeneracy(Vec<((usize, usize), (usize, usize))>),

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("enumeration exceeded the cap of {0} tables")]
    EnumerationCap(usize),

    #[error("point is not critical (gradient norm {0:.3e})")]
    NotCritical(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
