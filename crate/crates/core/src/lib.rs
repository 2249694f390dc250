// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Control landscapes of open quantum systems described through Kraus maps.
//!
//! An N-level system is coupled to a λ-level environment prepared in `ϱ`; a
//! unitary `U` on the composite space induces the Kraus map
//! `K_{αβ} = sqrt(p_β) ⟨α|U|β⟩` on the system. The objective
//! `J = Tr(U (ρ⊗ϱ) U† (θ⊗I))` is studied as a function on the unitary group
//! ([`landscape`]), counted combinatorially ([`topology`]) and realised with a
//! driven spin-bath model ([`dynamics`]).

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod kraus;
pub mod landscape;
pub mod qmath;
pub mod topology;

pub use error::{Error, Result};
pub use qmath::{ComplexMatrix, DensityOperator, C64};
