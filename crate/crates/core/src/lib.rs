//! Response strengths of non-Hermitian Hamiltonians at exceptional points:
//! verification, closed-form models, perturbation/excitation/dynamics
//! experiments and seeded Monte Carlo ensembles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod document;
pub mod ensemble;
pub mod ep;
pub mod error;
pub mod linalg;
pub mod models;
pub mod response;

pub use error::{Error, Result};
