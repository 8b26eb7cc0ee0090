//! Perturbation-based out-of-sample extension of kernel eigendecompositions.
//!
//! Leading eigenpairs of a selected submatrix `K^s` of a kernel `K` are
//! extended to approximations of the leading eigenpairs of `K` with first-
//! or second-order truncated perturbation formulas. The Nyström method and
//! its shifted and ensemble variants are provided alongside, as are the
//! eigensolvers, generators and data pipeline the experiments need.

pub mod angles;
pub mod data;
pub mod eigen;
pub mod extension;
pub mod io;
pub mod error;
pub mod generators;
pub mod matrix;
pub mod nystrom;
pub mod perturbation;
pub mod rng;
pub mod tolerance;

pub use angles::{orthonormalize, principal_angle};
pub use eigen::{spectral_norm, sym_eig_full, sym_eig_partial, EigenPairs};
pub use error::{Error, Result};
pub use extension::{pert_extend, ExtensionConfig, ExtensionResult, Selector};
pub use nystrom::{nystrom_extend, NystromResult};
pub use perturbation::{MuPolicy, Order};
pub use matrix::{
    ColBlock, Difference, Shifted, SparseSymmetric, SymOperator, SymmetricDense, SymmetricMatrix,
};
