//! Scaled ABS algorithms for dense linear least squares, the
//! ill-conditioned test-matrix families they are benchmarked on, and the
//! harness that produces comparison tables against QR/SVD baselines.
//!
//! The crate is organized around the experiment pipeline:
//!
//! - [`linalg`]: dense matrix/vector primitives and triangular solves.
//! - [`engine`]: the generic scaled ABS iteration (property-test substrate).
//! - [`solvers`]: the named algorithms — Huang and modified Huang (two
//!   Abaffian representations), implicit QR, and the least-squares Huang
//!   pair with/without the stored triangular factor.
//! - [`baselines`]: Householder QR, column-pivoted QR, and one-sided Jacobi
//!   SVD least-squares solvers; the SVD doubles as the verification oracle.
//! - [`testgen`]: deterministic generation of the IR500/RR100/IDF/IR50
//!   matrix families, near-dependency perturbations, and incompatible
//!   least-squares instances with known solutions.
//! - [`metrics`]: error pairs, pairwise win/near-tie scoreboards, and the
//!   fixed-width result tables with their CSV twins.
//! - [`cli`]: suite configuration, the `run` and `verify` drivers, and the
//!   parallel execution machinery behind the `absls` binary.

pub mod baselines;
pub mod cli;
pub mod engine;
pub mod linalg;
pub mod metrics;
pub mod solvers;
pub mod testgen;
