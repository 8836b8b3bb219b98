//! Explicit solutions of the heavenly and complex Monge–Ampère systems, with
//! numerical checks of their PDEs, Legendre links, curvature, symmetry
//! algebra and differential invariants.
//!
//! Runnable examples (`cargo run --example <name>`):
//!
//! - `jets`: multivariate truncated Taylor arithmetic
//! - `expressions`: parsing parameter functions
//! - `families`: building the explicit potentials
//! - `residuals`: PDE residuals along the reduction chain
//! - `legendre`: the two Legendre transforms
//! - `curvature`: metric, curvature and chirality
//! - `singularity_scan`: Δ scans over σ
//! - `bracket_table`: generator commutators
//! - `noninvariance`: symmetry non-invariance witnesses
//! - `invariants`: differential invariants and flows
//! - `verify_config`: the verification harness

pub mod cli;
pub mod fields;
pub mod foliation;
pub mod geometry;
pub mod holofunc;
pub mod jets;
pub mod legendre;
pub mod pde;
pub mod symmetry;
