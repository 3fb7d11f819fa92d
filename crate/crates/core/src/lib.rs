//! Numerical laboratory for the sublinear Dirichlet problem
//!
//! ```text
//! -Δu = m(x) f(u)  in Ω,   u > 0 in Ω,   u = 0 on ∂Ω
//! ```
//!
//! with a sign-changing weight `m` and a nonlinearity `f` trapped in the
//! envelope `k₁ξᵖ ≤ f(ξ) ≤ k₂ξᵖ`, `0 < p < 1`. The crate discretizes the
//! problem on intervals, rectangles and disks and issues existence
//! certificates (glued subsolution plus monotone iteration) and nonexistence
//! certificates (radial barrier on balls where `m ≤ 0`).
//!
//! Layout:
//! - [`geometry`]: domains, grids, distance fields, Ω₀/Ω₁ partitions, ball search
//! - [`weights`]: weight fields, norms, the H1 nonlinearity family
//! - [`elliptic`]: discrete Laplacian, Dirichlet solves, Green operator, eigenpairs
//! - [`sublinear`]: monotone sub/supersolution iteration
//! - [`constructions`]: certificate pipelines
//! - [`cli`]: scenario files, reports, sweeps

pub mod cli;
pub mod constructions;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod geometry;
pub mod sublinear;
pub mod weights;

pub use error::{Error, Result};
pub use field::FieldFunction;
