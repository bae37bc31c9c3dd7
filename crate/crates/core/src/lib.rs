//! Sparsest point in a positive definite ellipsoid.
//!
//! Given `Q` positive definite, a center `c` and a radius `gamma > 0`, find
//! the `x` with the fewest nonzeros satisfying `(x - c)^T Q (x - c) <= gamma`.
//!
//! The crate provides an exact branch and bound ([`bnb`]), two convex lower
//! bounds ([`relax_cont`] and [`relax_diag`]), closed-form approximation
//! bounds ([`bounds`]) and reproducible instance ensembles ([`generate`]).
//! The runnable programs under `examples/` walk through each piece:
//!
//! ```text
//! cargo run --release --example feasibility
//! cargo run --release --example relaxations
//! cargo run --release --example branch_and_bound
//! cargo run --release --example theory_bounds
//! cargo run --release --example ensembles
//! cargo run --release --example approximation_ratios
//! cargo run --release --example node_counts
//! ```

pub mod bench;
pub mod bnb;
pub mod bounds;
pub mod cli;
pub mod diag_exact;
pub mod error;
pub mod generate;
pub mod instance;
pub mod linalg;
pub mod relax_cont;
pub mod relax_diag;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Instance, Subproblem};
pub use linalg::Matrix;
