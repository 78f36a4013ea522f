//! Truss sizing optimization.
//!
//! The crate couples a linear-elastic truss analyzer ([`fem`]) with a penalized
//! weight objective ([`objective`]) and three optimizers sharing one
//! budget-accounting contract: the spontaneous fruit-fly optimizer ([`sfoa`]),
//! differential evolution and particle swarm ([`baselines`]). Six classic sizing
//! problems ship embedded ([`benchmarks`]); [`harness`] runs seeded campaigns,
//! aggregates statistics and writes reports.
//!
//! ```
//! use trussopt::benchmarks::load_problem;
//! use trussopt::objective::Mode;
//!
//! let problem = load_problem("10bar").unwrap();
//! let aede = [33.5, 1.62, 22.9, 14.2, 1.62, 1.62, 7.97, 22.9, 22.0, 1.62];
//! let eval = problem.evaluate_design(&aede, Mode::Discrete).unwrap();
//! assert!(eval.feasible);
//! assert!((eval.weight - 5490.738).abs() < 0.1);
//! ```

pub mod baselines;
pub mod benchmarks;
pub mod error;
pub mod exec;
pub mod fem;
pub mod harness;
pub mod objective;
pub mod optimizer;
pub mod sfoa;

pub use error::{Error, Result};
pub use exec::Execution;

/// Version string embedded in reports: package version plus `git describe` when available.
pub fn version() -> String {
    match option_env!("TRUSSOPT_GIT_DESCRIBE") {
        Some(d) if !d.is_empty() => format!("{} ({d})", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}
