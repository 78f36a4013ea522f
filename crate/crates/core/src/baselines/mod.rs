//! Reference optimizers sharing the [`Objective`](crate::optimizer::Objective)
//! and budget contract of the fruit-fly optimizer.

pub mod de;
pub mod pso;

pub use de::{De, DeParams};
pub use pso::{Pso, PsoParams, PsoTrace};
