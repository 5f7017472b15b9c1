//! Random walks in random potentials: exact oracles, certified brackets,
//! Lyapunov norms, and the convex phase picture of the tilted path measures.

pub mod convex_phase;
pub mod error;
pub mod exec;
pub mod lattice;
pub mod lyapunov;
pub mod numerics;
pub mod path_measures;
pub mod potential;
pub mod two_point;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
