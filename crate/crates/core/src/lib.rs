//! Kaczmarz-family solvers for overdetermined linear systems, including the
//! clustering-accelerated sketched and block variants, together with tools
//! for building row pavings and checking their spectral bounds.
//!
//! The runnable programs under `examples/` walk through each capability.

pub mod bounds;
pub mod cli;
pub mod cluster;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod paving;
pub mod rng;
pub mod sketch;
pub mod solvers;
pub mod stats;
pub mod system;

pub use cluster::{cluster_rows, RowClustering};
pub use datagen::{add_noise, gen_clustered_system, gen_gaussian_system, GenSpec, GeneratedSystem};
pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use paving::{build_cluster_paving, build_random_paving, RowPaving};
pub use sketch::JlSketch;
pub use solvers::{solve, Method, Solver, SolverConfig, SolverState, TraceRecord};
pub use system::LinearSystem;
