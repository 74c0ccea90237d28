//! Analysis and simulation of lateral-inhibition patterning on cell-contact
//! graphs.
//!
//! Each cell runs the same input-output system `x' = f(x, u)`, `y = h(x)`;
//! a cell's input is the average of its neighbours' outputs. The crate
//! computes the random-walk spectrum of the contact graph, the cell's
//! steady-state characteristic `T`, instability of the homogeneous state,
//! period-two orbits of `T` and the checkerboard patterns they induce on
//! bipartite graphs, orthant monotonicity certificates, and simulates the
//! coupled network.

pub mod analysis;
pub mod config;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod monotone;
pub mod ode;
pub mod pipeline;
pub mod sim;

pub use error::{Error, Result};
