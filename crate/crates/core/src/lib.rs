//! Interacting random walkers that estimate the Fiedler vector.
//!
//! Two groups of `n` walkers move on a graph according to a CTMC kernel `Q`
//! (by default `Q = -L`). Each pair of opposite-group walkers sharing a node
//! fires at rate `kappa / n`, killing one of the two, chosen with equal
//! probability. The victim respawns at the position of a uniformly chosen
//! walker of its own group.
//! The time-averaged density difference `z_hat = x_hat - y_hat` converges to
//! a multiple of the second eigenvector of `-Q`.
//!
//! Modules:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | graphs, Laplacians, edge-list parsing, cuts, node removal |
//! | [`kernel`] | CTMC kernels, stationary distributions, detailed balance |
//! | [`spectral`] | Jacobi eigensolver, Fiedler pairs, RQ/CS metrics, sign cuts |
//! | [`simulator`] | exact event-driven simulation of the walker process |
//! | [`ode`] | fluid-limit ODE, Lyapunov function, Jacobian, deviation bound |
//! | [`harness`] | experiment configs, multi-run metrics, CSV reporting |

pub mod error;
pub mod graph;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod ode;
pub mod rng;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Graph, NodeSet};
pub use kernel::{Kernel, PiInnerProduct};
pub use spectral::SpectralResult;
