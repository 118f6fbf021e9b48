//! Sphere-foliated Lagrangian submanifolds of R^2n = C^n.
//!
//! Builds immersions l(s, x) = r(s) e^{i phi(s)} x + V(s) of
//! I x S^{n-1}, evaluates their induced metric, Lagrangian angle, and
//! mean curvature in closed form, verifies those formulas against
//! finite-difference oracles, and classifies the Hamiltonian-stationary
//! members (profile ODE, conserved energy, phase integrals, catalog).

pub mod error;
pub mod foliation;
pub mod geom;
pub mod hs;
pub mod mesh;
pub mod ode;
pub mod oracle;
pub mod phase;
pub mod profile;
pub mod quad;
pub mod report;
pub mod roots;
pub mod sample;

pub use error::{Error, Result};
