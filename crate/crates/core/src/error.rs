//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient sphere dimension must be at least 3, got n = {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("s = {s} outside curve domain [{lo}, {hi}]")]
    OutsideDomain { s: f64, lo: f64, hi: f64 },
    #[error("curve radius vanishes near s = {0}; leaf quantities need 1/r")]
    RadiusVanishes(f64),
    #[error("cannot normalize a (near-)zero vector, |v| = {0:e}")]
    ZeroVector(f64),
    #[error("direction is not unit length: |x| - 1 = {0:e}")]
    NotUnit(f64),
    #[error("Lagrangian angle undefined at s = {s}: |e^(i alpha) + <W,x>| = {modulus:e}")]
    AngleUndefined { s: f64, modulus: f64 },
    #[error("flux constant must be finite, got {0}")]
    BadFlux(f64),
    #[error("no interior fixed point: the flux constant vanishes")]
    NoFixedPoint,
    #[error("state left the admissible half-plane: r = {0}")]
    NonPositiveRadius(f64),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("polynomial fit unreliable: {0}")]
    Fit(String),
    #[error("energy level {e} admits no radius at alpha = {alpha} on the requested branch")]
    NoRadiusOnBranch { e: f64, alpha: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
