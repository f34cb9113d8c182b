use thiserror::Error;

use crate::trajectory::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Lie derivative order {0} is outside 1..=3")]
    LieOrder(usize),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("all Lie derivatives vanish at ({x}, {y}); cannot pick a launch side")]
    DegenerateLaunch { x: f64, y: f64 },

    #[error("sliding field undefined at x = {x}: X.f = Y.f, so r(q) is parallel to the switching line")]
    SingularSlidingField { x: f64 },

    #[error("{what} = {value} is outside the admissible domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("bump construction failed: property {property} violated at x = {abscissa}")]
    BumpConstruction {
        property: &'static str,
        abscissa: f64,
    },

    #[error("two trajectory events closer than 1e-12 near t = {time}")]
    EventResolution {
        time: f64,
        partial: Box<Trajectory>,
    },

    #[error("more than {limit} events in one trajectory; aborting")]
    Chattering { limit: usize, partial: Box<Trajectory> },

    #[error("{0} not found")]
    NotFound(String),

    #[error("closed-form and flow-composed maps disagree by {gap:e} at x = {x}")]
    CrossCheck { x: f64, gap: f64 },
}
