//! Planar Filippov systems and the fold–cusp unfoldings.

pub mod bifurcation;
pub mod error;
pub mod exec;
pub mod families;
pub mod planefield;
pub mod poly;
pub mod retmaps;
pub mod roots;
pub mod switching;
pub mod system;
pub mod trajectory;

pub use error::{Error, Result};
pub use system::{Family, FilippovSystem};
