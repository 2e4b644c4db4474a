pub mod error;
pub mod exact;
pub mod experiment;
pub mod fast_solver;
pub mod geometry;
pub mod gmres;
pub mod io;
pub mod jet;
pub mod jumps;
pub mod kfbi;
pub mod mac;
pub mod motion;
pub mod potentials;

pub use error::{KfbiError, Result};

/// Points and vectors in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
