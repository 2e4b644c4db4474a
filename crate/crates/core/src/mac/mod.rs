//! MAC grid layout, difference operators and error norms.

mod field;
mod grid;
pub mod norms;
pub mod ops;

pub use field::{MacField, WallData};
pub use grid::{Component, StaggeredGrid, WallClosure};
pub use norms::{compute_errors, observed_order, ErrorReport};
pub use ops::{apply_difference, Difference};
