//! Dynamical topological phase transitions of an impurity qubit dephasing in a
//! linear boson bath: mode banks, geometric phase, Loschmidt amplitude, Fisher
//! zeros and scaling analysis.

pub mod error;
pub mod export;
pub mod fisher;
pub mod geometry;
pub mod grid;
pub mod loschmidt;
pub mod numeric;
pub mod scaling;
pub mod spectrum;

pub use error::{Error, Result};
pub use grid::TimeGrid;
