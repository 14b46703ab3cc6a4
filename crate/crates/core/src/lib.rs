//! Numerical laboratory for weighted weak-type inequalities on dyadic meshes.

pub mod appendix;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod operators;
pub mod quad;
pub mod sample;
pub mod sparse;
pub mod weaktype;
pub mod weights;

#[cfg(test)]
mod proptests;

pub use error::{Error, Interval, Result};
pub use grid::{
    average, enumerate_cubes, shifted_grids, smallest_containing_cube, CellCube, CellGrid,
    CellSet, Cube, DyadicGrid, Mesh, MeshFunction,
};
pub use quad::Quadrature;
pub use weights::{CharacteristicReport, PowerLog, SampledWeight, ScalarWeight, SearchSpace};
pub use matrix::{MatrixWeight, ReducingMatrix, VectorMeshFunction};
