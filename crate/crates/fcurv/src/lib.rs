//! Fractal curvature analysis of binary images.
//!
//! The crate rasterizes attractors of planar iterated function systems,
//! measures Minkowski functionals (area, boundary length, Euler number) of
//! the dilated images across a schedule of radii, and estimates fractal
//! dimension and fractal total curvatures from the growth of those
//! functionals on the log-log scale. Exact curvatures of selected
//! self-similar sets are computed analytically for validation.
//!
//! Pipeline: [`ifs::chaos_game`] renders a set, [`raster::distance_transform`]
//! plus [`raster::dilate`] realize the parallel sets,
//! [`minkowski::measure_profile`] produces per-radius functional samples, and
//! the [`estimators`] module turns a profile into dimension and curvature
//! estimates. [`theory`] supplies the exact reference values.

pub mod error;
pub mod estimators;
pub mod ifs;
pub mod minkowski;
pub mod raster;
pub mod theory;

pub use error::{Error, Result};
