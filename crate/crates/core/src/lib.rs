//! Fractal tilings from iterated function systems.

pub mod attractor;
pub mod body;
pub mod config;
pub mod error;
pub mod geometry;
pub mod gifs;
pub mod ifs;
pub mod interval;
pub mod linalg;
pub mod mask;
pub mod map;
pub mod presets;
pub mod raster;
pub mod render;
pub mod reversal;
pub mod scalar;
pub mod tiling;
pub mod transform;
pub mod word;

pub use attractor::{PointCloud, RegionApprox};
pub use body::Body;
pub use error::{Error, Result};
pub use geometry::{Polygon, Rect};
pub use ifs::Ifs;
pub use interval::IntervalSet;
pub use linalg::Matrix;
pub use map::{MapSpec, PlaneMap};
pub use raster::Raster;
pub use scalar::{Real, Scalar};
pub use tiling::{Tile, TileKey, Tiling};
pub use word::{InfiniteWord, Word};

pub use num_rational::BigRational;

/// Double precision maps.
pub type Map = MapSpec<f64>;
/// Exact rational maps.
pub type ExactMap = MapSpec<BigRational>;
pub type Ifs64 = Ifs<f64>;
pub type ExactIfs = Ifs<BigRational>;
pub type Intervals = IntervalSet<f64>;
pub type ExactIntervals = IntervalSet<BigRational>;
