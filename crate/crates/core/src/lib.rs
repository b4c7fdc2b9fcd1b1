//! Federation of autonomous spatial databases over an information-centric
//! network.

pub mod federation;
pub mod geo;
pub mod icn;
pub mod index;
pub mod name;
pub mod sim;
pub mod store;

/// Double-precision point, the coordinate type used by the federation.
pub type Point = geo::Point<f64>;
/// Double-precision rectangle.
pub type Rect = geo::Rect<f64>;
/// Single-precision point.
pub type Point32 = geo::Point<f32>;
/// Single-precision rectangle.
pub type Rect32 = geo::Rect<f32>;
/// Exact tile areas and costs in degree².
pub type ExactArea = num_rational::Ratio<i64>;

pub use geo::{Grid, Tile};
pub use name::Name;
