//! Ideal triangulations of cusped 3-manifolds, their coverings, and normal
//! surfaces that are not vertex links.

pub mod ball;
pub mod certify;
pub mod covering;
pub mod error;
pub mod hyperbolic;
pub mod io;
pub mod normal;
pub mod perm;
pub mod surface;
pub mod triangulation;

pub use error::{Error, ParseError, Result};
