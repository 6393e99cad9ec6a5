//! Spherical and generalized spherical Radon transforms of orientation
//! density functions on the unit quaternions.

pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod io;
pub mod kernels;
mod linalg;
pub mod quadrature;
pub mod reconstruction;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Dir3, GreatCircle, Quat, SmallCircle, TorusSpec};
pub use kernels::{KernelKind, KernelSpec};
pub use quadrature::Rules;
pub use transforms::Odf;
