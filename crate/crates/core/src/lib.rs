//! Radiation of a charge uniformly accelerated by a constant electric field,
//! computed for finite emission windows.

pub mod error;
pub mod io;
pub mod kinematics;
pub mod photon_stats;
pub mod quadrature;
pub mod radiation;
pub mod specfun;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
pub use kinematics::{Endpoint, Interval, ReducedMode, WaveVector, Window};
pub use num_complex::Complex64;
pub use quadrature::{KGrid, QuadResult, QuadSpec};
pub use units::{derive_constants, DerivedConstants, SourceConfig, UnitSystem};
