//! Exact solutions of the octahedron recurrence (T-system) with stepped
//! surface initial data, through U/V chip networks and their minors.

pub mod error;
pub mod laurent;
pub mod matrix;
pub mod network;
pub mod scalar;
pub mod surface;
pub mod cli;
pub mod tsystem;
pub mod verify;

pub use error::{Error, Result};
pub use laurent::{LaurentError, LaurentPoly, Monomial, VarId, VarTable};
pub use matrix::PolyMatrix;
pub use surface::{Direction, Grid, InitialData, ShadowDomain, SteppedSurface, SurfaceKind, Window};
