//! Learning dynamical systems from data with trainable basis dictionaries.
//!
//! The crate fits three model classes by alternating between a closed-form or
//! gradient update of the linear coefficients and Adam updates of the basis
//! parameters:
//!
//! * Koopman operator approximation from lagged snapshot pairs, scored by the
//!   VAMP-2 criterion ([`koopman`]),
//! * sparse regression of ODE right-hand sides from state/derivative pairs
//!   ([`sysid`]),
//! * sparse recovery of scalar PDE right-hand sides from space-time grids
//!   (the PDE-library half of [`sysid`]).
//!
//! Supporting modules provide the dense numeric kernel ([`linalg`]), the
//! basis-function families ([`dictionary`]), first-order optimizers
//! ([`optimizers`]), data generators for the bundled benchmark systems
//! ([`simulate`]), and model/dataset persistence ([`model_io`]).

pub mod benchmarks;
pub mod dictionary;
pub mod koopman;
pub mod linalg;
pub mod model_io;
pub mod optimizers;
pub mod presets;
pub mod simulate;
pub mod sysid;

pub use dictionary::{BasisSpec, Dictionary};
pub use koopman::KoopmanModel;
pub use linalg::{ComplexSpectrum, Matrix, Vector};
pub use simulate::TrajectoryData;
pub use sysid::{GridField, PdeModel, SindyModel};
