//! Finite-element simulation of a thermoviscoelastic thermistor in
//! frictional contact, advanced by a time-retarded staggered scheme.

pub mod assembly;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod friction;
pub mod linalg;
pub mod materials;
pub mod mesh;
pub mod scheme;

pub use driver::RunConfig;
pub use error::{Error, Result};
pub use materials::{default_ptc_model, validate_assumptions, ValidationOptions, ValidationReport};
pub use mesh::{BoundaryTag, DofMap, Mesh, SideTags};
pub use scheme::{run_cascade, Models, Simulation, SolverConfig, SystemState};
