//! Measurement-only circuit dynamics of the toric code on a cylinder with a
//! rough top boundary and a smooth bottom boundary.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf2`] and [`pauli`]: bit-packed linear algebra and phase-free Pauli products;
//! * [`lattice`]: the cylinder geometry and its star/plaquette supports;
//! * [`tableau`]: stabilizer states with projective measurement, membership and entropy;
//! * [`protocol`]: the two-layer measurement circuit and trajectory driver;
//! * [`observables`]: spin-glass order, topological entanglement entropy, string operators;
//! * [`oracle`]: a dense state-vector simulator used for cross-checking on tiny lattices;
//! * [`harness`]: ensembles, sweeps, figure datasets and CSV output.

pub mod error;
pub mod gf2;
pub mod harness;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod pauli;
pub mod protocol;
pub mod tableau;

pub use error::{Error, Result};
pub use lattice::{BoundaryTag, LatticeGeometry, LinkDescriptor, Orientation};
pub use observables::{Partition, PartitionKind, PartitionSpec, StringOperator};
pub use pauli::{Basis, Pauli, PauliString};
pub use protocol::{LayerMode, Observers, Protocol, ProtocolConfig, RecoveryMenu, Sample, TrajectoryRecord};
pub use tableau::{Outcome, StabilizerTableau};

/// Version tag embedded in every output file.
pub const VERSION_TAG: &str = concat!(env!("CARGO_PKG_NAME"), "-", env!("CARGO_PKG_VERSION"));
