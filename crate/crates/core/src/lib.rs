//! Multi-drone mission planning toolkit.
//!
//! The crate covers the full pipeline from a mission description to solved
//! routes:
//!
//! - [`instance`]: problem data model and JSON file format, plus the
//!   travelling-salesman special case.
//! - [`milp`]: graph rewriting and mixed-integer linear program construction
//!   with big-M linearization gadgets and a route validator.
//! - [`qubo`]: compilation of a MILP into a quadratic unconstrained binary
//!   optimisation problem via binary expansion and squared penalties.
//! - [`solvers`]: simulated annealing, exhaustive search, route decoding and
//!   the iterative decomposition pipeline.
//! - [`quantum`]: a permutation-subspace statevector simulator for the
//!   time-indexed TSP Hamiltonian, the Q-SWAP algorithm and a
//!   sorting-network VQE ansatz.

pub mod error;
pub mod instance;
pub mod milp;
pub mod qubo;
pub mod quantum;
pub mod samples;
pub mod solvers;

pub use error::Error;
pub use instance::{DroneSpec, EdgeSpec, MissionInstance, NodeKind, NodeSpec, TspInstance};
pub use milp::{LinearConstraint, MilpModel, RouteSet, VarSpec};
pub use qubo::{PenaltyWeights, Qubo};
pub use quantum::{PermutationState, SortingNetwork, SwapPair, TspHamiltonian};
pub use solvers::{AnnealSchedule, SolveResult};
