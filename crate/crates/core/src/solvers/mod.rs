//! Classical solvers: simulated annealing and exhaustive search over QUBOs,
//! route decoding, and the iterative decomposition pipeline.

mod anneal;
mod brute;
mod decode;
mod pipeline;
mod search;

pub use anneal::{simulated_anneal, AnnealSchedule, SolveResult};
pub use brute::{brute_force, brute_force_capped, brute_force_milp, BRUTE_FORCE_BIT_CAP};
pub use decode::{decode_routes, routes_from_assignment, structural_fixing, DecodeOutcome};
pub use pipeline::{solve_pipeline, PipelineConfig, PipelineResult, StageReport};
pub use search::{exact_milp_min, SEARCH_NODE_CAP};
