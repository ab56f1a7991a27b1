//! Density matrices on tensor products of finite-dimensional parties:
//! marginals, von Neumann entropies in bits, purification, sampling and the
//! structured constructions used by the experiments.

pub mod constructions;
pub mod json;
pub mod linalg;
pub mod sample;
pub mod state;

pub use constructions::{
    apply_recovery_map, bell_state, block_direct_sum, construct_prop2_state, construct_remark1_state, ghz_state,
    remark1_control, Prop2Block, Prop2Spec, RecoveryMapSpec, RecoverySector, Remark1Block,
    Remark1Spec,
};
pub use json::{density_to_json, state_from_json};
pub use sample::{random_state, sample_random_state, stream_rng};
pub use state::{
    entropy_vector, entropy_vector_of_pure, partial_trace, purify, trace_distance, von_neumann_entropy, CMatrix,
    DensityMatrix,
};
