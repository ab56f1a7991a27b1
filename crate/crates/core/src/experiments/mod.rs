//! Reproducible numerical harnesses: constrained-inequality trials on
//! constructed state families, the penalized conjecture search and the
//! ray-approach probe.

pub mod conjecture;
pub mod draw;
pub mod families;
pub mod nelder_mead;
pub mod probe;
pub mod trial;

pub use conjecture::{
    conjecture_objective, search_conjecture_min, Candidate, ConjectureParams, SearchConfig, SearchReport,
    CANDIDATE_TOL,
};
pub use draw::{Draw, Recorder, Replay};
pub use families::{draw_prop2_spec, generate, Family, ReplaySpec, GENERAL_MAX_RANK};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use probe::{
    direction_distance, distance_to_angle, library, ray_approach_probe, LibraryState, ProbeConfig, ProbeReport,
    ProbeSource,
};
pub use trial::{
    evaluate_theorem1, reproduce_trial, run_theorem1_trial_suite, theorem1_functionals, TrialConfig, TrialOutcome,
    TrialReport, DEFAULT_CONSTRAINT_TOL, DEFAULT_TOL,
};
