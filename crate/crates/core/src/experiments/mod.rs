//! Convergence studies and the verification suite behind the command-line tool.

mod config;
mod study;
mod verify;

pub use config::{ExperimentConfig, ProblemFile};
pub use study::{
    observed_order, plot_series, records_to_csv, run_convergence_study, write_study, CellFailure, ErrorRecord,
    OrderEstimate, StudyOutcome, CSV_HEADER,
};
pub use verify::{
    dissipativity, fixed_mesh_orders, global_order, homogeneous_problem, lemma_check, local_error_order,
    p_nonvanishing, recursion_identity, recursion_identity_with, run_verification_suite, stability_bounded,
    stability_equivalence, stepper_sanity, theorem22_checks, theorem24_checks, CheckOutcome, Relation,
    VerificationReport, GAMMAS, THEOREM22_THETAS, THEOREM24_THETAS,
};
