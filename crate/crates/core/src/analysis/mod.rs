//! Norms, sup estimates, divergence traces and the verifier battery.

mod battery;
mod experiment;
mod grid;
mod quadrature;
mod trace;
mod verify;

pub use battery::{desk, verify_all, VerifyAllOptions, VerifyAllReport, CHECK_GROUPS};
pub use experiment::{coverage_checks, run_experiment, Experiment, ExperimentOutcome, ExperimentParams};
pub use grid::{
    grid_points, sup_on_grid, sup_on_grid_with_probes, GridExtrema, DEFAULT_MARGIN, DEFAULT_STEP,
};
pub use quadrature::{pw1_norm, Pw1Norm, DEFAULT_OVERSAMPLE, MIN_OVERSAMPLE};
pub use trace::{
    divergence_trace, log_normalized_sup, oscillation_trace, trace_model, DivergenceTrace,
    LogRatioRow, OscillationTrace, Perturbation, Precision, ProbePair, TraceConfig, TraceKind,
    TraceModel, TraceRow, MONOTONICITY_SLACK, TRACE_CSV_HEADER,
};
pub use verify::{
    checks_to_csv, CHECKS_CSV_HEADER,
    scan_harmonic_log_bound, verify_harmonic_log_bound, verify_maximal_domination,
    verify_thm1_lower_bound, verify_thm4_decomposition, Check, HarmonicLogBound,
    MaximalDomination, Thm1LowerBound, Thm4Decomposition, DECOMPOSITION_TOLERANCE,
};
