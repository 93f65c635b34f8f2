//! Error norms, convergence studies and linear stability of constant states.
mod convergence;
mod growth;
mod norms;
mod stability;

pub use convergence::{
    convergence_study, fit_line, validate_ladder, ConvergenceReport, LadderRow, LineFit,
};
pub use growth::{
    count_peaks, growth_rate_measure, mode_amplitude, pattern_onset, relative_deviation, GrowthFit,
    LINEAR_REGIME_CAP, MIN_FIT_SNAPSHOTS, MODE_FLOOR,
};
pub use norms::{aux_error_norms, error_norms, ErrorReport};
pub use stability::{
    critical_mu, dispersion_curve, dispersion_lambda, fourier_coefficient,
    fourier_coefficient_numeric, relative_residual, three_component_lambda, two_component_eigs,
    DispersionCurve, Linearization, ThreeComponentEigs, TwoComponentEigs, OMEGA_SAMPLES,
};
