//! Extremal sequences for the exponential inequalities: the `Φ_m` family
//! and its exponential integrals, the Moser sequence, and the logarithmic
//! kernel counterexample.

pub mod family;
pub mod grid;
pub mod moser;
pub mod sweep;

pub use family::{
    check_kernel_oscillation, check_truncation, truncate_to_sup, OscillationReport, Discretization, ExtremalFamily, FamilyKind,
    TruncationReport, MeshOptions, NormLawReport,
};
pub use grid::{cell_integral, disc_space, planar_riesz_operator, Grid1D, RadialOperator1D};
pub use moser::{build_moser_um, moser_norm_regression, moser_spline, potential_coefficient, MoserNormReport, MoserParams, MoserProfile};
pub use sweep::{
    classify, exp_integral, exp_integral_of_image, log_counterexample, sharpness_sweep, AlphaVerdict,
    CounterexampleReport, CounterexampleRow, SweepReport, Verdict, COUNTEREXAMPLE_R0, GROWTH_THETA,
};
