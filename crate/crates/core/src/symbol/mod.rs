//! Sharp exponential constants computed from kernels and principal symbols,
//! the spherical Parseval identity, and distribution asymptotics of kernels.

mod asymptotics;
pub(crate) mod constants;
mod kernel_spec;
mod parseval;
mod report;
mod spec;

pub use asymptotics::{distribution_asymptotics, level_set_measure, AsymptoticsOptions, AsymptoticsReport, RegionSpec};
pub use constants::{
    adams_trace_constant, block_closed_form, elliptic_p2_constant, exp_symbol_integral_mc, first_order_vector_constant,
    potential_constant_from_profile, second_order_constant, second_order_profile, spd_power, vector_p2_constant,
    weighted_sum_constant, P2Options, PairFn, PairSet, PointSet, SphereProfile, WeightedSum,
};
pub use kernel_spec::{KernelSpec, PointFn, RadialKernel, VectorFn};
pub use parseval::{spherical_parseval_check, ParsevalFamily, ParsevalReport};
pub use report::{Method, RouteValue, SharpConstantReport};
pub use spec::{r4_blocks, r4_preset, HomogeneousPoly, MatrixField, SphereFn, SymbolFamily, SymbolSpec};

pub use crate::special::riesz_c_d;

/// The closed forms stated for the three `R^4` operators, as printed.
pub mod stated {
    use std::f64::consts::PI;
    use statrs::function::gamma::gamma;

    /// `π⁴/Γ(5/4)⁴`
    pub fn b1() -> f64 {
        PI.powi(4) / gamma(1.25).powi(4)
    }

    /// `64π`
    pub fn b2() -> f64 {
        64.0 * PI
    }

    /// `16π^{5/2}/Γ(3/4)` as printed; the exponential integral of the `P3`
    /// symbol evaluates to `16√2 π²` instead (see README).
    pub fn b3() -> f64 {
        16.0 * PI.powf(2.5) / gamma(0.75)
    }

    /// `32π²`, the Laplacian in `R^4`.
    pub fn laplacian_r4() -> f64 {
        32.0 * PI * PI
    }
}
