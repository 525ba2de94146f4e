//! The IFFL model family: parameters, inputs, states and right-hand sides.
//!
//! The full system couples an inhibitor `x`, an output `y` and a controlled
//! population `u`:
//!
//! ```text
//! x' = -a x + b u
//! y' = c u / x - delta y + V y^n / (K^n + y^n)     (production inhibition)
//! y' = c u - delta x y                             (degradation variant)
//! u' = (lambda - kappa y) u                        (closed loop only)
//! ```
//!
//! In closed loop the ratio `p = u / x` and `y` form an autonomous planar system.

mod input;
mod params;
mod rescale;
mod rhs;
mod state;

pub use input::{InputSignal, SampledInput};
pub use params::{ModelParams, ParamName, Variant};
pub use rescale::{normalize_params, Normalized, Scaling};
pub use rhs::{
    dulac_divergence, hill, hill_derivative, reaction_term_f, rhs_full, rhs_open_loop_p,
    rhs_reduced,
};
pub use state::{FullDerivative, FullState, ReducedDerivative, ReducedState};

pub(crate) use rhs::{reduced_field, rhs_log_coords};
