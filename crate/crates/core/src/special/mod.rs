//! Shared numeric primitives: modified Bessel functions and quasi-random
//! sequences. Everything here is pure and re-entrant.

mod bessel;
mod sobol;

pub use bessel::{
    bessel_a, bessel_i_signed, ln_factorial, log_bessel_i, log_bessel_i_over_xm,
};
pub use sobol::{sobol_2d, Sobol2d};
