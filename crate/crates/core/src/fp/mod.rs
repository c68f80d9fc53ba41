//! Floating-point model: exact dyadic values, precision-`p` floats with
//! unbounded exponent, and the arithmetic backends built on them.

mod dyadic;
mod engine;
mod minifloat;

pub use dyadic::Dyadic;
pub use engine::{mf_add, mf_fma, mf_mul, mf_sub, Arith, DirectionLedger, Float, Native, SoftEngine};
pub use minifloat::{
    enumerate, enumerate_positive, round, Direction, MiniFloat, RoundingMode, RoundingSpec, MAX_PRECISION,
    MIN_PRECISION,
};
