//! Double-word numbers and their arithmetic.

mod add;
mod config;
mod mul;

pub use add::{
    accurate_add, accurate_add_directed, accurate_add_directed_checked, accurate_add_trace, add, check_directed_sign_condition,
    sloppy_add, sloppy_add_trace, AccurateTrace, SloppyTrace,
};
pub use config::{AddAlgorithm, VariantConfig};
pub use mul::{dw_mul, maa};

use std::fmt;
use std::ops::Neg;

use crate::error::{Error, Result};
use crate::fp::{Dyadic, Float, MiniFloat};

/// The unevaluated sum `hi + lo`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DoubleWord<S> {
    pub hi: S,
    pub lo: S,
}

impl<S: Float> DoubleWord<S> {
    pub fn new(hi: S, lo: S) -> Self {
        DoubleWord { hi, lo }
    }

    pub fn from_hi(hi: S) -> Self {
        DoubleWord { hi, lo: hi.zero_like() }
    }

    /// Exact value `hi + lo`.
    pub fn value(&self) -> Dyadic {
        self.hi.to_dyadic() + self.lo.to_dyadic()
    }

    pub fn mul_pow2(self, k: i32) -> Self {
        DoubleWord { hi: self.hi.mul_pow2(k), lo: self.lo.mul_pow2(k) }
    }

    pub fn to_hex_pair(&self) -> [String; 2] {
        [self.hi.to_hex(), self.lo.to_hex()]
    }
}

impl<S: Float> Neg for DoubleWord<S> {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleWord { hi: -self.hi, lo: -self.lo }
    }
}

impl<S: Float> fmt::Display for DoubleWord<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.hi.to_hex(), self.lo.to_hex())
    }
}

fn split_pair(s: &str) -> Result<(&str, &str)> {
    let mut it = s.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(Error::Parse(format!("expected two hex floats, got {s:?}"))),
    }
}

impl DoubleWord<f64> {
    pub fn parse_hex(s: &str) -> Result<Self> {
        let (a, b) = split_pair(s)?;
        Ok(DoubleWord::new(parse_f64_hex(a)?, parse_f64_hex(b)?))
    }
}

impl DoubleWord<MiniFloat> {
    pub fn parse_hex(p: u32, s: &str) -> Result<Self> {
        let (a, b) = split_pair(s)?;
        Ok(DoubleWord::new(MiniFloat::parse_hex(p, a)?, MiniFloat::parse_hex(p, b)?))
    }
}

/// Parses a hex float and requires it to be exactly a binary64 value.
pub fn parse_f64_hex(s: &str) -> Result<f64> {
    let d = Dyadic::parse_hex(s)?;
    let v = d.to_f64();
    if Dyadic::from_f64(v)? == d {
        Ok(v)
    } else {
        Err(Error::NotRepresentable { precision: 53, value: s.to_string() })
    }
}

/// `min(|x|,|y|)/max(|x|,|y|)` when `x` and `y` have opposite signs, otherwise 0.
pub fn cancellation_ratio<S: Float>(x: S, y: S) -> f64 {
    let (a, b) = (x.to_f64(), y.to_f64());
    if a * b < 0.0 {
        a.abs().min(b.abs()) / a.abs().max(b.abs())
    } else {
        0.0
    }
}

/// Exact test of `cancellation_ratio(x, y) <= 1/2`.
pub fn cancellation_at_most_half<S: Float>(x: S, y: S) -> bool {
    let (a, b) = (x.to_dyadic(), y.to_dyadic());
    if a.signum() * b.signum() >= 0 {
        return true;
    }
    let (a, b) = (a.abs(), b.abs());
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    lo.mul_pow2(1) <= hi
}

/// `|lo| / (u·|hi|)`: 0 when `lo = 0`, infinite when only `hi` is zero.
pub fn overlap_factor<S: Float>(x: &DoubleWord<S>, u: f64) -> f64 {
    if x.lo.is_zero() {
        return 0.0;
    }
    if x.hi.is_zero() {
        return f64::INFINITY;
    }
    x.lo.to_dyadic().abs().ratio_up(&x.hi.to_dyadic().abs()) / u
}

/// Exact test of `|lo| <= o·2^u_exp·|hi|`.
pub fn overlap_within<S: Float>(x: &DoubleWord<S>, o: &Dyadic, u_exp: i64) -> bool {
    x.lo.to_dyadic().abs() <= (o * &x.hi.to_dyadic().abs()).mul_pow2(u_exp)
}

/// `nε/(1-nε)`.
pub fn gamma_bound(n: u64, eps: f64) -> Result<f64> {
    let ne = n as f64 * eps;
    if !(0.0..1.0).contains(&ne) {
        return Err(Error::Domain(format!("gamma_bound needs 0 <= n*eps < 1, got {ne}")));
    }
    Ok(ne / (1.0 - ne))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(cancellation_ratio(1.0, -1.0), 1.0);
        assert_eq!(cancellation_ratio(3.0, -1.0), 1.0 / 3.0);
        assert_eq!(cancellation_ratio(1.0, 1.0), 0.0);
        assert_eq!(cancellation_ratio(0.0, 0.0), 0.0);
        assert!(cancellation_at_most_half(2.0, -1.0));
        assert!(!cancellation_at_most_half(2.0, -1.0000000000000002));
        assert!(cancellation_at_most_half(5.0, 5.0));
    }

    #[test]
    fn overlap_examples() {
        let u = 2f64.powi(-53);
        assert_eq!(overlap_factor(&DoubleWord::new(1.0, u), u), 1.0);
        assert_eq!(overlap_factor(&DoubleWord::new(1.0, 0.0), u), 0.0);
        assert_eq!(overlap_factor(&DoubleWord::new(0.0, u), u), f64::INFINITY);
        assert!(overlap_within(&DoubleWord::new(-4.0, 3.0 * u), &Dyadic::one(), -53));
        assert!(!overlap_within(&DoubleWord::new(-2.0, 3.0 * u), &Dyadic::one(), -53));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_bound(0, 0.1).unwrap(), 0.0);
        let e = 2f64.powi(-53);
        assert_eq!(gamma_bound(1, e).unwrap(), e / (1.0 - e));
        assert_eq!(gamma_bound(2, 0.25).unwrap(), 1.0);
        assert!(gamma_bound(4, 0.25).is_err());
        assert!(gamma_bound(5, 0.25).is_err());
    }

    #[test]
    fn hex_round_trip() {
        let x = DoubleWord::new(0.1, 0.1 * 2f64.powi(-54));
        assert_eq!(DoubleWord::<f64>::parse_hex(&x.to_string()).unwrap(), x);
        let m = DoubleWord::new(MiniFloat::from_f64(6, 1.5).unwrap(), MiniFloat::from_f64(6, -2f64.powi(-9)).unwrap());
        assert_eq!(DoubleWord::<MiniFloat>::parse_hex(6, &m.to_string()).unwrap(), m);
        assert!(DoubleWord::<f64>::parse_hex("0x1p0").is_err());
        assert!(parse_f64_hex("0x20000000000001p0").is_err());
    }
}
