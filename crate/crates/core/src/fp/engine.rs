//! Scalar backends.
//!
//! The error-free transformations and double-word algorithms are written once
//! against [`Arith`]. [`Native`] runs them on hardware binary64 in
//! round-to-nearest; [`SoftEngine`] runs them at any precision and rounding,
//! including a different direction for every single operation.

use std::fmt::Debug;
use std::ops::Neg;

use super::dyadic::Dyadic;
use super::minifloat::{self, check_precision, Direction, MiniFloat, RoundingMode, RoundingSpec};
use crate::error::{Error, Result};

/// Values a backend computes with.
pub trait Float: Copy + PartialOrd + Neg<Output = Self> + Debug {
    fn zero_like(self) -> Self;
    fn abs(self) -> Self;
    fn is_zero(self) -> bool;
    fn to_dyadic(self) -> Dyadic;
    /// Binary64 approximation (exact for the precisions used in sweeps).
    fn to_f64(self) -> f64;
    /// Exact scaling by `2^k` (unbounded exponent; binary64 callers keep it in range).
    fn mul_pow2(self, k: i32) -> Self;
    fn to_hex(self) -> String {
        self.to_dyadic().to_string()
    }
}

impl Float for f64 {
    fn zero_like(self) -> f64 {
        0.0
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
    fn to_dyadic(self) -> Dyadic {
        Dyadic::from_f64(self).expect("finite binary64 value")
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn mul_pow2(self, k: i32) -> f64 {
        self * 2f64.powi(k)
    }
}

impl Float for MiniFloat {
    fn zero_like(self) -> MiniFloat {
        MiniFloat::zero(self.precision())
    }
    fn abs(self) -> MiniFloat {
        MiniFloat::abs(self)
    }
    fn is_zero(self) -> bool {
        MiniFloat::is_zero(self)
    }
    fn to_dyadic(self) -> Dyadic {
        MiniFloat::to_dyadic(self)
    }
    fn to_f64(self) -> f64 {
        MiniFloat::to_f64(self)
    }
    fn mul_pow2(self, k: i32) -> MiniFloat {
        self.scale(i64::from(k))
    }
}

/// Rounded scalar arithmetic. Negation is exact and not an operation.
pub trait Arith {
    type Scalar: Float;

    fn add(&mut self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;

    fn sub(&mut self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar {
        self.add(a, -b)
    }

    fn mul(&mut self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;

    /// `a·b + c` with a single rounding.
    fn fma(&mut self, a: Self::Scalar, b: Self::Scalar, c: Self::Scalar) -> Self::Scalar;

    /// `(max, min)` by absolute value; ties keep the argument order.
    fn mag_select(&mut self, a: Self::Scalar, b: Self::Scalar) -> (Self::Scalar, Self::Scalar) {
        if b.abs() > a.abs() {
            (b, a)
        } else {
            (a, b)
        }
    }

    /// Veltkamp splitting constant `2^ceil(p/2) + 1`.
    fn split_constant(&self) -> Self::Scalar;

    fn precision(&self) -> u32;

    /// Unit roundoff of the active rounding.
    fn unit_roundoff(&self) -> f64;
}

/// Hardware binary64, round-to-nearest ties-to-even.
#[derive(Copy, Clone, Debug, Default)]
pub struct Native;

impl Arith for Native {
    type Scalar = f64;

    #[inline(always)]
    fn add(&mut self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline(always)]
    fn sub(&mut self, a: f64, b: f64) -> f64 {
        a - b
    }
    #[inline(always)]
    fn mul(&mut self, a: f64, b: f64) -> f64 {
        a * b
    }
    #[inline(always)]
    fn fma(&mut self, a: f64, b: f64, c: f64) -> f64 {
        a.mul_add(b, c)
    }
    #[inline(always)]
    fn mag_select(&mut self, a: f64, b: f64) -> (f64, f64) {
        if b.abs() > a.abs() {
            (b, a)
        } else {
            (a, b)
        }
    }
    fn split_constant(&self) -> f64 {
        134217729.0
    }
    fn precision(&self) -> u32 {
        53
    }
    fn unit_roundoff(&self) -> f64 {
        f64::EPSILON / 2.0
    }
}

/// Per-mode count of roundings an engine has performed.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct DirectionLedger {
    counts: [u64; 4],
}

impl DirectionLedger {
    pub fn count(&self, mode: RoundingMode) -> u64 {
        self.counts[mode.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// True if every rounding so far used `mode`.
    pub fn only(&self, mode: RoundingMode) -> bool {
        self.total() == self.count(mode)
    }
}

/// Software floating point at precision `p` with unbounded exponent.
#[derive(Clone, Debug)]
pub struct SoftEngine {
    prec: u32,
    spec: RoundingSpec,
    cursor: usize,
    ledger: DirectionLedger,
    fault: Option<Error>,
}

impl SoftEngine {
    pub fn new(p: u32, spec: RoundingSpec) -> Result<SoftEngine> {
        check_precision(p)?;
        Ok(SoftEngine { prec: p, spec, cursor: 0, ledger: DirectionLedger::default(), fault: None })
    }

    pub fn with_mode(p: u32, mode: RoundingMode) -> Result<SoftEngine> {
        SoftEngine::new(p, RoundingSpec::new(mode))
    }

    /// Faithful rounding driven by `directions`, consumed in execution order.
    pub fn faithful(p: u32, directions: Vec<Direction>) -> Result<SoftEngine> {
        SoftEngine::new(p, RoundingSpec::faithful(directions))
    }

    pub fn spec(&self) -> &RoundingSpec {
        &self.spec
    }

    pub fn ledger(&self) -> DirectionLedger {
        self.ledger
    }

    /// Number of roundings performed so far.
    pub fn roundings(&self) -> usize {
        self.ledger.total() as usize
    }

    /// Replaces the direction sequence and rewinds it.
    pub fn set_directions(&mut self, directions: Vec<Direction>) {
        self.spec.directions = Some(directions);
        self.cursor = 0;
    }

    /// Rewinds the direction cursor and clears the ledger and any fault.
    pub fn reset(&mut self) {
        self.cursor = 0;
        self.ledger = DirectionLedger::default();
        self.fault = None;
    }

    /// First configuration or usage fault raised since the last reset.
    pub fn check(&self) -> Result<()> {
        match &self.fault {
            Some(e) => Err(e.clone()),
            None => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> Result<MiniFloat> {
        MiniFloat::from_f64(self.prec, x)
    }

    fn next_mode(&mut self) -> RoundingMode {
        let mode = match &self.spec.directions {
            None => self.spec.mode,
            Some(d) => match d.get(self.cursor) {
                Some(dir) => {
                    self.cursor += 1;
                    dir.mode()
                }
                None => {
                    self.fault.get_or_insert(Error::DirectionsExhausted { used: self.cursor });
                    self.spec.mode
                }
            },
        };
        self.ledger.counts[mode.index()] += 1;
        mode
    }

    fn operand(&mut self, x: MiniFloat) {
        if x.precision() != self.prec && !x.is_zero() {
            self.fault.get_or_insert(Error::PrecisionMismatch { left: self.prec, right: x.precision() });
        }
    }
}

impl Arith for SoftEngine {
    type Scalar = MiniFloat;

    fn add(&mut self, a: MiniFloat, b: MiniFloat) -> MiniFloat {
        self.operand(a);
        self.operand(b);
        let mode = self.next_mode();
        minifloat::add_rounded(self.prec, mode, a, b)
    }

    fn mul(&mut self, a: MiniFloat, b: MiniFloat) -> MiniFloat {
        self.operand(a);
        self.operand(b);
        let mode = self.next_mode();
        minifloat::mul_rounded(self.prec, mode, a, b)
    }

    fn fma(&mut self, a: MiniFloat, b: MiniFloat, c: MiniFloat) -> MiniFloat {
        self.operand(a);
        self.operand(b);
        self.operand(c);
        let mode = self.next_mode();
        minifloat::fma_rounded(self.prec, mode, a, b, c)
    }

    fn split_constant(&self) -> MiniFloat {
        let s = self.prec.div_ceil(2);
        MiniFloat::from_parts(self.prec, false, (1u64 << s) + 1, 0).expect("2^s+1 fits in p bits")
    }

    fn precision(&self) -> u32 {
        self.prec
    }

    fn unit_roundoff(&self) -> f64 {
        self.spec.unit_roundoff(self.prec)
    }
}

fn same_precision(a: MiniFloat, b: MiniFloat) -> Result<u32> {
    if a.is_zero() {
        return Ok(b.precision());
    }
    if b.is_zero() || a.precision() == b.precision() {
        Ok(a.precision())
    } else {
        Err(Error::PrecisionMismatch { left: a.precision(), right: b.precision() })
    }
}

fn one_shot(p: u32, spec: &RoundingSpec, f: impl FnOnce(&mut SoftEngine) -> MiniFloat) -> Result<MiniFloat> {
    let mut e = SoftEngine::new(p, spec.clone())?;
    let r = f(&mut e);
    e.check()?;
    Ok(r)
}

/// Correctly rounded `a + b`.
pub fn mf_add(a: MiniFloat, b: MiniFloat, spec: &RoundingSpec) -> Result<MiniFloat> {
    let p = same_precision(a, b)?;
    one_shot(p, spec, |e| e.add(a, b))
}

pub fn mf_sub(a: MiniFloat, b: MiniFloat, spec: &RoundingSpec) -> Result<MiniFloat> {
    let p = same_precision(a, b)?;
    one_shot(p, spec, |e| e.sub(a, b))
}

pub fn mf_mul(a: MiniFloat, b: MiniFloat, spec: &RoundingSpec) -> Result<MiniFloat> {
    let p = same_precision(a, b)?;
    one_shot(p, spec, |e| e.mul(a, b))
}

/// `a·b + c` rounded once.
pub fn mf_fma(a: MiniFloat, b: MiniFloat, c: MiniFloat, spec: &RoundingSpec) -> Result<MiniFloat> {
    let p = same_precision(a, b)?;
    let p = if a.is_zero() && b.is_zero() { same_precision(c, MiniFloat::zero(p))? } else { p };
    if !c.is_zero() && c.precision() != p {
        return Err(Error::PrecisionMismatch { left: p, right: c.precision() });
    }
    one_shot(p, spec, |e| e.fma(a, b, c))
}
