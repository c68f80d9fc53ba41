//! Double-word intervals whose lower endpoints are computed entirely in RD
//! and upper endpoints entirely in RU.
//!
//! [`IntervalEngine`] is the reference implementation on the software
//! engine. Stable Rust offers no way to change the hardware rounding
//! direction, so the binary64 functions in [`native`] compute endpoints in
//! round-to-nearest and widen them outward by an error bound instead.

use std::cmp::Ordering;
use std::fmt;

use crate::dw::{accurate_add_directed, dw_mul, sloppy_add, DoubleWord};
use crate::eft::TwoSumImpl;
use crate::error::{Error, Result};
use crate::fp::{Arith, DirectionLedger, Dyadic, Float, MiniFloat, RoundingMode, SoftEngine};

/// `[lo, hi]` with double-word endpoints.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DWInterval<S> {
    pub lo: DoubleWord<S>,
    pub hi: DoubleWord<S>,
}

impl<S: Float> DWInterval<S> {
    pub fn new(lo: DoubleWord<S>, hi: DoubleWord<S>) -> Result<Self> {
        if lo.value() > hi.value() {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(DWInterval { lo, hi })
    }

    pub fn point(x: DoubleWord<S>) -> Self {
        DWInterval { lo: x, hi: x }
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo.value() <= v && v <= &self.hi.value()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &DWInterval<S>) -> bool {
        other.lo.value() <= self.lo.value() && self.hi.value() <= other.hi.value()
    }

    pub fn width(&self) -> Dyadic {
        self.hi.value() - self.lo.value()
    }
}

impl<S: Float> fmt::Display for DWInterval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn parse_interval_parts(s: &str) -> Result<(&str, &str)> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("interval must be bracketed: {s:?}")))?;
    inner.split_once(',').ok_or_else(|| Error::Parse(format!("interval needs a comma: {s:?}")))
}

impl DWInterval<f64> {
    pub fn parse_hex(s: &str) -> Result<Self> {
        let (a, b) = parse_interval_parts(s)?;
        DWInterval::new(DoubleWord::<f64>::parse_hex(a)?, DoubleWord::<f64>::parse_hex(b)?)
    }
}

impl DWInterval<MiniFloat> {
    pub fn parse_hex(p: u32, s: &str) -> Result<Self> {
        let (a, b) = parse_interval_parts(s)?;
        DWInterval::new(DoubleWord::<MiniFloat>::parse_hex(p, a)?, DoubleWord::<MiniFloat>::parse_hex(p, b)?)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Sign {
    Pos,
    Neg,
    Mixed,
}

fn classify<S: Float>(x: &DWInterval<S>) -> Sign {
    if x.lo.value().signum() >= 0 {
        Sign::Pos
    } else if x.hi.value().signum() <= 0 {
        Sign::Neg
    } else {
        Sign::Mixed
    }
}

fn sign_ok(lo: MiniFloat, mode: RoundingMode) -> bool {
    match mode {
        RoundingMode::Down => !lo.is_negative(),
        _ => lo.is_negative() || lo.is_zero(),
    }
}

/// Interval arithmetic on the software engine at precision `p`.
#[derive(Clone, Debug)]
pub struct IntervalEngine {
    down: SoftEngine,
    up: SoftEngine,
    normalize_mul: bool,
    fallbacks: u64,
}

impl IntervalEngine {
    pub fn new(p: u32) -> Result<IntervalEngine> {
        Ok(IntervalEngine {
            down: SoftEngine::with_mode(p, RoundingMode::Down)?,
            up: SoftEngine::with_mode(p, RoundingMode::Up)?,
            normalize_mul: true,
            fallbacks: 0,
        })
    }

    /// Whether products are normalized; interval MAA always skips it.
    pub fn with_normalized_mul(mut self, on: bool) -> Self {
        self.normalize_mul = on;
        self
    }

    pub fn precision(&self) -> u32 {
        self.down.precision()
    }

    /// Rounding tallies of the lower- and upper-endpoint engines.
    pub fn ledgers(&self) -> (DirectionLedger, DirectionLedger) {
        (self.down.ledger(), self.up.ledger())
    }

    /// Additions that could not establish the low-part sign condition.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks
    }

    pub fn reset(&mut self) {
        self.down.reset();
        self.up.reset();
        self.fallbacks = 0;
    }

    fn engine(&mut self, mode: RoundingMode) -> &mut SoftEngine {
        if mode == RoundingMode::Down {
            &mut self.down
        } else {
            &mut self.up
        }
    }

    /// Rewrites `x` so its low part has the sign the directed accurate
    /// addition needs, moving the value only outward.
    fn orient(&mut self, x: DoubleWord<MiniFloat>, mode: RoundingMode) -> Option<DoubleWord<MiniFloat>> {
        if sign_ok(x.lo, mode) {
            return Some(x);
        }
        if x.hi.is_zero() {
            return Some(DoubleWord::from_hi(x.lo));
        }
        let e = self.engine(mode);
        let h = e.add(x.hi, x.lo);
        let d = e.sub(x.hi, h);
        let l = e.add(d, x.lo);
        sign_ok(l, mode).then_some(DoubleWord::new(h, l))
    }

    fn add_endpoint(&mut self, x: DoubleWord<MiniFloat>, y: DoubleWord<MiniFloat>, mode: RoundingMode) -> DoubleWord<MiniFloat> {
        if let (Some(x), Some(y)) = (self.orient(x, mode), self.orient(y, mode)) {
            return accurate_add_directed(self.engine(mode), x, y, TwoSumImpl::Standard);
        }
        self.fallbacks += 1;
        let e = self.engine(mode);
        let z = sloppy_add(e, x, y, TwoSumImpl::Standard);
        let step = if !z.lo.is_zero() {
            z.lo.ulp()
        } else if !z.hi.is_zero() {
            z.hi.ulp().map(|d| d.mul_pow2(-i64::from(e.precision())))
        } else {
            return z;
        };
        let step = MiniFloat::from_dyadic(e.precision(), &step.expect("nonzero")).expect("power of two");
        let lo = if mode == RoundingMode::Down { e.sub(z.lo, step) } else { e.add(z.lo, step) };
        DoubleWord::new(z.hi, lo)
    }

    fn mul_endpoint(&mut self, x: DoubleWord<MiniFloat>, y: DoubleWord<MiniFloat>, mode: RoundingMode, normalize: bool) -> DoubleWord<MiniFloat> {
        dw_mul(self.engine(mode), x, y, normalize, true)
    }

    pub fn iv_add(&mut self, x: &DWInterval<MiniFloat>, y: &DWInterval<MiniFloat>) -> DWInterval<MiniFloat> {
        let lo = self.add_endpoint(x.lo, y.lo, RoundingMode::Down);
        let hi = self.add_endpoint(x.hi, y.hi, RoundingMode::Up);
        DWInterval { lo, hi }
    }

    pub fn iv_mul(&mut self, x: &DWInterval<MiniFloat>, y: &DWInterval<MiniFloat>) -> DWInterval<MiniFloat> {
        let n = self.normalize_mul;
        self.mul_with(x, y, n)
    }

    fn mul_with(&mut self, x: &DWInterval<MiniFloat>, y: &DWInterval<MiniFloat>, n: bool) -> DWInterval<MiniFloat> {
        use Sign::*;
        let (a, b, c, d) = (x.lo, x.hi, y.lo, y.hi);
        let (lo_pair, hi_pair) = match (classify(x), classify(y)) {
            (Pos, Pos) => ((a, c), (b, d)),
            (Pos, Neg) => ((b, c), (a, d)),
            (Pos, Mixed) => ((b, c), (b, d)),
            (Neg, Pos) => ((a, d), (b, c)),
            (Neg, Neg) => ((b, d), (a, c)),
            (Neg, Mixed) => ((a, d), (a, c)),
            (Mixed, Pos) => ((a, d), (b, d)),
            (Mixed, Neg) => ((b, c), (a, c)),
            (Mixed, Mixed) => {
                let l1 = self.mul_endpoint(a, d, RoundingMode::Down, n);
                let l2 = self.mul_endpoint(b, c, RoundingMode::Down, n);
                let h1 = self.mul_endpoint(a, c, RoundingMode::Up, n);
                let h2 = self.mul_endpoint(b, d, RoundingMode::Up, n);
                let lo = if l1.value().cmp(&l2.value()) == Ordering::Greater { l2 } else { l1 };
                let hi = if h1.value().cmp(&h2.value()) == Ordering::Less { h2 } else { h1 };
                return DWInterval { lo, hi };
            }
        };
        let lo = self.mul_endpoint(lo_pair.0, lo_pair.1, RoundingMode::Down, n);
        let hi = self.mul_endpoint(hi_pair.0, hi_pair.1, RoundingMode::Up, n);
        DWInterval { lo, hi }
    }

    /// `A·B + C` with unnormalized endpoint products.
    pub fn iv_maa(&mut self, a: &DWInterval<MiniFloat>, b: &DWInterval<MiniFloat>, c: &DWInterval<MiniFloat>) -> DWInterval<MiniFloat> {
        let m = self.mul_with(a, b, false);
        self.iv_add(&m, c)
    }
}

/// Binary64 intervals computed in round-to-nearest and widened outward.
pub mod native {
    use super::DWInterval;
    use crate::dw::{dw_mul, sloppy_add, DoubleWord};
    use crate::eft::{two_sum, TwoSumImpl};
    use crate::fp::Native;

    const U: f64 = f64::EPSILON / 2.0;

    /// Hardware rounding-direction control is not reachable from stable
    /// Rust, so endpoints are always computed by the widening fallback.
    pub const fn directed_rounding_available() -> bool {
        false
    }

    fn normalize(x: DoubleWord<f64>) -> DoubleWord<f64> {
        let r = two_sum(&mut Native, x.hi, x.lo);
        DoubleWord::new(r.s, r.t)
    }

    fn ulp(x: f64) -> f64 {
        let a = x.abs();
        a.next_up() - a
    }

    // Pushes `z` outward by at least `delta` and at least two ulps of its low part.
    fn widen(z: DoubleWord<f64>, delta: f64, down: bool) -> DoubleWord<f64> {
        let d = delta.max(2.0 * ulp(z.lo)) * (1.0 + 8.0 * U);
        if down {
            DoubleWord::new(z.hi, (z.lo - d).next_down())
        } else {
            DoubleWord::new(z.hi, (z.lo + d).next_up())
        }
    }

    fn add_endpoint(x: DoubleWord<f64>, y: DoubleWord<f64>, down: bool) -> DoubleWord<f64> {
        let (x, y) = (normalize(x), normalize(y));
        let z = sloppy_add(&mut Native, x, y, TwoSumImpl::Standard);
        widen(z, 8.0 * U * U * (x.hi.abs() + y.hi.abs()), down)
    }

    fn mul_endpoint(x: DoubleWord<f64>, y: DoubleWord<f64>, down: bool) -> DoubleWord<f64> {
        let (x, y) = (normalize(x), normalize(y));
        let z = dw_mul(&mut Native, x, y, true, true);
        widen(z, 8.0 * U * U * z.hi.abs(), down)
    }

    pub fn iv_add(x: &DWInterval<f64>, y: &DWInterval<f64>) -> DWInterval<f64> {
        DWInterval { lo: add_endpoint(x.lo, y.lo, true), hi: add_endpoint(x.hi, y.hi, false) }
    }

    /// Product by evaluating all four endpoint pairs in both directions.
    pub fn iv_mul(x: &DWInterval<f64>, y: &DWInterval<f64>) -> DWInterval<f64> {
        let pairs = [(x.lo, y.lo), (x.lo, y.hi), (x.hi, y.lo), (x.hi, y.hi)];
        let lows = pairs.map(|(a, b)| mul_endpoint(a, b, true));
        let highs = pairs.map(|(a, b)| mul_endpoint(a, b, false));
        let lo = lows.into_iter().min_by(|a, b| a.value().cmp(&b.value())).expect("four candidates");
        let hi = highs.into_iter().max_by(|a, b| a.value().cmp(&b.value())).expect("four candidates");
        DWInterval { lo, hi }
    }

    pub fn iv_maa(a: &DWInterval<f64>, b: &DWInterval<f64>, c: &DWInterval<f64>) -> DWInterval<f64> {
        iv_add(&iv_mul(a, b), c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::enumerate;

    fn point(p: u32, h: f64, l: f64) -> DWInterval<MiniFloat> {
        DWInterval::point(DoubleWord::new(MiniFloat::from_f64(p, h).unwrap(), MiniFloat::from_f64(p, l).unwrap()))
    }

    #[test]
    fn cancellation_encloses_zero() {
        let mut ie = IntervalEngine::new(53).unwrap();
        let r = ie.iv_add(&point(53, 1.0, 0.0), &point(53, -1.0, 0.0));
        assert!(r.contains(&Dyadic::zero()));
        let u = Dyadic::pow2(-52);
        assert!(r.width() <= (&u * &u).mul_pow2(2));
    }

    #[test]
    fn zero_times_anything() {
        let mut ie = IntervalEngine::new(8).unwrap();
        let z = point(8, 0.0, 0.0);
        let y = DWInterval::new(point(8, -3.0, 0.0).lo, point(8, 5.0, 0.01171875).hi).unwrap();
        let r = ie.iv_mul(&z, &y);
        assert_eq!(r.lo.value(), Dyadic::zero());
        assert_eq!(r.hi.value(), Dyadic::zero());
        let r = ie.iv_maa(&z, &z, &y);
        assert_eq!((r.lo.value(), r.hi.value()), (y.lo.value(), y.hi.value()));
    }

    #[test]
    fn sign_cases() {
        let mut ie = IntervalEngine::new(10).unwrap();
        let x = DWInterval::new(point(10, 1.0, 0.0).lo, point(10, 2.0, 0.0).lo).unwrap();
        let y = DWInterval::new(point(10, -1.0, 0.0).lo, point(10, 1.0, 0.0).lo).unwrap();
        let r = ie.iv_mul(&x, &y);
        assert!(r.contains(&Dyadic::from_i64(-2)) && r.contains(&Dyadic::from_i64(2)));
        let (d, u) = ie.ledgers();
        assert!(d.only(RoundingMode::Down) && u.only(RoundingMode::Up));
        assert!(d.total() > 0 && u.total() > 0);
    }

    #[test]
    fn exhaustive_point_enclosure_small_p() {
        let p = 5;
        let mut ie = IntervalEngine::new(p).unwrap();
        let his: Vec<_> = enumerate(p, -1, 1).collect();
        let lows = |h: MiniFloat| -> Vec<MiniFloat> {
            if h.is_zero() {
                return vec![h];
            }
            let q = MiniFloat::from_dyadic(p, &h.ulp().unwrap().mul_pow2(-1)).unwrap();
            vec![MiniFloat::zero(p), q, -q]
        };
        let mut pts = Vec::new();
        for &h in &his {
            for l in lows(h) {
                pts.push(DWInterval::point(DoubleWord::new(h, l)));
            }
        }
        for x in &pts {
            for y in &pts {
                let (xv, yv) = (x.lo.value(), y.lo.value());
                assert!(ie.iv_add(x, y).contains(&(&xv + &yv)), "{x} + {y}");
                assert!(ie.iv_mul(x, y).contains(&(&xv * &yv)), "{x} * {y}");
                assert!(ie.iv_maa(x, y, x).contains(&(&(&xv * &yv) + &xv)));
            }
        }
    }

    #[test]
    fn text_form() {
        let x = DWInterval::new(DoubleWord::new(1.0, 2f64.powi(-60)), DoubleWord::new(2.0, 0.0)).unwrap();
        let s = x.to_string();
        assert_eq!(s, "[+0x1p+0 +0x1p-60, +0x1p+1 0x0p+0]");
        assert_eq!(DWInterval::<f64>::parse_hex(&s).unwrap(), x);
        assert!(DWInterval::<f64>::parse_hex("[+0x1p+1 0x0p+0, +0x1p+0 0x0p+0]").is_err());
        assert!(DWInterval::<MiniFloat>::parse_hex(6, "+0x1p+0 0x0p+0").is_err());
    }

    #[test]
    fn native_fallback_encloses() {
        assert!(!native::directed_rounding_available());
        let x = DWInterval::point(DoubleWord::new(0.1, 0.1 * 2f64.powi(-56)));
        let y = DWInterval::point(DoubleWord::new(-0.3, 0.3 * 2f64.powi(-55)));
        let s = native::iv_add(&x, &y);
        assert!(s.contains(&(x.lo.value() + y.lo.value())));
        let m = native::iv_maa(&x, &y, &x);
        assert!(m.contains(&(x.lo.value() * y.lo.value() + x.lo.value())));
    }
}
