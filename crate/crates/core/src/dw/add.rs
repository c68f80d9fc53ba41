use super::config::AddAlgorithm;
use super::DoubleWord;
use crate::eft::{fast2sum, two_sum_magsel, two_sum_with, ScalarPair, TwoSumImpl};
use crate::error::{Error, Result};
use crate::fp::{Arith, Float, RoundingMode, SoftEngine};

/// Intermediates of the sloppy addition.
#[derive(Copy, Clone, Debug)]
pub struct SloppyTrace<S> {
    pub s: ScalarPair<S>,
    pub v: S,
    pub w: S,
    pub z: DoubleWord<S>,
}

/// Intermediates of the accurate addition.
#[derive(Copy, Clone, Debug)]
pub struct AccurateTrace<S> {
    pub s: ScalarPair<S>,
    pub t: ScalarPair<S>,
    pub c: S,
    pub v: ScalarPair<S>,
    pub w: S,
    pub z: DoubleWord<S>,
}

#[inline(always)]
fn sloppy_core<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    ts: TwoSumImpl,
    normalize: bool,
) -> SloppyTrace<A::Scalar> {
    let s = two_sum_with(ar, ts, x.hi, y.hi);
    let v = ar.add(x.lo, y.lo);
    let w = ar.add(s.t, v);
    let z = if normalize {
        let r = fast2sum(ar, s.s, w);
        DoubleWord::new(r.s, r.t)
    } else {
        DoubleWord::new(s.s, w)
    };
    SloppyTrace { s, v, w, z }
}

#[inline(always)]
fn accurate_core<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    ts: TwoSumImpl,
    directed_lows: bool,
    normalize: bool,
) -> AccurateTrace<A::Scalar> {
    let s = two_sum_with(ar, ts, x.hi, y.hi);
    let t = if directed_lows { two_sum_magsel(ar, x.lo, y.lo) } else { two_sum_with(ar, ts, x.lo, y.lo) };
    let c = ar.add(s.t, t.s);
    let v = fast2sum(ar, s.s, c);
    let w = ar.add(t.t, v.t);
    let z = if normalize {
        let r = fast2sum(ar, v.s, w);
        DoubleWord::new(r.s, r.t)
    } else {
        DoubleWord::new(v.s, w)
    };
    AccurateTrace { s, t, c, v, w, z }
}

/// Sloppy double-word addition.
#[inline(always)]
pub fn sloppy_add<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    ts: TwoSumImpl,
) -> DoubleWord<A::Scalar> {
    sloppy_core(ar, x, y, ts, true).z
}

pub fn sloppy_add_trace<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    ts: TwoSumImpl,
) -> SloppyTrace<A::Scalar> {
    sloppy_core(ar, x, y, ts, true)
}

/// Accurate double-word addition.
#[inline(always)]
pub fn accurate_add<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    ts: TwoSumImpl,
) -> DoubleWord<A::Scalar> {
    accurate_core(ar, x, y, ts, false, true).z
}

pub fn accurate_add_trace<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    ts: TwoSumImpl,
    directed_lows: bool,
) -> AccurateTrace<A::Scalar> {
    accurate_core(ar, x, y, ts, directed_lows, true)
}

/// Accurate addition for directed rounding: the low parts are combined by
/// magnitude select and Fast2Sum instead of 2Sum.
///
/// The error bound needs `x.lo, y.lo >= 0` in RD and `<= 0` in RU; nothing
/// is checked here.
#[inline(always)]
pub fn accurate_add_directed<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    ts: TwoSumImpl,
) -> DoubleWord<A::Scalar> {
    accurate_core(ar, x, y, ts, true, true).z
}

/// Sign condition on the low parts under which the directed accurate
/// addition keeps its bound.
pub fn check_directed_sign_condition<S: Float>(x: &DoubleWord<S>, y: &DoubleWord<S>, mode: RoundingMode) -> Result<()> {
    let zero = x.lo.zero_like();
    let ok = match mode {
        RoundingMode::Down => x.lo >= zero && y.lo >= zero,
        RoundingMode::Up => x.lo <= zero && y.lo <= zero,
        m => {
            return Err(Error::ContractViolation(format!("directed accurate addition needs RD or RU, engine is {m}")));
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ContractViolation(format!(
            "low parts {:?}, {:?} violate the {} sign condition",
            x.lo, y.lo, mode
        )))
    }
}

/// [`accurate_add_directed`] with the sign condition checked first.
pub fn accurate_add_directed_checked(
    e: &mut SoftEngine,
    x: DoubleWord<crate::fp::MiniFloat>,
    y: DoubleWord<crate::fp::MiniFloat>,
    ts: TwoSumImpl,
) -> Result<DoubleWord<crate::fp::MiniFloat>> {
    if e.spec().directions.is_some() {
        return Err(Error::ContractViolation("directed accurate addition needs a single rounding direction".into()));
    }
    check_directed_sign_condition(&x, &y, e.spec().mode)?;
    let r = accurate_add_directed(e, x, y, ts);
    e.check()?;
    Ok(r)
}

/// Addition selected by `algo`; with `normalize = false` the final Fast2Sum is skipped.
#[inline(always)]
pub fn add<A: Arith>(
    ar: &mut A,
    algo: AddAlgorithm,
    ts: TwoSumImpl,
    normalize: bool,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
) -> DoubleWord<A::Scalar> {
    match algo {
        AddAlgorithm::Sloppy => sloppy_core(ar, x, y, ts, normalize).z,
        AddAlgorithm::Accurate => accurate_core(ar, x, y, ts, false, normalize).z,
        AddAlgorithm::AccurateDirected => accurate_core(ar, x, y, ts, true, normalize).z,
    }
}
