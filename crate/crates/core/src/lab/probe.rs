//! Single-case evaluation shared by the sweeps and by replay.

use serde::{Deserialize, Serialize};

use super::{modified_rel_error, rel_error, Violation};
use crate::dw::{
    accurate_add, accurate_add_directed, accurate_add_trace, cancellation_at_most_half, dw_mul, maa, overlap_factor,
    overlap_within, sloppy_add, sloppy_add_trace, AddAlgorithm, DoubleWord, VariantConfig,
};
use crate::eft::{fast2sum, two_prod, two_prod_split, two_sum, two_sum_magsel, TwoSumImpl};
use crate::error::{Error, Result};
use crate::fp::{Dyadic, MiniFloat, RoundingMode, RoundingSpec, SoftEngine};
use crate::interval::{DWInterval, IntervalEngine};

/// Residual slack coefficient: bounds stated as `... + O(u³)` are checked
/// with `64·u³`.
pub const SLACK: f64 = 64.0;

/// Operation under a direction-consistency probe.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "op")]
pub enum DirectedOp {
    Sloppy,
    Accurate,
    AccurateDirected,
    Mul { normalize: bool, include_ll: bool },
    Maa { add: AddAlgorithm, normalize_mul: bool, include_ll: bool },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EftOp {
    Fast2Sum,
    TwoSum,
    TwoSumMagsel,
    TwoProd,
    TwoProdSplit,
}

impl EftOp {
    pub const ALL: [EftOp; 5] = [EftOp::Fast2Sum, EftOp::TwoSum, EftOp::TwoSumMagsel, EftOp::TwoProd, EftOp::TwoProdSplit];

    pub fn name(self) -> &'static str {
        match self {
            EftOp::Fast2Sum => "fast2sum",
            EftOp::TwoSum => "two-sum",
            EftOp::TwoSumMagsel => "two-sum-magsel",
            EftOp::TwoProd => "two-prod",
            EftOp::TwoProdSplit => "two-prod-split",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalOp {
    Add,
    Mul,
    Maa,
}

/// What a single case measures. Inputs are flat lists of scalars: two per
/// double-word, four per interval.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Probe {
    /// `[a, b]`: the transformation reproduces `a + b` (or `a·b`) exactly in
    /// round-to-nearest. Fast2Sum is only applicable when `|a| >= |b|`.
    EftExact { op: EftOp },
    /// `[a, b]`: Fast2Sum with the smaller operand first must be exact.
    Fast2SumExact,
    /// Sloppy addition, absolute error over `|x_h|+|y_h|`.
    SloppyAbs,
    /// Relative error contributed by the final Fast2Sum of the sloppy addition.
    SloppyFast2Sum,
    /// Sloppy addition, relative error against the nonoverlapping RN bounds.
    SloppyRel,
    /// Accurate addition, relative error.
    AccurateRel,
    /// Relative errors contributed by both Fast2Sums of the accurate addition.
    AccurateFast2Sums,
    /// Directed accurate addition, relative error.
    AccurateDirectedRel,
    /// Result lies on the side of the exact value given by the rounding.
    Direction(DirectedOp),
    /// Interval result encloses every exact corner value.
    Enclosure(IntervalOp),
    /// Overlap factor of the unnormalized product.
    ProductOverlap { include_ll: bool },
}

impl Probe {
    pub fn arity(self) -> usize {
        match self {
            Probe::Fast2SumExact | Probe::EftExact { .. } => 2,
            Probe::Direction(DirectedOp::Maa { .. }) => 6,
            Probe::Enclosure(IntervalOp::Maa) => 12,
            Probe::Enclosure(_) => 8,
            _ => 4,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub observed: f64,
    pub bound: f64,
    /// Whether the inputs satisfy the hypothesis the bound is stated under.
    pub applicable: bool,
    pub holds: bool,
}

impl Observation {
    fn check(observed: f64, bound: f64) -> Observation {
        Observation { observed, bound, applicable: true, holds: observed <= bound }
    }

    fn skipped(observed: f64, bound: f64) -> Observation {
        Observation { observed, bound, applicable: false, holds: observed <= bound }
    }
}

fn dw(v: &[MiniFloat], i: usize) -> DoubleWord<MiniFloat> {
    DoubleWord::new(v[2 * i], v[2 * i + 1])
}

fn iv(v: &[MiniFloat], i: usize) -> Option<DWInterval<MiniFloat>> {
    DWInterval::new(dw(v, 2 * i), dw(v, 2 * i + 1)).ok()
}

/// `1/(8u) - 2` for unit roundoff `2^u_exp`.
pub(crate) fn overlap_limit(u_exp: i64) -> Dyadic {
    Dyadic::pow2(-u_exp - 3) - Dyadic::from_i64(2)
}

/// Theorem-level context: unit roundoff, overlap limit and measured overlap.
struct Ctx {
    u: f64,
    u_exp: i64,
    limit: Dyadic,
}

impl Ctx {
    fn new(p: u32, spec: &RoundingSpec) -> Ctx {
        let u_exp = spec.unit_roundoff_exp(p);
        Ctx { u: spec.unit_roundoff(p), u_exp, limit: overlap_limit(u_exp) }
    }

    fn within(&self, x: &DoubleWord<MiniFloat>) -> bool {
        !x.hi.is_zero() && overlap_within(x, &self.limit, self.u_exp)
    }

    /// `max(1, o_x, o_y)`.
    fn o(&self, x: &DoubleWord<MiniFloat>, y: &DoubleWord<MiniFloat>) -> f64 {
        overlap_factor(x, self.u).max(overlap_factor(y, self.u)).max(1.0)
    }

    fn bound(&self, lin: f64) -> f64 {
        lin * self.u * self.u + SLACK * self.u.powi(3)
    }
}

/// Relative error of an error-free-transformation output against `a + b`.
fn pair_error(s: MiniFloat, t: MiniFloat, a: &Dyadic, b: &Dyadic) -> f64 {
    let exact = a + b;
    let got = s.to_dyadic() + t.to_dyadic();
    if got == exact {
        0.0
    } else {
        (got - &exact).abs().ratio_up(&exact.abs())
    }
}

/// Whether two magnitudes are consecutive floating-point numbers.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Adjacency {
    /// Same exponent, significands differ by one.
    SameExponent,
    /// `2^k` and its predecessor.
    BinadeBoundary,
}

pub fn adjacency(x: MiniFloat, y: MiniFloat) -> Option<Adjacency> {
    if x.is_zero() || y.is_zero() {
        return None;
    }
    let (a, b) = (x.abs(), y.abs());
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    let p = x.precision();
    if big.exponent_bits() == small.exponent_bits() && big.significand() == small.significand() + 1 {
        return Some(Adjacency::SameExponent);
    }
    if big.significand() == 1 << (p - 1)
        && small.significand() == (1 << p) - 1
        && small.exponent_bits() + 1 == big.exponent_bits()
    {
        return Some(Adjacency::BinadeBoundary);
    }
    None
}

/// `RN(h + l) = h` in the given nearest mode.
pub fn nonoverlapping(h: MiniFloat, l: MiniFloat, mode: RoundingMode) -> bool {
    let p = h.precision();
    crate::fp::round(&(h.to_dyadic() + l.to_dyadic()), p, &RoundingSpec::new(mode)).map(|r| r == h).unwrap_or(false)
}

/// Evaluates `probe` on an engine already configured with the case's
/// rounding (direction cursor rewound).
pub(crate) fn observe(e: &mut SoftEngine, probe: Probe, v: &[MiniFloat]) -> Result<Observation> {
    if v.len() != probe.arity() {
        return Err(Error::Usage(format!("{probe:?} takes {} inputs, got {}", probe.arity(), v.len())));
    }
    let p = crate::fp::Arith::precision(e);
    let spec = e.spec().clone();
    let ts = TwoSumImpl::Standard;
    let obs = match probe {
        Probe::Fast2SumExact => {
            let r = fast2sum(e, v[0], v[1]);
            Observation::check(pair_error(r.s, r.t, &v[0].to_dyadic(), &v[1].to_dyadic()), 0.0)
        }
        Probe::EftExact { op } => {
            let (a, b) = (v[0], v[1]);
            let (r, exact) = match op {
                EftOp::Fast2Sum => (fast2sum(e, a, b), a.to_dyadic() + b.to_dyadic()),
                EftOp::TwoSum => (two_sum(e, a, b), a.to_dyadic() + b.to_dyadic()),
                EftOp::TwoSumMagsel => (two_sum_magsel(e, a, b), a.to_dyadic() + b.to_dyadic()),
                EftOp::TwoProd => (two_prod(e, a, b), a.to_dyadic() * b.to_dyadic()),
                EftOp::TwoProdSplit => (two_prod_split(e, a, b), a.to_dyadic() * b.to_dyadic()),
            };
            let got = r.exact();
            let err = if got == exact {
                0.0
            } else if exact.is_zero() {
                f64::INFINITY
            } else {
                (got - &exact).abs().ratio_up(&exact.abs())
            };
            let ok = spec.directions.is_none()
                && spec.mode.is_nearest()
                && (op != EftOp::Fast2Sum || a.abs() >= b.abs());
            if ok {
                Observation::check(err, 0.0)
            } else {
                Observation::skipped(err, 0.0)
            }
        }
        Probe::SloppyAbs => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let c = Ctx::new(p, &spec);
            let z = sloppy_add(e, x, y, ts);
            let scale = x.hi.to_dyadic().abs() + y.hi.to_dyadic().abs();
            let err = modified_rel_error(&z, &(x.value() + y.value()), &scale);
            let o = c.o(&x, &y);
            let b = c.bound(2.0 * o + 3.0);
            if p >= 6 && c.within(&x) && c.within(&y) {
                Observation::check(err, b)
            } else {
                Observation::skipped(err, b)
            }
        }
        Probe::SloppyFast2Sum => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let c = Ctx::new(p, &spec);
            let tr = sloppy_add_trace(e, x, y, ts);
            let err = pair_error(tr.z.hi, tr.z.lo, &tr.s.s.to_dyadic(), &tr.w.to_dyadic());
            let b = c.bound(1.0);
            if p >= 6 && c.within(&x) && c.within(&y) {
                Observation::check(err, b)
            } else {
                Observation::skipped(err, b)
            }
        }
        Probe::SloppyRel => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let u = spec.unit_roundoff(p);
            let z = sloppy_add(e, x, y, ts);
            let exact = x.value() + y.value();
            let err = if exact.is_zero() && z.value().is_zero() { 0.0 } else { rel_error(&z, &exact) };
            let mode = spec.mode;
            let ok = spec.directions.is_none()
                && mode.is_nearest()
                && nonoverlapping(x.hi, x.lo, mode)
                && nonoverlapping(y.hi, y.lo, mode);
            let b = if cancellation_at_most_half(x.hi, y.hi) {
                3.0 * u * u + 5.0 * u.powi(3)
            } else if adjacency(x.hi, y.hi).is_none() {
                u
            } else {
                2.0
            };
            if ok {
                Observation::check(err, b)
            } else {
                Observation::skipped(err, b)
            }
        }
        Probe::AccurateRel => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let c = Ctx::new(p, &spec);
            let z = accurate_add(e, x, y, ts);
            let err = rel_error_or_zero(&z, &(x.value() + y.value()));
            let b = c.bound(3.0 * c.o(&x, &y) + 15.0);
            let ok = p >= 6 && spec.mode.is_nearest() && spec.directions.is_none() && c.within(&x) && c.within(&y);
            if ok {
                Observation::check(err, b)
            } else {
                Observation::skipped(err, b)
            }
        }
        Probe::AccurateFast2Sums => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let c = Ctx::new(p, &spec);
            let tr = accurate_add_trace(e, x, y, ts, false);
            let e1 = pair_error(tr.v.s, tr.v.t, &tr.s.s.to_dyadic(), &tr.c.to_dyadic());
            let e2 = pair_error(tr.z.hi, tr.z.lo, &tr.v.s.to_dyadic(), &tr.w.to_dyadic());
            let t = DoubleWord::new(tr.t.s, tr.t.t);
            let ot_ok = tr.t.t.is_zero() || c.within(&t);
            let b = c.bound(1.0);
            if p >= 6 && c.within(&x) && c.within(&y) && ot_ok {
                Observation::check(e1.max(e2), b)
            } else {
                Observation::skipped(e1.max(e2), b)
            }
        }
        Probe::AccurateDirectedRel => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let c = Ctx::new(p, &spec);
            let z = accurate_add_directed(e, x, y, ts);
            let err = rel_error_or_zero(&z, &(x.value() + y.value()));
            let b = c.bound(3.0 * c.o(&x, &y) + 15.0);
            let ok = p >= 6
                && spec.directions.is_none()
                && crate::dw::check_directed_sign_condition(&x, &y, spec.mode).is_ok()
                && c.within(&x)
                && c.within(&y);
            if ok {
                Observation::check(err, b)
            } else {
                Observation::skipped(err, b)
            }
        }
        Probe::Direction(op) => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let (z, exact) = match op {
                DirectedOp::Sloppy => (sloppy_add(e, x, y, ts), x.value() + y.value()),
                DirectedOp::Accurate => (accurate_add(e, x, y, ts), x.value() + y.value()),
                DirectedOp::AccurateDirected => (accurate_add_directed(e, x, y, ts), x.value() + y.value()),
                DirectedOp::Mul { normalize, include_ll } => {
                    (dw_mul(e, x, y, normalize, include_ll), x.value() * y.value())
                }
                DirectedOp::Maa { add, normalize_mul, include_ll } => {
                    let cfg = VariantConfig { add_algo: add, normalize_mul, normalize_add: true, include_ll, two_sum_impl: ts };
                    let c = dw(v, 2);
                    (maa(e, x, y, c, &cfg), x.value() * y.value() + c.value())
                }
            };
            let dev = z.value() - &exact;
            let wrong = match spec.mode {
                RoundingMode::Down => dev.signum() > 0,
                RoundingMode::Up => dev.signum() < 0,
                _ => false,
            };
            let observed = if !wrong {
                0.0
            } else if exact.is_zero() {
                f64::INFINITY
            } else {
                dev.abs().ratio_up(&exact.abs())
            };
            let ok = spec.directions.is_none() && !spec.mode.is_nearest();
            if ok {
                Observation::check(observed, 0.0)
            } else {
                Observation::skipped(observed, 0.0)
            }
        }
        Probe::Enclosure(op) => {
            let (Some(x), Some(y)) = (iv(v, 0), iv(v, 1)) else {
                return Ok(Observation::skipped(0.0, 0.0));
            };
            let mut ie = IntervalEngine::new(p)?;
            let xs = [x.lo.value(), x.hi.value()];
            let ys = [y.lo.value(), y.hi.value()];
            let (r, corners): (DWInterval<MiniFloat>, Vec<Dyadic>) = match op {
                IntervalOp::Add => (ie.iv_add(&x, &y), xs.iter().flat_map(|a| ys.iter().map(move |b| a + b)).collect()),
                IntervalOp::Mul => (ie.iv_mul(&x, &y), xs.iter().flat_map(|a| ys.iter().map(move |b| a * b)).collect()),
                IntervalOp::Maa => {
                    let Some(c) = iv(v, 2) else {
                        return Ok(Observation::skipped(0.0, 0.0));
                    };
                    let cs = [c.lo.value(), c.hi.value()];
                    let mut corners = Vec::with_capacity(8);
                    for a in &xs {
                        for b in &ys {
                            for cc in &cs {
                                corners.push(a * b + cc);
                            }
                        }
                    }
                    (ie.iv_maa(&x, &y, &c), corners)
                }
            };
            let (lo, hi) = (r.lo.value(), r.hi.value());
            let mut observed: f64 = 0.0;
            for k in &corners {
                let miss = if k < &lo {
                    &lo - k
                } else if k > &hi {
                    k - &hi
                } else {
                    continue;
                };
                observed = observed.max(if k.is_zero() { f64::INFINITY } else { miss.ratio_up(&k.abs()) });
            }
            Observation::check(observed, 0.0)
        }
        Probe::ProductOverlap { include_ll } => {
            let (x, y) = (dw(v, 0), dw(v, 1));
            let u = spec.unit_roundoff(p);
            let z = dw_mul(e, x, y, false, include_ll);
            let o = if z.hi.is_zero() { 0.0 } else { overlap_factor(&z, u) };
            let ok = spec.mode.is_nearest()
                && spec.directions.is_none()
                && !x.hi.is_zero()
                && !y.hi.is_zero()
                && overlap_within(&x, &Dyadic::one(), -i64::from(p))
                && overlap_within(&y, &Dyadic::one(), -i64::from(p));
            let b = 3.0 + 16.0 * u;
            if ok {
                Observation::check(o, b)
            } else {
                Observation::skipped(o, b)
            }
        }
    };
    e.check()?;
    Ok(obs)
}

fn rel_error_or_zero(z: &DoubleWord<MiniFloat>, exact: &Dyadic) -> f64 {
    if exact.is_zero() {
        if z.value().is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        rel_error(z, exact)
    }
}

/// Evaluates a single case from scratch.
pub fn evaluate(probe: Probe, p: u32, spec: &RoundingSpec, inputs: &[MiniFloat]) -> Result<Observation> {
    let mut e = SoftEngine::new(p, spec.clone())?;
    observe(&mut e, probe, inputs)
}

/// Parses a recorded violation and evaluates it again.
pub fn replay(v: &Violation) -> Result<Observation> {
    let spec: RoundingSpec = v.rounding.parse()?;
    let inputs = v.inputs.iter().map(|s| MiniFloat::parse_hex(v.p, s)).collect::<Result<Vec<_>>>()?;
    evaluate(v.probe, v.p, &spec, &inputs)
}

/// Builds the replayable record of a case. For per-operation directions only
/// the consumed prefix is kept.
pub(crate) fn record(probe: Probe, p: u32, e: &SoftEngine, inputs: &[MiniFloat], obs: &Observation) -> Violation {
    let mut spec = e.spec().clone();
    if let Some(d) = &mut spec.directions {
        d.truncate(e.roundings());
    }
    Violation {
        probe,
        p,
        rounding: spec.to_string(),
        inputs: inputs.iter().map(|x| x.to_hex()).collect(),
        observed: obs.observed,
        bound: obs.bound,
    }
}
