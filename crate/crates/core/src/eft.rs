//! Error-free transformations.
//!
//! Every function takes the backend first so the same code path serves
//! hardware binary64 and the software engine.

use crate::fp::{Arith, Float};

/// Unevaluated sum `s + t`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScalarPair<S> {
    pub s: S,
    pub t: S,
}

impl<S: Float> ScalarPair<S> {
    pub fn new(s: S, t: S) -> Self {
        ScalarPair { s, t }
    }

    pub fn exact(&self) -> crate::fp::Dyadic {
        self.s.to_dyadic() + self.t.to_dyadic()
    }
}

/// Which exact-sum building block replaces 2Sum.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoSumImpl {
    /// The six-operation branch-free 2Sum.
    #[default]
    Standard,
    /// Magnitude select followed by Fast2Sum.
    MagnitudeSelect,
}

impl TwoSumImpl {
    pub fn name(self) -> &'static str {
        match self {
            TwoSumImpl::Standard => "standard",
            TwoSumImpl::MagnitudeSelect => "magnitude-select",
        }
    }
}

/// Fast2Sum. Exact in round-to-nearest when `e_a >= e_b`; no check is made.
#[inline(always)]
pub fn fast2sum<A: Arith>(ar: &mut A, a: A::Scalar, b: A::Scalar) -> ScalarPair<A::Scalar> {
    let s = ar.add(a, b);
    let z = ar.sub(s, a);
    let t = ar.sub(b, z);
    ScalarPair { s, t }
}

/// Knuth's 2Sum; no ordering requirement.
#[inline(always)]
pub fn two_sum<A: Arith>(ar: &mut A, a: A::Scalar, b: A::Scalar) -> ScalarPair<A::Scalar> {
    let s = ar.add(a, b);
    let a1 = ar.sub(s, b);
    let b1 = ar.sub(s, a1);
    let da = ar.sub(a, a1);
    let db = ar.sub(b, b1);
    let t = ar.add(da, db);
    ScalarPair { s, t }
}

/// Fast2Sum on the operands ordered by magnitude.
#[inline(always)]
pub fn two_sum_magsel<A: Arith>(ar: &mut A, a: A::Scalar, b: A::Scalar) -> ScalarPair<A::Scalar> {
    let (big, small) = ar.mag_select(a, b);
    fast2sum(ar, big, small)
}

#[inline(always)]
pub fn two_sum_with<A: Arith>(ar: &mut A, imp: TwoSumImpl, a: A::Scalar, b: A::Scalar) -> ScalarPair<A::Scalar> {
    match imp {
        TwoSumImpl::Standard => two_sum(ar, a, b),
        TwoSumImpl::MagnitudeSelect => two_sum_magsel(ar, a, b),
    }
}

/// 2Prod with a fused multiply-add.
#[inline(always)]
pub fn two_prod<A: Arith>(ar: &mut A, a: A::Scalar, b: A::Scalar) -> ScalarPair<A::Scalar> {
    let s = ar.mul(a, b);
    let t = ar.fma(a, b, -s);
    ScalarPair { s, t }
}

/// Veltkamp splitting: `a = hi + lo` with both halves fitting in about `p/2` bits.
#[inline(always)]
pub fn split<A: Arith>(ar: &mut A, a: A::Scalar) -> ScalarPair<A::Scalar> {
    let c = ar.split_constant();
    let g = ar.mul(c, a);
    let d = ar.sub(a, g);
    let hi = ar.add(g, d);
    let lo = ar.sub(a, hi);
    ScalarPair { s: hi, t: lo }
}

/// Dekker's product; no FMA needed.
#[inline(always)]
pub fn two_prod_split<A: Arith>(ar: &mut A, a: A::Scalar, b: A::Scalar) -> ScalarPair<A::Scalar> {
    let s = ar.mul(a, b);
    let ScalarPair { s: ah, t: al } = split(ar, a);
    let ScalarPair { s: bh, t: bl } = split(ar, b);
    let hh = ar.mul(ah, bh);
    let e1 = ar.sub(hh, s);
    let hl = ar.mul(ah, bl);
    let e2 = ar.add(e1, hl);
    let lh = ar.mul(al, bh);
    let e3 = ar.add(e2, lh);
    let ll = ar.mul(al, bl);
    let t = ar.add(e3, ll);
    ScalarPair { s, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::{enumerate, Direction, Dyadic, MiniFloat, Native, RoundingMode, SoftEngine};

    fn mf(p: u32, m: i64, e: i64) -> MiniFloat {
        MiniFloat::from_parts(p, m < 0, m.unsigned_abs(), e).unwrap()
    }

    fn window(p: u32) -> Vec<MiniFloat> {
        enumerate(p, -3, 2).collect()
    }

    #[test]
    fn lemma_sharpness_pair_at_p6() {
        let mut e = SoftEngine::with_mode(6, RoundingMode::NearestEven).unwrap();
        let r = fast2sum(&mut e, mf(6, 33, -6), mf(6, 66, -6));
        assert_eq!(r.s, mf(6, 100, -6));
        assert_eq!(r.t, mf(6, -2, -6));
        assert_eq!(r.exact(), Dyadic::new(false, 98, -6));
    }

    #[test]
    fn binary64_examples() {
        let mut n = Native;
        let r = two_sum(&mut n, 1.0, 2f64.powi(-53));
        assert_eq!((r.s, r.t), (1.0, 2f64.powi(-53)));
        let r = two_sum_magsel(&mut n, 2f64.powi(-53), 1.0);
        assert_eq!((r.s, r.t), (1.0, 2f64.powi(-53)));
        let a = 1.0 + 2f64.powi(-27);
        for r in [two_prod(&mut n, a, a), two_prod_split(&mut n, a, a)] {
            assert_eq!((r.s, r.t), (1.0 + 2f64.powi(-26), 2f64.powi(-54)));
        }
        let r = two_prod(&mut n, 1.0, 0.3);
        assert_eq!((r.s, r.t), (0.3, 0.0));
        let r = fast2sum(&mut n, 1.0, 0.0);
        assert_eq!((r.s, r.t), (1.0, 0.0));
    }

    #[test]
    fn rn_exactness_exhaustive_small_p() {
        for p in [4, 5, 6] {
            let vals = window(p);
            let mut e = SoftEngine::with_mode(p, RoundingMode::NearestEven).unwrap();
            for &a in &vals {
                for &b in &vals {
                    let sum = a.to_dyadic() + b.to_dyadic();
                    let prod = a.to_dyadic() * b.to_dyadic();
                    assert_eq!(two_sum(&mut e, a, b).exact(), sum);
                    assert_eq!(two_sum_magsel(&mut e, a, b).exact(), sum);
                    if a.abs() >= b.abs() {
                        assert_eq!(fast2sum(&mut e, a, b).exact(), sum);
                    }
                    assert_eq!(two_prod(&mut e, a, b).exact(), prod);
                    assert_eq!(two_prod_split(&mut e, a, b).exact(), prod, "p={p} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn two_prod_exact_in_directed_modes() {
        let vals = window(6);
        for mode in [RoundingMode::Down, RoundingMode::Up, RoundingMode::NearestAway] {
            let mut e = SoftEngine::with_mode(6, mode).unwrap();
            for &a in &vals {
                for &b in &vals {
                    assert_eq!(two_prod(&mut e, a, b).exact(), a.to_dyadic() * b.to_dyadic());
                }
            }
        }
    }

    #[test]
    fn directed_two_sum_bounds_and_direction() {
        let p = 6;
        let vals = window(p);
        let eps = Dyadic::pow2(-2 * (i64::from(p) - 1));
        for mode in [RoundingMode::Down, RoundingMode::Up] {
            let mut e = SoftEngine::with_mode(p, mode).unwrap();
            for &a in &vals {
                for &b in &vals {
                    let exact = a.to_dyadic() + b.to_dyadic();
                    let mut pairs = vec![two_sum(&mut e, a, b)];
                    if a.abs() >= b.abs() {
                        pairs.push(fast2sum(&mut e, a, b));
                    }
                    for r in pairs {
                        let err = r.exact() - &exact;
                        if mode == RoundingMode::Down {
                            assert!(err <= Dyadic::zero(), "RD overshoot {a} {b}");
                        } else {
                            assert!(err >= Dyadic::zero(), "RU undershoot {a} {b}");
                        }
                        assert!(err.abs() <= &eps * &r.s.to_dyadic().abs());
                        if !r.s.is_zero() {
                            assert!(r.t.to_dyadic().abs() < r.s.ulp().unwrap(), "{a} {b} -> {:?}", r);
                        }
                    }
                    let r = two_sum(&mut e, a, b);
                    let err = (r.exact() - &exact).abs();
                    assert!(err <= &eps * &exact.abs());
                }
            }
        }
    }

    #[test]
    fn fast2sum_exact_under_mixed_directions_when_hypothesis_holds() {
        let p = 5;
        let vals: Vec<_> = window(p).into_iter().filter(|v| !v.is_zero()).collect();
        let mut e = SoftEngine::faithful(p, vec![]).unwrap();
        for &a in &vals {
            for &b in &vals {
                if a.ufp().unwrap() > b.ufp().unwrap() || a.uls().unwrap() < b.ulp().unwrap() {
                    continue;
                }
                for mask in 0..8 {
                    e.reset();
                    e.set_directions(Direction::sequence_from_bits(mask, 3));
                    let r = fast2sum(&mut e, a, b);
                    e.check().unwrap();
                    assert_eq!(r.exact(), a.to_dyadic() + b.to_dyadic());
                }
            }
        }
    }

    #[test]
    fn operation_counts() {
        use crate::fp::SoftEngine;
        let mut e = SoftEngine::with_mode(8, RoundingMode::NearestEven).unwrap();
        let (a, b) = (mf(8, 200, 0), mf(8, 131, -3));
        two_sum(&mut e, a, b);
        assert_eq!(e.roundings(), 6);
        e.reset();
        fast2sum(&mut e, a, b);
        assert_eq!(e.roundings(), 3);
        e.reset();
        two_prod(&mut e, a, b);
        assert_eq!(e.roundings(), 2);
    }
}
