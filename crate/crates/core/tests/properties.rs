use proptest::prelude::*;

use dwarith::dw::{accurate_add, accurate_add_directed, dw_mul, maa, sloppy_add, DoubleWord, VariantConfig};
use dwarith::eft::TwoSumImpl;
use dwarith::fp::{round, Dyadic, MiniFloat, Native, RoundingMode, RoundingSpec, SoftEngine};
use dwarith::interval::{DWInterval, IntervalEngine};
use dwarith::lab::{self, LowGenerator};

const ST: TwoSumImpl = TwoSumImpl::Standard;

/// Nonoverlapping binary64 double-word with a high part in `2^[-30, 30)`.
fn dw64() -> impl Strategy<Value = DoubleWord<f64>> {
    (1.0f64..2.0, -30i32..30, any::<bool>(), -0.5f64..0.5).prop_map(|(m, e, neg, f)| {
        let h = if neg { -m } else { m } * 2f64.powi(e);
        let l = f * (h.abs().next_up() - h.abs());
        DoubleWord::new(h, if h + l == h { l } else { 0.0 })
    })
}

fn mf(p: u32) -> impl Strategy<Value = MiniFloat> {
    (1u64 << (p - 1)..1u64 << p, -8i64..8, any::<bool>())
        .prop_map(move |(m, e, neg)| MiniFloat::from_parts(p, neg, m, e).unwrap())
}

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (any::<bool>(), 1u128..1u128 << 40, -60i64..20).prop_map(|(neg, m, e)| Dyadic::new(neg, m, e))
}

fn eq_dw(a: DoubleWord<f64>, b: DoubleWord<f64>) -> bool {
    a.hi == b.hi && a.lo == b.lo
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 2000, ..ProptestConfig::default() })]

    #[test]
    fn scale_invariance(x in dw64(), y in dw64(), c in dw64(), k in -40i32..40) {
        let n = &mut Native;
        let (sx, sy, sc) = (x.mul_pow2(k), y.mul_pow2(k), c.mul_pow2(k));
        prop_assert!(eq_dw(sloppy_add(n, sx, sy, ST), sloppy_add(n, x, y, ST).mul_pow2(k)));
        prop_assert!(eq_dw(accurate_add(n, sx, sy, ST), accurate_add(n, x, y, ST).mul_pow2(k)));
        prop_assert!(eq_dw(accurate_add_directed(n, sx, sy, ST), accurate_add_directed(n, x, y, ST).mul_pow2(k)));
        prop_assert!(eq_dw(dw_mul(n, sx, y, true, false), dw_mul(n, x, y, true, false).mul_pow2(k)));
        for cfg in VariantConfig::table2_rows() {
            prop_assert!(eq_dw(maa(n, sx, y, sc, &cfg), maa(n, x, y, c, &cfg).mul_pow2(k)));
        }
    }

    #[test]
    fn commutativity(x in dw64(), y in dw64()) {
        let n = &mut Native;
        prop_assert!(eq_dw(sloppy_add(n, x, y, ST), sloppy_add(n, y, x, ST)));
        prop_assert!(eq_dw(accurate_add(n, x, y, ST), accurate_add(n, y, x, ST)));
        // the cross terms are rounded in operand order, so only the values agree closely
        let exact = x.value() * y.value();
        for normalize in [false, true] {
            let (a, b) = (dw_mul(n, x, y, normalize, false), dw_mul(n, y, x, normalize, false));
            prop_assert_eq!(a.hi, b.hi);
            let u = 2f64.powi(-53);
            prop_assert!((a.value() - b.value()).abs().ratio_up(&exact.abs()) <= 4.0 * u * u);
        }
    }

    #[test]
    fn negation_symmetry_binary64(x in dw64(), y in dw64(), c in dw64()) {
        let n = &mut Native;
        prop_assert!(eq_dw(sloppy_add(n, -x, -y, ST), -sloppy_add(n, x, y, ST)));
        prop_assert!(eq_dw(accurate_add(n, -x, -y, ST), -accurate_add(n, x, y, ST)));
        prop_assert!(eq_dw(dw_mul(n, -x, y, true, false), -dw_mul(n, x, y, true, false)));
        let cfg = VariantConfig::default();
        prop_assert!(eq_dw(maa(n, -x, y, -c, &cfg), -maa(n, x, y, c, &cfg)));
    }

    #[test]
    fn negation_symmetry_nearest_modes(xh in mf(12), xl in mf(12), yh in mf(12), yl in mf(12)) {
        let (x, y) = (DoubleWord::new(xh, xl.scale(-14)), DoubleWord::new(yh, yl.scale(-14)));
        for mode in [RoundingMode::NearestEven, RoundingMode::NearestAway] {
            let mut e = SoftEngine::with_mode(12, mode).unwrap();
            prop_assert_eq!(sloppy_add(&mut e, -x, -y, ST), -sloppy_add(&mut e, x, y, ST));
            prop_assert_eq!(accurate_add(&mut e, -x, -y, ST), -accurate_add(&mut e, x, y, ST));
            prop_assert_eq!(dw_mul(&mut e, -x, y, true, false), -dw_mul(&mut e, x, y, true, false));
        }
    }

    #[test]
    fn rounding_brackets_and_bounds(x in dyadic(), p in 2u32..=24) {
        let rd = round(&x, p, &RoundingSpec::new(RoundingMode::Down)).unwrap();
        let ru = round(&x, p, &RoundingSpec::new(RoundingMode::Up)).unwrap();
        prop_assert!(rd.to_dyadic() <= x && x <= ru.to_dyadic());
        for m in [RoundingMode::NearestEven, RoundingMode::NearestAway] {
            let rn = round(&x, p, &RoundingSpec::new(m)).unwrap();
            prop_assert!(rn == rd || rn == ru);
            let err = (rn.to_dyadic() - &x).abs();
            prop_assert!(err <= x.abs().mul_pow2(-i64::from(p)));
        }
        for r in [rd, ru] {
            prop_assert!((r.to_dyadic() - &x).abs() < x.abs().mul_pow2(1 - i64::from(p)));
            // representable values round to themselves
            for m in [RoundingMode::NearestEven, RoundingMode::NearestAway, RoundingMode::Down, RoundingMode::Up] {
                prop_assert_eq!(round(&r.to_dyadic(), p, &RoundingSpec::new(m)).unwrap(), r);
            }
        }
    }

    #[test]
    fn rounding_is_monotone(a in dyadic(), b in dyadic(), p in 2u32..=24) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for m in [RoundingMode::NearestEven, RoundingMode::NearestAway, RoundingMode::Down, RoundingMode::Up] {
            let s = RoundingSpec::new(m);
            prop_assert!(round(&lo, p, &s).unwrap() <= round(&hi, p, &s).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn intervals_enclose_and_are_monotone(
        a in mf(12), b in mf(12), c in mf(12), d in mf(12), g in 0u64..64, h in 0u64..64
    ) {
        let p = 12;
        let up = RoundingSpec::new(RoundingMode::Up);
        let widen = |v: MiniFloat, k: u64| round(&(v.to_dyadic() + v.ulp().unwrap() * Dyadic::from_i64(k as i64)), p, &up).unwrap();
        let iv = |x: MiniFloat, y: MiniFloat| {
            let (l, u) = if x <= y { (x, y) } else { (y, x) };
            DWInterval::new(DoubleWord::from_hi(l), DoubleWord::from_hi(u)).unwrap()
        };
        let x = iv(a, b);
        let y = iv(c, d);
        let xw = DWInterval::new(x.lo, DoubleWord::from_hi(widen(x.hi.hi, g))).unwrap();
        let yw = DWInterval::new(y.lo, DoubleWord::from_hi(widen(y.hi.hi, h))).unwrap();
        let mut e = IntervalEngine::new(p).unwrap();
        let s = e.iv_add(&x, &y);
        let m = e.iv_mul(&x, &y);
        for xv in [x.lo.value(), x.hi.value()] {
            for yv in [y.lo.value(), y.hi.value()] {
                prop_assert!(s.contains(&(&xv + &yv)));
                prop_assert!(m.contains(&(&xv * &yv)));
            }
        }
        let sw = e.iv_add(&xw, &yw);
        let mw = e.iv_mul(&xw, &yw);
        for (inner, outer) in [(&s, &sw), (&m, &mw)] {
            // wider inputs may not produce narrower outputs beyond one outward rounding
            let tol = outer.width().abs().mul_pow2(-20) + inner.width().abs().mul_pow2(-20);
            prop_assert!(outer.lo.value() <= &inner.lo.value() + &tol);
            prop_assert!(inner.hi.value() <= &outer.hi.value() + &tol);
        }
    }
}

#[test]
fn mul_rounds_cross_terms_in_operand_order() {
    let x = DoubleWord::new(-1.5802257484623414, -8.89458192467658e-17);
    let y = DoubleWord::new(-1.5131817471168074, 1.0799891132304941e-16);
    let (a, b) = (dw_mul(&mut Native, x, y, true, false), dw_mul(&mut Native, y, x, true, false));
    assert_eq!(a.hi, b.hi);
    assert_ne!(a.lo, b.lo);
}

#[test]
fn expected_failures_replay_identically() {
    let r = lab::check_lemma2(6).unwrap();
    assert_eq!(r.expected_failure_count, 3);
    for v in &r.expected_failures {
        let o = lab::replay(v).unwrap();
        assert_eq!(o.observed.to_bits(), v.observed.to_bits());
        assert!(!o.holds);
    }
}

#[test]
fn errstats_is_stable_across_seeds() {
    let rows = VariantConfig::table2_rows();
    let a = lab::run_errstats_rows(100_000, 4, &rows, 101, LowGenerator::Uniform).unwrap();
    let b = lab::run_errstats_rows(100_000, 4, &rows, 202, LowGenerator::Uniform).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let std = x.aggregate.std.max(y.aggregate.std);
        assert!((x.aggregate.average - y.aggregate.average).abs() < 3.0 * std, "{} {x:?} {y:?}", x.label);
    }
}
