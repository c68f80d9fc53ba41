use super::add::add;
use super::config::VariantConfig;
use super::DoubleWord;
use crate::eft::{fast2sum, two_prod};
use crate::fp::Arith;

/// Double-word product using 2Prod and a fused multiply-add chain for the
/// cross terms. Without normalization the result may overlap by about `3u`.
#[inline(always)]
pub fn dw_mul<A: Arith>(
    ar: &mut A,
    x: DoubleWord<A::Scalar>,
    y: DoubleWord<A::Scalar>,
    normalize: bool,
    include_ll: bool,
) -> DoubleWord<A::Scalar> {
    let c = two_prod(ar, x.hi, y.hi);
    let t = if include_ll {
        let t = ar.mul(x.lo, y.lo);
        let t = ar.fma(x.hi, y.lo, t);
        ar.fma(x.lo, y.hi, t)
    } else {
        let t = ar.mul(x.hi, y.lo);
        ar.fma(x.lo, y.hi, t)
    };
    let t = ar.add(c.t, t);
    if normalize {
        let r = fast2sum(ar, c.s, t);
        DoubleWord::new(r.s, r.t)
    } else {
        DoubleWord::new(c.s, t)
    }
}

/// `a·b + c` as a double-word product followed by a double-word sum.
#[inline(always)]
pub fn maa<A: Arith>(
    ar: &mut A,
    a: DoubleWord<A::Scalar>,
    b: DoubleWord<A::Scalar>,
    c: DoubleWord<A::Scalar>,
    cfg: &VariantConfig,
) -> DoubleWord<A::Scalar> {
    let m = dw_mul(ar, a, b, cfg.normalize_mul, cfg.include_ll);
    add(ar, cfg.add_algo, cfg.two_sum_impl, cfg.normalize_add, m, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dw::overlap_factor;
    use crate::fp::{enumerate, MiniFloat, Native, RoundingMode, SoftEngine};

    #[test]
    fn identity_and_square() {
        let mut n = Native;
        let y = DoubleWord::new(0.3, 0.3 * 2f64.powi(-55));
        assert_eq!(dw_mul(&mut n, DoubleWord::new(1.0, 0.0), y, true, false), y);
        let a = DoubleWord::new(1.0 + 2f64.powi(-27), 0.0);
        let r = dw_mul(&mut n, a, a, true, false);
        assert_eq!(r, DoubleWord::new(1.0 + 2f64.powi(-26), 2f64.powi(-54)));
        assert_eq!(dw_mul(&mut n, a, a, true, true), r);
    }

    #[test]
    fn maa_with_zero_product_returns_c() {
        let mut n = Native;
        let z = DoubleWord::new(0.0, 0.0);
        let c = DoubleWord::new(0.7, -0.7 * 2f64.powi(-54));
        for cfg in VariantConfig::table1_rows() {
            assert_eq!(maa(&mut n, z, z, c, &cfg).value(), c.value(), "{cfg}");
        }
    }

    #[test]
    fn operation_counts() {
        let mut e = SoftEngine::with_mode(20, RoundingMode::NearestEven).unwrap();
        let x = DoubleWord::from_hi(MiniFloat::one(20));
        dw_mul(&mut e, x, x, false, false);
        assert_eq!(e.roundings(), 5);
        e.reset();
        dw_mul(&mut e, x, x, true, false);
        assert_eq!(e.roundings(), 8);
    }

    #[test]
    fn unnormalized_overlap_small_p() {
        let p = 6;
        let u = 2f64.powi(-(p as i32));
        let mut e = SoftEngine::with_mode(p, RoundingMode::NearestEven).unwrap();
        let his: Vec<_> = enumerate(p, 0, 0).filter(|v| !v.is_zero()).collect();
        let mut worst: f64 = 0.0;
        for &xh in &his {
            for &yh in &his {
                for (xl, yl) in [(xh.ulp().unwrap(), yh.ulp().unwrap()), (-xh.ulp().unwrap(), yh.ulp().unwrap())] {
                    let x = DoubleWord::new(xh, MiniFloat::from_dyadic(p, &xl.mul_pow2(-1)).unwrap());
                    let y = DoubleWord::new(yh, MiniFloat::from_dyadic(p, &yl.mul_pow2(-1)).unwrap());
                    let r = dw_mul(&mut e, x, y, false, false);
                    worst = worst.max(overlap_factor(&r, u));
                }
            }
        }
        assert!(worst <= 3.0 + 16.0 * u, "{worst}");
    }
}
