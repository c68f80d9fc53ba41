//! Exact dyadic rationals `±m·2^e`.
//!
//! Every quantity that the double-word algorithms approximate (sums, products,
//! errors) is computed here without rounding. Values are kept canonical: zero
//! has sign 0, otherwise the significand is odd. Significands that fit in a
//! `u128` stay inline; larger ones spill to a [`BigUint`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Mag {
    Small(u128),
    Big(BigUint),
}

impl Mag {
    fn from_big(b: BigUint) -> Mag {
        match b.to_u128() {
            Some(v) => Mag::Small(v),
            None => Mag::Big(b),
        }
    }

    fn to_big(&self) -> BigUint {
        match self {
            Mag::Small(v) => BigUint::from(*v),
            Mag::Big(b) => b.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Mag::Small(0))
    }

    fn bits(&self) -> u64 {
        match self {
            Mag::Small(v) => 128 - u64::from(v.leading_zeros()),
            Mag::Big(b) => b.bits(),
        }
    }

    fn trailing_zeros(&self) -> u64 {
        match self {
            Mag::Small(0) => 0,
            Mag::Small(v) => u64::from(v.trailing_zeros()),
            Mag::Big(b) => b.trailing_zeros().unwrap_or(0),
        }
    }

    fn shl(&self, s: u64) -> Mag {
        match self {
            Mag::Small(0) => Mag::Small(0),
            Mag::Small(v) if self.bits() + s <= 128 => Mag::Small(v << s),
            _ => Mag::Big(self.to_big() << s),
        }
    }

    fn shr(&self, s: u64) -> Mag {
        match self {
            Mag::Small(v) => Mag::Small(if s >= 128 { 0 } else { v >> s }),
            Mag::Big(b) => Mag::from_big(b >> s),
        }
    }

    fn bit(&self, i: u64) -> bool {
        match self {
            Mag::Small(v) => i < 128 && (v >> i) & 1 == 1,
            Mag::Big(b) => b.bit(i),
        }
    }

    /// True if any of the lowest `n` bits is set.
    fn any_low_bits(&self, n: u64) -> bool {
        n > 0 && !self.is_zero() && self.trailing_zeros() < n
    }

    fn add(&self, o: &Mag) -> Mag {
        match (self, o) {
            (Mag::Small(a), Mag::Small(b)) => match a.checked_add(*b) {
                Some(s) => Mag::Small(s),
                None => Mag::Big(BigUint::from(*a) + *b),
            },
            _ => Mag::from_big(self.to_big() + o.to_big()),
        }
    }

    /// `self - o`, requires `self >= o`.
    fn sub(&self, o: &Mag) -> Mag {
        match (self, o) {
            (Mag::Small(a), Mag::Small(b)) => Mag::Small(a - b),
            _ => Mag::from_big(self.to_big() - o.to_big()),
        }
    }

    fn mul(&self, o: &Mag) -> Mag {
        match (self, o) {
            (Mag::Small(a), Mag::Small(b)) => match a.checked_mul(*b) {
                Some(p) => Mag::Small(p),
                None => Mag::Big(BigUint::from(*a) * *b),
            },
            _ => Mag::from_big(self.to_big() * o.to_big()),
        }
    }

    fn cmp(&self, o: &Mag) -> Ordering {
        match (self, o) {
            (Mag::Small(a), Mag::Small(b)) => a.cmp(b),
            (Mag::Small(_), Mag::Big(_)) => Ordering::Less,
            (Mag::Big(_), Mag::Small(_)) => Ordering::Greater,
            (Mag::Big(a), Mag::Big(b)) => a.cmp(b),
        }
    }
}

/// An exact number `sign · significand · 2^exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    sign: i8,
    mag: Mag,
    exp: i64,
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl Dyadic {
    pub fn zero() -> Dyadic {
        Dyadic { sign: 0, mag: Mag::Small(0), exp: 0 }
    }

    pub fn one() -> Dyadic {
        Dyadic::pow2(0)
    }

    pub fn pow2(k: i64) -> Dyadic {
        Dyadic { sign: 1, mag: Mag::Small(1), exp: k }
    }

    /// `±mag · 2^exp`.
    pub fn new(negative: bool, mag: u128, exp: i64) -> Dyadic {
        Dyadic::canonical(if negative { -1 } else { 1 }, Mag::Small(mag), exp)
    }

    pub fn from_biguint(negative: bool, mag: BigUint, exp: i64) -> Dyadic {
        Dyadic::canonical(if negative { -1 } else { 1 }, Mag::from_big(mag), exp)
    }

    pub fn from_i64(v: i64) -> Dyadic {
        Dyadic::new(v < 0, u128::from(v.unsigned_abs()), 0)
    }

    /// Exact conversion of a finite binary64 value.
    pub fn from_f64(x: f64) -> Result<Dyadic> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite value {x}")));
        }
        if x == 0.0 {
            return Ok(Dyadic::zero());
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Ok(Dyadic::new(neg, u128::from(m), e))
    }

    fn canonical(sign: i8, mag: Mag, exp: i64) -> Dyadic {
        if mag.is_zero() || sign == 0 {
            return Dyadic::zero();
        }
        let tz = mag.trailing_zeros();
        if tz == 0 {
            Dyadic { sign, mag, exp }
        } else {
            Dyadic { sign, mag: mag.shr(tz), exp: exp + tz as i64 }
        }
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    /// Exponent of the (odd) canonical significand.
    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Bit length of the canonical significand (0 for zero).
    pub fn significand_bits(&self) -> u64 {
        self.mag.bits()
    }

    pub fn significand(&self) -> BigUint {
        self.mag.to_big()
    }

    /// Canonical significand when it fits in a `u128`.
    pub fn significand_u128(&self) -> Option<u128> {
        match self.mag {
            Mag::Small(v) => Some(v),
            Mag::Big(_) => None,
        }
    }

    /// `floor(log2 |x|)`, `None` for zero.
    pub fn top_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.exp + self.mag.bits() as i64 - 1)
    }

    pub fn bit_at(&self, i: u64) -> bool {
        self.mag.bit(i)
    }

    pub(crate) fn any_low_bits(&self, n: u64) -> bool {
        self.mag.any_low_bits(n)
    }

    /// Significand shifted right by `s` bits (floor).
    pub(crate) fn significand_shr(&self, s: u64) -> BigUint {
        self.mag.shr(s).to_big()
    }

    pub fn abs(&self) -> Dyadic {
        let mut r = self.clone();
        if r.sign < 0 {
            r.sign = 1;
        }
        r
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { sign: self.sign, mag: self.mag.clone(), exp: self.exp + k }
    }

    fn add_ref(&self, o: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(o.exp);
        let a = self.mag.shl((self.exp - e) as u64);
        let b = o.mag.shl((o.exp - e) as u64);
        if self.sign == o.sign {
            Dyadic::canonical(self.sign, a.add(&b), e)
        } else {
            match a.cmp(&b) {
                Ordering::Equal => Dyadic::zero(),
                Ordering::Greater => Dyadic::canonical(self.sign, a.sub(&b), e),
                Ordering::Less => Dyadic::canonical(o.sign, b.sub(&a), e),
            }
        }
    }

    fn mul_ref(&self, o: &Dyadic) -> Dyadic {
        if self.is_zero() || o.is_zero() {
            return Dyadic::zero();
        }
        // product of odd significands is odd
        Dyadic { sign: self.sign * o.sign, mag: self.mag.mul(&o.mag), exp: self.exp + o.exp }
    }

    fn cmp_abs(&self, o: &Dyadic) -> Ordering {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let ta = self.top_exponent().unwrap();
        let tb = o.top_exponent().unwrap();
        if ta != tb {
            return ta.cmp(&tb);
        }
        let e = self.exp.min(o.exp);
        self.mag.shl((self.exp - e) as u64).cmp(&o.mag.shl((o.exp - e) as u64))
    }

    /// Correctly rounded (nearest, ties to even) binary64 approximation.
    /// Saturates to infinity beyond the binary64 range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mf = crate::fp::round(self, 53, &crate::fp::RoundingSpec::nearest_even())
            .expect("single rounding never exhausts directions");
        mf.to_f64()
    }

    /// Upper bound on `|self / den|` as a binary64 value, rounded toward +inf.
    /// A zero denominator yields +inf (or 0 for a zero numerator).
    pub fn ratio_up(&self, den: &Dyadic) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if den.is_zero() {
            return f64::INFINITY;
        }
        if let (Mag::Small(_), Mag::Small(_)) = (&self.mag, &den.mag) {
            // outward-rounded operands, quotient rounded up
            let n = super::minifloat::round_with(&self.abs(), 53, crate::fp::RoundingMode::Up)
                .expect("binary64 precision")
                .to_f64();
            let d = super::minifloat::round_with(&den.abs(), 53, crate::fp::RoundingMode::Down)
                .expect("binary64 precision")
                .to_f64();
            let q = n / d;
            if n.is_finite() && d.is_finite() && n >= f64::MIN_POSITIVE && d >= f64::MIN_POSITIVE && q.is_finite() && q >= f64::MIN_POSITIVE {
                // the residual of an RN quotient is exact, so this is RU(n / d)
                return if q.mul_add(d, -n) >= 0.0 { q } else { q.next_up() };
            }
        }
        // q = floor(num · 2^k / den) with at least 64 significant bits
        let nb = self.mag.bits() as i64;
        let db = den.mag.bits() as i64;
        let k = (db - nb + 66).max(0) as u64;
        let num = self.mag.to_big() << k;
        let d = den.mag.to_big();
        let q = &num / &d;
        let inexact = !(&num % &d).is_zero();
        let exp = self.exp - den.exp - k as i64;
        let mut approx = Dyadic::from_biguint(false, q, exp);
        if inexact {
            // floor(q) + 2^exp is strictly above the true ratio
            approx = approx + Dyadic::pow2(exp);
        }
        let up = crate::fp::round(&approx, 53, &crate::fp::RoundingSpec::new(crate::fp::RoundingMode::Up))
            .expect("single rounding");
        up.to_f64()
    }

    /// Hex-float text `±0xMpE` of the canonical form.
    pub fn to_hex(&self) -> String {
        self.to_string()
    }

    pub fn parse_hex(s: &str) -> Result<Dyadic> {
        s.parse()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match self.sign {
            0 => Ordering::Equal,
            1 => self.cmp_abs(o),
            _ => o.cmp_abs(self),
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(mut self) -> Dyadic {
        self.sign = -self.sign;
        self
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -self.clone()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl $tr<&Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $m(self, o: &Dyadic) -> Dyadic {
                self.$imp(o)
            }
        }
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, o: Dyadic) -> Dyadic {
                (&self).$imp(&o)
            }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, o: &Dyadic) -> Dyadic {
                (&self).$imp(o)
            }
        }
        impl $tr<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $m(self, o: Dyadic) -> Dyadic {
                self.$imp(&o)
            }
        }
    };
}

impl Dyadic {
    fn sub_ref(&self, o: &Dyadic) -> Dyadic {
        self.add_ref(&-o)
    }
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0x0p+0");
        }
        let sign = if self.sign < 0 { '-' } else { '+' };
        write!(f, "{sign}0x{:x}p{:+}", self.mag.to_big(), self.exp)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `[+-]0x<hex>p<exp>`, with optional whitespace around `p`.
    fn from_str(s: &str) -> Result<Dyadic> {
        let bad = || Error::Parse(format!("invalid hex-float {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (neg, rest) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, &t[..]),
        };
        let rest = rest.strip_prefix("0x").or_else(|| rest.strip_prefix("0X")).ok_or_else(bad)?;
        let (m, e) = rest.split_once(['p', 'P']).ok_or_else(bad)?;
        let mag = BigUint::parse_bytes(m.as_bytes(), 16).ok_or_else(bad)?;
        let exp: i64 = e.parse().map_err(|_| bad())?;
        Ok(Dyadic::from_biguint(neg, mag, exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_unique() {
        let z = Dyadic::new(true, 0, 17);
        assert_eq!(z, Dyadic::zero());
        assert_eq!(Dyadic::from_i64(3) - Dyadic::from_i64(3), Dyadic::zero());
        assert_eq!(z.signum(), 0);
    }

    #[test]
    fn canonical_form_has_odd_significand() {
        let d = Dyadic::new(false, 96, -3);
        assert_eq!(d.significand_u128(), Some(3));
        assert_eq!(d.exponent(), 2);
        assert_eq!(d, Dyadic::from_i64(12));
    }

    #[test]
    fn arithmetic_is_exact_across_large_spans() {
        let big = Dyadic::pow2(400);
        let tiny = Dyadic::pow2(-400);
        let s = &big + &tiny;
        assert_eq!(s.significand_bits(), 801);
        assert_eq!(&s - &big, tiny);
        let p = &s * &s;
        assert_eq!(p, Dyadic::pow2(800) + Dyadic::pow2(1) + Dyadic::pow2(-800));
    }

    #[test]
    fn ordering() {
        let a = Dyadic::from_f64(-1.5).unwrap();
        let b = Dyadic::from_f64(0.25).unwrap();
        let c = Dyadic::from_f64(3.0).unwrap();
        assert!(a < b && b < c && a < Dyadic::zero());
        assert!(Dyadic::from_f64(-3.0).unwrap() < a);
        assert_eq!(c.cmp(&(Dyadic::from_i64(1) + Dyadic::from_i64(2))), Ordering::Equal);
    }

    #[test]
    fn f64_round_trip() {
        for x in [1.0, -0.1, 1e-300, 5e-324, f64::MAX, 2.0f64.powi(-1074) * 3.0] {
            let d = Dyadic::from_f64(x).unwrap();
            assert_eq!(d.to_f64(), x);
        }
        assert!(Dyadic::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn ratio_up_is_upper_bound() {
        let one = Dyadic::one();
        let three = Dyadic::from_i64(3);
        let r = one.ratio_up(&three);
        assert!(r > 1.0 / 3.0);
        assert_eq!(r, f64::from_bits((1.0f64 / 3.0).to_bits() + 1));
        assert_eq!(Dyadic::pow2(-3).ratio_up(&one), 0.125);
        assert_eq!(one.ratio_up(&Dyadic::zero()), f64::INFINITY);
    }

    #[test]
    fn hex_text() {
        let d = Dyadic::new(false, 99, -6);
        assert_eq!(d.to_string(), "+0x63p-6");
        assert_eq!("-0x63 p -6".parse::<Dyadic>().unwrap(), -d.clone());
        assert_eq!("0x0p+0".parse::<Dyadic>().unwrap(), Dyadic::zero());
        assert_eq!("+0xc8p-7".parse::<Dyadic>().unwrap(), Dyadic::new(false, 25, -4));
        assert!("0x1q3".parse::<Dyadic>().is_err());
    }
}
