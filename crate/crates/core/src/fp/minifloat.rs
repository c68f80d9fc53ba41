//! Binary floating-point values of arbitrary precision `p` with an unbounded
//! exponent range, and correctly rounded arithmetic on them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use crate::error::{Error, Result};

pub const MIN_PRECISION: u32 = 2;
pub const MAX_PRECISION: u32 = 62;

pub(crate) fn check_precision(p: u32) -> Result<()> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&p) {
        Ok(())
    } else {
        Err(Error::UnsupportedPrecision(p))
    }
}

/// How a single rounding resolves an inexact result.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    NearestEven,
    NearestAway,
    Down,
    Up,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 4] =
        [RoundingMode::NearestEven, RoundingMode::NearestAway, RoundingMode::Down, RoundingMode::Up];

    pub fn is_nearest(self) -> bool {
        matches!(self, RoundingMode::NearestEven | RoundingMode::NearestAway)
    }

    pub fn name(self) -> &'static str {
        match self {
            RoundingMode::NearestEven => "rn-even",
            RoundingMode::NearestAway => "rn-away",
            RoundingMode::Down => "rd",
            RoundingMode::Up => "ru",
        }
    }

    pub fn parse(s: &str) -> Result<RoundingMode> {
        match s.to_ascii_lowercase().as_str() {
            "rn" | "rn-even" | "nearest-even" => Ok(RoundingMode::NearestEven),
            "rn-away" | "nearest-away" => Ok(RoundingMode::NearestAway),
            "rd" | "down" => Ok(RoundingMode::Down),
            "ru" | "up" => Ok(RoundingMode::Up),
            _ => Err(Error::Parse(format!("unknown rounding mode {s:?}"))),
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A directed rounding, used for per-operation faithful rounding.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Down,
    Up,
}

impl Direction {
    pub fn mode(self) -> RoundingMode {
        match self {
            Direction::Down => RoundingMode::Down,
            Direction::Up => RoundingMode::Up,
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::Down => Direction::Up,
            Direction::Up => Direction::Down,
        }
    }

    /// Expands the low `n` bits of `mask` into directions (bit set = up),
    /// least significant bit first.
    pub fn sequence_from_bits(mask: u64, n: usize) -> Vec<Direction> {
        (0..n).map(|i| if (mask >> i) & 1 == 1 { Direction::Up } else { Direction::Down }).collect()
    }
}

/// Rounding configuration: a base mode, optionally overridden by an ordered
/// list of directions consumed one per rounding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundingSpec {
    pub mode: RoundingMode,
    pub directions: Option<Vec<Direction>>,
}

impl RoundingSpec {
    pub fn new(mode: RoundingMode) -> RoundingSpec {
        RoundingSpec { mode, directions: None }
    }

    pub fn nearest_even() -> RoundingSpec {
        RoundingSpec::new(RoundingMode::NearestEven)
    }

    /// Faithful rounding with an explicit direction per operation.
    pub fn faithful(directions: Vec<Direction>) -> RoundingSpec {
        RoundingSpec { mode: RoundingMode::Down, directions: Some(directions) }
    }

    pub fn is_faithful(&self) -> bool {
        self.directions.is_some() || !self.mode.is_nearest()
    }

    /// Unit roundoff: `2^-p` for round-to-nearest, `2^(1-p)` otherwise.
    pub fn unit_roundoff_exp(&self, p: u32) -> i64 {
        if self.is_faithful() {
            1 - i64::from(p)
        } else {
            -i64::from(p)
        }
    }

    pub fn unit_roundoff(&self, p: u32) -> f64 {
        (self.unit_roundoff_exp(p) as f64).exp2()
    }

    pub fn describe(&self) -> String {
        match &self.directions {
            None => self.mode.name().to_string(),
            Some(d) => {
                let s: String = d.iter().map(|d| if *d == Direction::Up { 'U' } else { 'D' }).collect();
                format!("faithful:{s}")
            }
        }
    }
}

impl fmt::Display for RoundingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Parses a mode name or `faithful:` followed by `D`/`U` per rounding.
impl std::str::FromStr for RoundingSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<RoundingSpec> {
        match s.strip_prefix("faithful:") {
            Some(seq) => seq
                .chars()
                .map(|c| match c {
                    'D' | 'd' => Ok(Direction::Down),
                    'U' | 'u' => Ok(Direction::Up),
                    _ => Err(Error::Parse(format!("bad direction {c:?} in {s:?}"))),
                })
                .collect::<Result<Vec<_>>>()
                .map(RoundingSpec::faithful),
            None => RoundingMode::parse(s).map(RoundingSpec::new),
        }
    }
}

/// `±M·2^e` with `2^(p-1) <= M < 2^p`, or zero.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct MiniFloat {
    neg: bool,
    sig: u64,
    exp: i64,
    prec: u8,
}

impl MiniFloat {
    pub fn zero(p: u32) -> MiniFloat {
        MiniFloat { neg: false, sig: 0, exp: 0, prec: p as u8 }
    }

    pub fn one(p: u32) -> MiniFloat {
        MiniFloat::from_parts(p, false, 1, 0).expect("1 is representable")
    }

    /// `±m·2^e`; errors if `m` needs more than `p` bits.
    pub fn from_parts(p: u32, negative: bool, m: u64, e: i64) -> Result<MiniFloat> {
        check_precision(p)?;
        if m == 0 {
            return Ok(MiniFloat::zero(p));
        }
        let tz = m.trailing_zeros();
        let (m, e) = (m >> tz, e + i64::from(tz));
        let bits = 64 - m.leading_zeros();
        if bits > p {
            return Err(Error::NotRepresentable {
                precision: p,
                value: Dyadic::new(negative, u128::from(m), e).to_string(),
            });
        }
        let s = p - bits;
        Ok(MiniFloat { neg: negative, sig: m << s, exp: e - i64::from(s), prec: p as u8 })
    }

    /// Exact conversion; errors if `x` is not representable at precision `p`.
    pub fn from_dyadic(p: u32, x: &Dyadic) -> Result<MiniFloat> {
        check_precision(p)?;
        if x.is_zero() {
            return Ok(MiniFloat::zero(p));
        }
        match x.significand_u128() {
            Some(m) if m >> p == 0 => {
                MiniFloat::from_parts(p, x.is_negative(), m as u64, x.exponent())
            }
            _ => Err(Error::NotRepresentable { precision: p, value: x.to_string() }),
        }
    }

    /// Exact conversion of a finite binary64 value into precision `p`.
    pub fn from_f64(p: u32, x: f64) -> Result<MiniFloat> {
        MiniFloat::from_dyadic(p, &Dyadic::from_f64(x)?)
    }

    pub fn precision(self) -> u32 {
        u32::from(self.prec)
    }

    pub fn is_zero(self) -> bool {
        self.sig == 0
    }

    pub fn is_negative(self) -> bool {
        self.neg
    }

    /// Normalized significand `M` (0 for zero).
    pub fn significand(self) -> u64 {
        self.sig
    }

    /// Exponent `e` with value `±M·2^e`; this is the exponent of `ulp(x)`.
    pub fn exponent_bits(self) -> i64 {
        self.exp
    }

    pub fn abs(self) -> MiniFloat {
        MiniFloat { neg: false, ..self }
    }

    pub fn to_dyadic(self) -> Dyadic {
        if self.sig == 0 {
            Dyadic::zero()
        } else {
            Dyadic::new(self.neg, u128::from(self.sig), self.exp)
        }
    }

    /// Binary64 value; exact whenever `p <= 53` and the exponent is in range.
    pub fn to_f64(self) -> f64 {
        if self.sig == 0 {
            return 0.0;
        }
        if self.prec > 53 {
            return self.to_dyadic().to_f64();
        }
        let (m, e) = (self.sig as f64, self.exp);
        let e = e.clamp(-2200, 2200) as i32;
        // split the scaling so 2^e never underflows prematurely
        let v = m * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
        if self.neg {
            -v
        } else {
            v
        }
    }

    fn nonzero(self) -> Result<()> {
        if self.is_zero() {
            Err(Error::Domain("ufp/ulp/uls of zero".into()))
        } else {
            Ok(())
        }
    }

    /// Unit in the first place, `2^floor(log2|x|)`.
    pub fn ufp(self) -> Result<Dyadic> {
        self.nonzero()?;
        Ok(Dyadic::pow2(self.exp + i64::from(self.prec) - 1))
    }

    /// Unit in the last place, `ufp(x)·2^(1-p)`.
    pub fn ulp(self) -> Result<Dyadic> {
        self.nonzero()?;
        Ok(Dyadic::pow2(self.exp))
    }

    /// Unit in the last significant (nonzero) place.
    pub fn uls(self) -> Result<Dyadic> {
        self.nonzero()?;
        Ok(Dyadic::pow2(self.exp + i64::from(self.sig.trailing_zeros())))
    }

    /// `floor(log2|x|)` for nonzero `x`.
    pub(crate) fn top_exp(self) -> i64 {
        self.exp + i64::from(self.prec) - 1
    }

    /// Multiplies by `2^k` (exact).
    pub fn scale(self, k: i64) -> MiniFloat {
        if self.sig == 0 {
            self
        } else {
            MiniFloat { exp: self.exp + k, ..self }
        }
    }

    /// Hex-float text of the value (canonical odd significand).
    pub fn to_hex(self) -> String {
        self.to_dyadic().to_string()
    }

    pub fn parse_hex(p: u32, s: &str) -> Result<MiniFloat> {
        MiniFloat::from_dyadic(p, &s.parse::<Dyadic>()?)
    }

    fn cmp_abs(self, o: MiniFloat) -> Ordering {
        match (self.sig == 0, o.sig == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (self.top_exp(), o.top_exp());
        if ta != tb {
            return ta.cmp(&tb);
        }
        // align both significands to 63 bits
        let a = self.sig << (63 - u32::from(self.prec));
        let b = o.sig << (63 - u32::from(o.prec));
        a.cmp(&b)
    }
}

impl Neg for MiniFloat {
    type Output = MiniFloat;
    fn neg(self) -> MiniFloat {
        if self.sig == 0 {
            self
        } else {
            MiniFloat { neg: !self.neg, ..self }
        }
    }
}

impl PartialOrd for MiniFloat {
    fn partial_cmp(&self, o: &MiniFloat) -> Option<Ordering> {
        let sa = if self.sig == 0 { 0 } else if self.neg { -1 } else { 1 };
        let sb = if o.sig == 0 { 0 } else if o.neg { -1 } else { 1 };
        Some(match sa.cmp(&sb) {
            Ordering::Equal => match sa {
                0 => Ordering::Equal,
                1 => self.cmp_abs(*o),
                _ => o.cmp_abs(*self),
            },
            ord => ord,
        })
    }
}

impl fmt::Display for MiniFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Reference rounding of an exact value to precision `p`.
///
/// Uses the first entry of the direction sequence when one is present.
pub fn round(x: &Dyadic, p: u32, spec: &RoundingSpec) -> Result<MiniFloat> {
    let mode = match &spec.directions {
        None => spec.mode,
        Some(d) => d.first().ok_or(Error::DirectionsExhausted { used: 0 })?.mode(),
    };
    round_with(x, p, mode)
}

pub(crate) fn round_with(x: &Dyadic, p: u32, mode: RoundingMode) -> Result<MiniFloat> {
    check_precision(p)?;
    if x.is_zero() {
        return Ok(MiniFloat::zero(p));
    }
    let bits = x.significand_bits();
    let neg = x.is_negative();
    let p64 = u64::from(p);
    if bits <= p64 {
        let m = x.significand_u128().expect("fits in p bits") as u64;
        return MiniFloat::from_parts(p, neg, m, x.exponent());
    }
    let shift = bits - p64;
    // The canonical significand is odd, so the discarded part is never zero.
    let (mut q, half, below_half) = match x.significand_u128() {
        Some(m) => {
            let q = (m >> shift) as u64;
            let half = (m >> (shift - 1)) & 1 == 1;
            let below = m & ((1u128 << (shift - 1)) - 1) != 0;
            (q, half, below)
        }
        None => {
            let q = x.significand_shr(shift);
            let q: u64 = num_traits::ToPrimitive::to_u64(&q).expect("p-bit quotient");
            (q, x.bit_at(shift - 1), x.any_low_bits(shift - 1))
        }
    };
    let up = match mode {
        RoundingMode::NearestEven => half && (below_half || q & 1 == 1),
        RoundingMode::NearestAway => half,
        RoundingMode::Down => neg,
        RoundingMode::Up => !neg,
    };
    let mut exp = x.exponent() + shift as i64;
    if up {
        q += 1;
        if q == 1u64 << p {
            q >>= 1;
            exp += 1;
        }
    }
    MiniFloat::from_parts(p, neg, q, exp)
}

/// Every value with exponent (of the last place) in `[e_lo, e_hi]`, both
/// signs, plus zero once. Order: zero, then by exponent, significand, sign.
pub fn enumerate(p: u32, e_lo: i64, e_hi: i64) -> impl Iterator<Item = MiniFloat> {
    let lo_sig = 1u64 << (p - 1);
    let hi_sig = 1u64 << p;
    std::iter::once(MiniFloat::zero(p)).chain((e_lo..=e_hi).flat_map(move |e| {
        (lo_sig..hi_sig).flat_map(move |m| {
            let v = MiniFloat { neg: false, sig: m, exp: e, prec: p as u8 };
            [v, -v]
        })
    }))
}

/// Positive values only, with exponent in `[e_lo, e_hi]`.
pub fn enumerate_positive(p: u32, e_lo: i64, e_hi: i64) -> impl Iterator<Item = MiniFloat> {
    let lo_sig = 1u64 << (p - 1);
    let hi_sig = 1u64 << p;
    (e_lo..=e_hi).flat_map(move |e| {
        (lo_sig..hi_sig).map(move |m| MiniFloat { neg: false, sig: m, exp: e, prec: p as u8 })
    })
}

// ---------------------------------------------------------------------------
// Fast kernel: exact results are formed in u128 where they fit, otherwise the
// operation falls back to the dyadic path.

#[derive(Copy, Clone, Debug)]
struct Term {
    neg: bool,
    mag: u128,
    exp: i64,
}

impl Term {
    fn of(x: MiniFloat) -> Term {
        Term { neg: x.neg, mag: u128::from(x.sig), exp: x.exp }
    }

    fn top(&self) -> i64 {
        self.exp + i64::from(127 - self.mag.leading_zeros())
    }

    fn to_dyadic(self) -> Dyadic {
        Dyadic::new(self.neg, self.mag, self.exp)
    }
}

fn round_term(p: u32, mode: RoundingMode, t: Term) -> MiniFloat {
    if t.mag == 0 {
        return MiniFloat::zero(p);
    }
    let bits = 128 - t.mag.leading_zeros();
    if bits <= p {
        let s = p - bits;
        return MiniFloat { neg: t.neg, sig: (t.mag << s) as u64, exp: t.exp - i64::from(s), prec: p as u8 };
    }
    let shift = bits - p;
    let mut q = (t.mag >> shift) as u64;
    let rem = t.mag & ((1u128 << shift) - 1);
    let half = 1u128 << (shift - 1);
    let up = match mode {
        RoundingMode::NearestEven => rem > half || (rem == half && q & 1 == 1),
        RoundingMode::NearestAway => rem >= half,
        RoundingMode::Down => t.neg && rem != 0,
        RoundingMode::Up => !t.neg && rem != 0,
    };
    let mut exp = t.exp + i64::from(shift);
    if up {
        q += 1;
        if q == 1u64 << p {
            q >>= 1;
            exp += 1;
        }
    }
    MiniFloat { neg: t.neg, sig: q, exp, prec: p as u8 }
}

fn round_sum(p: u32, mode: RoundingMode, a: Term, b: Term) -> MiniFloat {
    if a.mag == 0 {
        return round_term(p, mode, b);
    }
    if b.mag == 0 {
        return round_term(p, mode, a);
    }
    let (big, small) = if a.top() >= b.top() { (a, b) } else { (b, a) };
    let tb = big.top();
    // Below 2^k the smaller term cannot move the sum across a rounding
    // boundary, so any value of the same sign in (0, 2^k) rounds the same.
    let k = big.exp.min(tb - i64::from(p) - 2);
    if small.top() < k {
        let mag = big.mag << (big.exp - (k - 1));
        let mag = if big.neg == small.neg { mag + 1 } else { mag - 1 };
        return round_term(p, mode, Term { neg: big.neg, mag, exp: k - 1 });
    }
    let e = big.exp.min(small.exp);
    if tb - e + 2 > 127 {
        let exact = big.to_dyadic() + small.to_dyadic();
        return round_with(&exact, p, mode).expect("precision already validated");
    }
    let ma = big.mag << (big.exp - e);
    let mb = small.mag << (small.exp - e);
    let t = if big.neg == small.neg {
        Term { neg: big.neg, mag: ma + mb, exp: e }
    } else if ma >= mb {
        Term { neg: big.neg, mag: ma - mb, exp: e }
    } else {
        Term { neg: small.neg, mag: mb - ma, exp: e }
    };
    round_term(p, mode, t)
}

pub(crate) fn add_rounded(p: u32, mode: RoundingMode, a: MiniFloat, b: MiniFloat) -> MiniFloat {
    round_sum(p, mode, Term::of(a), Term::of(b))
}

pub(crate) fn mul_rounded(p: u32, mode: RoundingMode, a: MiniFloat, b: MiniFloat) -> MiniFloat {
    let t = Term { neg: a.neg != b.neg, mag: u128::from(a.sig) * u128::from(b.sig), exp: a.exp + b.exp };
    round_term(p, mode, t)
}

pub(crate) fn fma_rounded(p: u32, mode: RoundingMode, a: MiniFloat, b: MiniFloat, c: MiniFloat) -> MiniFloat {
    let prod = Term { neg: a.neg != b.neg, mag: u128::from(a.sig) * u128::from(b.sig), exp: a.exp + b.exp };
    round_sum(p, mode, prod, Term::of(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mf(p: u32, m: i64, e: i64) -> MiniFloat {
        MiniFloat::from_parts(p, m < 0, m.unsigned_abs(), e).unwrap()
    }

    /// Brute force: nearest candidates among all p-bit values bracketing x.
    fn brute_round(x: &Dyadic, p: u32, mode: RoundingMode) -> MiniFloat {
        let top = x.top_exponent().unwrap();
        let mut cands: Vec<MiniFloat> = Vec::new();
        for e in (top - i64::from(p) - 1)..=(top - i64::from(p) + 2) {
            for m in (1u64 << (p - 1))..(1u64 << p) {
                cands.push(mf(p, m as i64, e));
                cands.push(mf(p, -(m as i64), e));
            }
        }
        let below = cands.iter().filter(|c| c.to_dyadic() <= *x).max_by(|a, b| a.partial_cmp(b).unwrap()).copied().unwrap();
        let above = cands.iter().filter(|c| c.to_dyadic() >= *x).min_by(|a, b| a.partial_cmp(b).unwrap()).copied().unwrap();
        match mode {
            RoundingMode::Down => below,
            RoundingMode::Up => above,
            _ => {
                let db = x - below.to_dyadic();
                let da = above.to_dyadic() - x;
                match db.cmp(&da) {
                    Ordering::Less => below,
                    Ordering::Greater => above,
                    Ordering::Equal => {
                        if mode == RoundingMode::NearestAway {
                            if x.is_negative() { below } else { above }
                        } else if below.significand() % 2 == 0 {
                            below
                        } else {
                            above
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tie_rounds_to_even_at_p6() {
        let x = Dyadic::new(false, 99, -6);
        let spec = RoundingSpec::nearest_even();
        assert_eq!(round(&x, 6, &spec).unwrap(), mf(6, 100, -6));
        assert_eq!(brute_round(&x, 6, RoundingMode::NearestEven), mf(6, 100, -6));
        assert_eq!(round(&x, 6, &RoundingSpec::new(RoundingMode::Down)).unwrap(), mf(6, 98, -6));
        assert_eq!(brute_round(&x, 6, RoundingMode::Down), mf(6, 98, -6));
        assert_eq!(round(&x, 6, &RoundingSpec::new(RoundingMode::NearestAway)).unwrap(), mf(6, 100, -6));
        assert_eq!(round(&x, 6, &RoundingSpec::new(RoundingMode::Up)).unwrap(), mf(6, 100, -6));
    }

    #[test]
    fn one_is_fixed_by_every_mode() {
        for p in [2, 6, 24, 53, 62] {
            for mode in RoundingMode::ALL {
                assert_eq!(round(&Dyadic::one(), p, &RoundingSpec::new(mode)).unwrap(), MiniFloat::one(p));
            }
        }
    }

    #[test]
    fn empty_direction_sequence_is_a_configuration_error() {
        let spec = RoundingSpec::faithful(vec![]);
        assert_eq!(round(&Dyadic::one(), 6, &spec), Err(Error::DirectionsExhausted { used: 0 }));
    }

    #[test]
    fn reference_rounding_matches_brute_force() {
        for p in [3u32, 4, 6] {
            for m in 1u128..(1 << (p + 4)) {
                for neg in [false, true] {
                    let x = Dyadic::new(neg, m, -7);
                    for mode in RoundingMode::ALL {
                        assert_eq!(round_with(&x, p, mode).unwrap(), brute_round(&x, p, mode), "{x} p={p} {mode}");
                    }
                }
            }
        }
    }

    #[test]
    fn ufp_ulp_uls() {
        // x = (1.x1...x49 100)_2 · 2^e at p = 53
        let e = 7;
        let m: u64 = (1u64 << 52) | (0x1_2345_6789_abu64 << 3) | 0b100;
        let x = MiniFloat::from_parts(53, false, m, e - 52).unwrap();
        assert_eq!(x.ufp().unwrap(), Dyadic::pow2(e));
        assert_eq!(x.ulp().unwrap(), Dyadic::pow2(e - 52));
        assert_eq!(x.uls().unwrap(), Dyadic::pow2(e - 50));
        assert_eq!(x.exponent_bits(), e - 52);

        let one = MiniFloat::one(6);
        assert_eq!(one.ufp().unwrap(), Dyadic::one());
        assert_eq!(one.ulp().unwrap(), Dyadic::pow2(-5));
        assert_eq!(one.uls().unwrap(), Dyadic::one());

        let x = mf(6, 3, -1);
        assert_eq!(x.ufp().unwrap(), Dyadic::one());
        assert_eq!(x.uls().unwrap(), Dyadic::pow2(-1));
        assert_eq!(x.uls().unwrap(), x.ulp().unwrap().mul_pow2(6 - 2));

        assert!(MiniFloat::zero(6).ufp().is_err());
        assert!(MiniFloat::zero(6).uls().is_err());
    }

    #[test]
    fn ulp_brackets_magnitude() {
        for x in enumerate(6, -3, 3).filter(|x| !x.is_zero()) {
            let ax = x.to_dyadic().abs();
            let ulp = x.ulp().unwrap();
            assert!(ax.mul_pow2(-6) <= ulp && ulp <= ax.mul_pow2(-5));
        }
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate(3, 0, 0).count(), 9);
        assert_eq!(enumerate(3, 0, 0).map(|x| x.abs()).filter(|x| !x.is_zero()).collect::<std::collections::HashSet<_>>().len(), 4);
        assert_eq!(enumerate(6, 0, 1).filter(|x| !x.is_zero()).count(), 128);
        let all: Vec<_> = enumerate(5, -2, 2).collect();
        let set: std::collections::HashSet<_> = all.iter().copied().collect();
        assert_eq!(set.len(), all.len());
    }

    #[test]
    fn fast_kernel_agrees_with_dyadic_rounding_exhaustively() {
        let p = 5;
        let vals: Vec<MiniFloat> = enumerate(p, -9, 2).collect();
        for &a in &vals {
            for &b in vals.iter().step_by(3) {
                for mode in RoundingMode::ALL {
                    let s = add_rounded(p, mode, a, b);
                    let r = round_with(&(a.to_dyadic() + b.to_dyadic()), p, mode).unwrap();
                    assert_eq!(s, r, "{a} + {b} {mode}");
                    let m = mul_rounded(p, mode, a, b);
                    let r = round_with(&(a.to_dyadic() * b.to_dyadic()), p, mode).unwrap();
                    assert_eq!(m, r, "{a} * {b} {mode}");
                }
            }
        }
    }

    #[test]
    fn fast_fma_agrees_with_dyadic_rounding() {
        let p = 4;
        let vals: Vec<MiniFloat> = enumerate(p, -6, 1).collect();
        for &a in vals.iter().step_by(2) {
            for &b in vals.iter().step_by(5) {
                for &c in vals.iter() {
                    for mode in RoundingMode::ALL {
                        let f = fma_rounded(p, mode, a, b, c);
                        let exact = a.to_dyadic() * b.to_dyadic() + c.to_dyadic();
                        assert_eq!(f, round_with(&exact, p, mode).unwrap(), "fma({a},{b},{c}) {mode}");
                    }
                }
            }
        }
    }

    #[test]
    fn wide_fma_uses_exact_fallback() {
        let p = 53;
        let a = MiniFloat::from_f64(p, 1.0 + 2f64.powi(-52)).unwrap();
        let c = MiniFloat::from_f64(p, -2f64.powi(-120)).unwrap();
        for mode in RoundingMode::ALL {
            let f = fma_rounded(p, mode, a, a, c);
            let exact = a.to_dyadic() * a.to_dyadic() + c.to_dyadic();
            assert_eq!(f, round_with(&exact, p, mode).unwrap());
        }
        let x = 1.0 + 2f64.powi(-30);
        let y = 1.0 - 2f64.powi(-29);
        let z = -1.0;
        let e = fma_rounded(p, RoundingMode::NearestEven, MiniFloat::from_f64(p, x).unwrap(), MiniFloat::from_f64(p, y).unwrap(), MiniFloat::from_f64(p, z).unwrap());
        assert_eq!(e.to_f64(), x.mul_add(y, z));
    }

    #[test]
    fn hex_round_trip() {
        let x = mf(6, -99 + 1, -6);
        assert_eq!(MiniFloat::parse_hex(6, &x.to_hex()).unwrap(), x);
        assert!(MiniFloat::parse_hex(6, "+0x63p-6").is_err());
        assert_eq!(MiniFloat::parse_hex(7, "+0x63p-6").unwrap(), mf(7, 99, -6));
    }

    #[test]
    fn precision_bounds() {
        assert!(MiniFloat::from_parts(1, false, 1, 0).is_err());
        assert!(MiniFloat::from_parts(63, false, 1, 0).is_err());
        assert!(MiniFloat::from_parts(62, false, (1 << 62) - 1, 0).is_ok());
    }
}
