//! Case generation for the small-precision sweeps.
//!
//! High parts: `x_h` runs over every significand in `[1, 2)` (the checked
//! properties are invariant under scaling by powers of two), `y_h` over every
//! significand and sign with exponent offset `k` in `[-(p+2), 2]`. Low parts
//! come from a per-high-part candidate set: zero, the extremes allowed by the
//! hypothesis and their neighbours, the rounding boundaries around
//! `ulp(h)/2`, small multiples of `ulp(h)`, the tiniest magnitude
//! `ufp(h)·2^(-2p-2)` of the enumerated range, and a few random values.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::probe::nonoverlapping;
use crate::fp::{Dyadic, MiniFloat, RoundingMode};

/// Which low parts a high part admits.
#[derive(Clone, Debug)]
pub(crate) enum LowRule {
    /// `|l| <= limit·2^u_exp·|h|`; with `sign = Some(true)` only `l >= 0`,
    /// with `Some(false)` only `l <= 0`.
    Overlap { limit: Dyadic, u_exp: i64, sign: Option<bool> },
    /// `RN(h + l) = h`.
    Nonoverlapping(RoundingMode),
}

impl LowRule {
    pub(crate) fn admits(&self, h: MiniFloat, l: MiniFloat) -> bool {
        match self {
            LowRule::Overlap { limit, u_exp, sign } => {
                let sign_ok = match sign {
                    None => true,
                    Some(true) => !l.is_negative(),
                    Some(false) => l.is_negative() || l.is_zero(),
                };
                sign_ok && l.to_dyadic().abs() <= (limit * &h.to_dyadic().abs()).mul_pow2(*u_exp)
            }
            LowRule::Nonoverlapping(mode) => nonoverlapping(h, l, *mode),
        }
    }

    /// Largest admissible magnitude, as an exact value (not necessarily representable).
    fn max_magnitude(&self, h: MiniFloat) -> Dyadic {
        match self {
            LowRule::Overlap { limit, u_exp, .. } => (limit * &h.to_dyadic().abs()).mul_pow2(*u_exp),
            LowRule::Nonoverlapping(_) => h.ulp().expect("nonzero high part").mul_pow2(-1),
        }
    }
}

/// Deterministic stream for case `index` of a sweep keyed by `seed`.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub(crate) fn mf(p: u32, negative: bool, m: u64, e: i64) -> MiniFloat {
    MiniFloat::from_parts(p, negative, m, e).expect("significand fits")
}

/// `x_h` candidates: positive, in `[1, 2)`.
pub(crate) fn x_his(p: u32) -> Vec<MiniFloat> {
    (1u64 << (p - 1)..1u64 << p).map(|m| mf(p, false, m, 1 - i64::from(p))).collect()
}

/// `y_h` candidates for exponent offset `k`: both signs.
pub(crate) fn y_his(p: u32, k: i64) -> Vec<MiniFloat> {
    (1u64 << (p - 1)..1u64 << p)
        .flat_map(|m| [mf(p, false, m, 1 - i64::from(p) + k), mf(p, true, m, 1 - i64::from(p) + k)])
        .collect()
}

pub(crate) fn offsets(p: u32) -> std::ops::RangeInclusive<i64> {
    -(i64::from(p) + 2)..=2
}

/// Every `(x_h, y_h)` pair of the grid, in a fixed order.
pub(crate) fn hi_pairs(p: u32) -> Vec<(MiniFloat, MiniFloat)> {
    let xs = x_his(p);
    let mut out = Vec::new();
    for k in offsets(p) {
        let ys = y_his(p, k);
        for &x in &xs {
            for &y in &ys {
                out.push((x, y));
            }
        }
    }
    out
}

fn pos(p: u32, x: &Dyadic) -> Option<MiniFloat> {
    if x.is_zero() {
        return None;
    }
    crate::fp::round(x, p, &crate::fp::RoundingSpec::new(RoundingMode::Down)).ok()
}

fn pred(x: MiniFloat) -> MiniFloat {
    let p = x.precision();
    let (m, e) = (x.significand(), x.exponent_bits());
    if m == 1 << (p - 1) {
        mf(p, false, (1 << p) - 1, e - 1)
    } else {
        mf(p, false, m - 1, e)
    }
}

fn succ(x: MiniFloat) -> MiniFloat {
    let p = x.precision();
    let (m, e) = (x.significand(), x.exponent_bits());
    if m == (1 << p) - 1 {
        mf(p, false, 1 << (p - 1), e + 1)
    } else {
        mf(p, false, m + 1, e)
    }
}

/// Exponent of the smallest enumerated low-part binade: `ufp(h)·2^(-2p-2)`.
fn tiny_exp(h: MiniFloat) -> i64 {
    h.exponent_bits() + i64::from(h.precision()) - 1 - 2 * i64::from(h.precision()) - 2
}

/// Low-part candidates for `h`, admissible under `rule`, sorted and deduplicated.
pub(crate) fn low_candidates(h: MiniFloat, rule: &LowRule, n_random: usize, rng: &mut impl RngCore) -> Vec<MiniFloat> {
    let p = h.precision();
    let ulp = h.ulp().expect("nonzero high part");
    let mut mags: Vec<MiniFloat> = Vec::new();
    let mut push = |d: Dyadic| {
        if let Some(v) = pos(p, &d) {
            mags.push(v);
        }
    };
    let lmax = rule.max_magnitude(h);
    if let Some(l) = pos(p, &lmax) {
        for k in 0..4 {
            push(l.to_dyadic().mul_pow2(-k));
        }
        push(pred(l).to_dyadic());
    }
    let half = ulp.mul_pow2(-1);
    for d in [half.clone(), ulp.mul_pow2(-2), ulp.clone(), ulp.mul_pow2(1)] {
        let v = pos(p, &d).expect("power of two");
        push(pred(v).to_dyadic());
        push(succ(v).to_dyadic());
        push(d);
    }
    push(&ulp * &Dyadic::from_i64(3));
    push((&ulp * &Dyadic::from_i64(3)).mul_pow2(-1));
    let te = tiny_exp(h);
    push(Dyadic::pow2(te));
    push(Dyadic::new(false, (1u128 << p) - 1, te - i64::from(p) + 1));
    let top = lmax.top_exponent().unwrap_or(te).max(te);
    for _ in 0..n_random {
        let k = rng.random_range(te..=top);
        let m = rng.random_range(1u64 << (p - 1)..1u64 << p);
        push(Dyadic::new(false, u128::from(m), k - i64::from(p) + 1));
    }
    let mut out = vec![MiniFloat::zero(p)];
    for m in mags {
        for l in [m, -m] {
            if rule.admits(h, l) {
                out.push(l);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("total on finite values"));
    out.dedup();
    out
}

/// Number of admissible low parts with magnitude at least `ufp(h)·2^(-2p-2)`,
/// plus one for zero: the per-high-part size of the full enumeration.
pub(crate) fn admissible_count(h: MiniFloat, rule: &LowRule) -> f64 {
    let p = h.precision();
    let lmax = rule.max_magnitude(h);
    let te = tiny_exp(h);
    let Some(top) = lmax.top_exponent() else {
        return 1.0;
    };
    let mut n = 0.0;
    for k in te..=top {
        // positive floats M·2^(k-p+1) with 2^(p-1) <= M < 2^p and M·2^(k-p+1) <= lmax
        let unit = k - i64::from(p) + 1;
        let cap = lmax.mul_pow2(-unit).to_f64().floor();
        let hi = cap.min(((1u64 << p) - 1) as f64);
        let lo = (1u64 << (p - 1)) as f64;
        if hi >= lo {
            n += hi - lo + 1.0;
        }
    }
    let signs = match rule {
        LowRule::Overlap { sign: Some(_), .. } => 1.0,
        _ => 2.0,
    };
    1.0 + signs * n
}

/// Up to `budget` low-part pairs from the two candidate lists: every pair
/// if the product is small enough, otherwise all pairs with a zero side, a
/// diagonal, an antidiagonal and random pairs.
pub(crate) fn low_pairs(
    cx: &[MiniFloat],
    cy: &[MiniFloat],
    budget: usize,
    rng: &mut impl RngCore,
) -> Vec<(MiniFloat, MiniFloat)> {
    if cx.len() * cy.len() <= budget {
        return cx.iter().flat_map(|&a| cy.iter().map(move |&b| (a, b))).collect();
    }
    let (zx, zy) = (cx.iter().position(|v| v.is_zero()), cy.iter().position(|v| v.is_zero()));
    let mut idx: Vec<(usize, usize)> = Vec::with_capacity(budget);
    if let Some(j) = zy {
        idx.extend((0..cx.len()).map(|i| (i, j)));
    }
    if let Some(i) = zx {
        idx.extend((0..cy.len()).map(|j| (i, j)));
    }
    let n = cx.len().max(cy.len());
    for i in 0..n {
        idx.push((i % cx.len(), i * cy.len() / n));
        idx.push((i % cx.len(), cy.len() - 1 - i * cy.len() / n));
    }
    while idx.len() < budget {
        idx.push((rng.random_range(0..cx.len()), rng.random_range(0..cy.len())));
    }
    idx.sort_unstable();
    idx.dedup();
    idx.into_iter().map(|(i, j)| (cx[i], cy[j])).collect()
}

/// A random high part pair from the grid distribution.
pub(crate) fn random_hi_pair(p: u32, rng: &mut impl RngCore) -> (MiniFloat, MiniFloat) {
    let sig = |r: &mut dyn RngCore| r.random_range(1u64 << (p - 1)..1u64 << p);
    let x = mf(p, false, sig(rng), 1 - i64::from(p));
    let k = rng.random_range(offsets(p));
    let y = mf(p, rng.random_bool(0.5), sig(rng), 1 - i64::from(p) + k);
    (x, y)
}

/// A random admissible low part for `h`: zero with probability 1/8,
/// otherwise log-uniform magnitude over the enumerated range.
pub(crate) fn random_low(h: MiniFloat, rule: &LowRule, rng: &mut impl RngCore) -> MiniFloat {
    let p = h.precision();
    let te = tiny_exp(h);
    let lmax = rule.max_magnitude(h);
    let Some(top) = lmax.top_exponent() else {
        return MiniFloat::zero(p);
    };
    loop {
        if rng.random_range(0..8) == 0 {
            return MiniFloat::zero(p);
        }
        let k = rng.random_range(te..=top.max(te));
        let m = rng.random_range(1u64 << (p - 1)..1u64 << p);
        let l = mf(p, rng.random_bool(0.5), m, k - i64::from(p) + 1);
        if rule.admits(h, l) {
            return l;
        }
    }
}
