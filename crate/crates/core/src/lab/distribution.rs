//! Empirical error distribution of the sloppy addition under cancellation,
//! next to the uniform-significand approximations. Informational only.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cases::{mf, rng_for};
use super::probe::nonoverlapping;
use super::rel_error;
use crate::dw::{sloppy_add, DoubleWord};
use crate::eft::TwoSumImpl;
use crate::error::{Error, Result};
use crate::fp::{MiniFloat, RoundingMode, SoftEngine};

/// Exponent relation of the two high parts (`x_h > 0 > y_h`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionCase {
    /// `e_x = e_y`, `M_y < M_x`: threshold `2^(-p-k)`, approximation `(1 - 2^(k-(p-1)))²`.
    SameExponent,
    /// `e_x = e_y + 1`: threshold `3·2^(-p-k)`, approximation `1 - 2^(2(k-p))`.
    ExponentGap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub k: i32,
    pub threshold: f64,
    pub analytic: f64,
    /// `None` when no samples were drawn.
    pub empirical: Option<f64>,
}

impl DistributionCase {
    pub fn threshold(self, p: u32, k: i32) -> f64 {
        let t = 2f64.powi(-(p as i32) - k);
        match self {
            DistributionCase::SameExponent => t,
            DistributionCase::ExponentGap => 3.0 * t,
        }
    }

    pub fn analytic(self, p: u32, k: i32) -> f64 {
        let p = p as i32;
        match self {
            DistributionCase::SameExponent => (1.0 - 2f64.powi(k - (p - 1))).powi(2),
            DistributionCase::ExponentGap => 1.0 - 2f64.powi(2 * (k - p)),
        }
    }
}

fn random_low(h: MiniFloat, rng: &mut impl Rng) -> MiniFloat {
    let p = h.precision();
    loop {
        // magnitude below ulp(h)/2, log-uniform over p extra binades
        let e = h.exponent_bits() - 1 - rng.random_range(1..=i64::from(p));
        let l = mf(p, rng.random_bool(0.5), rng.random_range(1u64 << (p - 1)..1u64 << p), e - i64::from(p) + 1);
        if nonoverlapping(h, l, RoundingMode::NearestEven) {
            return l;
        }
    }
}

/// Fraction of `samples` random cases (RN-even, uniform significands) whose
/// relative error is at most the threshold for each `k`.
pub fn empirical_distribution(
    p: u32,
    case: DistributionCase,
    ks: &[i32],
    samples: u64,
    seed: u64,
) -> Result<Vec<DistributionRow>> {
    if !(4..=62).contains(&p) {
        return Err(Error::Usage(format!("precision {p} outside 4..=62")));
    }
    let mut errors = Vec::with_capacity(samples as usize);
    if !ks.is_empty() {
        let mut e = SoftEngine::with_mode(p, RoundingMode::NearestEven)?;
        let mut rng = rng_for(seed, 70);
        let lo = 1u64 << (p - 1);
        let hi = 1u64 << p;
        while (errors.len() as u64) < samples {
            let mx = rng.random_range(lo..hi);
            let my = rng.random_range(lo..hi);
            let (xh, yh) = match case {
                DistributionCase::SameExponent if my < mx => (mf(p, false, mx, 0), mf(p, true, my, 0)),
                DistributionCase::SameExponent => continue,
                DistributionCase::ExponentGap => (mf(p, false, mx, 1), mf(p, true, my, 0)),
            };
            let x = DoubleWord::new(xh, random_low(xh, &mut rng));
            let y = DoubleWord::new(yh, random_low(yh, &mut rng));
            e.reset();
            let z = sloppy_add(&mut e, x, y, TwoSumImpl::Standard);
            errors.push(rel_error(&z, &(x.value() + y.value())));
        }
    }
    Ok(ks
        .iter()
        .map(|&k| {
            let threshold = case.threshold(p, k);
            let empirical = (!errors.is_empty())
                .then(|| errors.iter().filter(|&&v| v <= threshold).count() as f64 / errors.len() as f64);
            DistributionRow { k, threshold, analytic: case.analytic(p, k), empirical }
        })
        .collect())
}
