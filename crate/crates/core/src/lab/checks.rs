//! Theorem checkers over the small-precision case grid.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::cases::{
    admissible_count, hi_pairs, low_candidates, low_pairs, mf, offsets, random_hi_pair, random_low, rng_for, x_his,
    y_his, LowRule,
};
use super::probe::{
    adjacency, observe, overlap_limit, record, Adjacency, DirectedOp, EftOp, IntervalOp, Observation, Probe,
};
use super::{Measurement, Stopwatch, SweepReport};
use crate::dw::{cancellation_at_most_half, AddAlgorithm};
use crate::error::{Error, Result};
use crate::fp::{Direction, Dyadic, MiniFloat, RoundingMode, RoundingSpec, SoftEngine};

/// Rounding policy of a sweep.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    RnEven,
    RnAway,
    Rd,
    Ru,
    /// A fresh random direction for every operation of every case.
    Faithful,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::RnEven => "rn-even",
            Policy::RnAway => "rn-away",
            Policy::Rd => "rd",
            Policy::Ru => "ru",
            Policy::Faithful => "faithful",
        }
    }

    pub fn mode(self) -> Option<RoundingMode> {
        match self {
            Policy::RnEven => Some(RoundingMode::NearestEven),
            Policy::RnAway => Some(RoundingMode::NearestAway),
            Policy::Rd => Some(RoundingMode::Down),
            Policy::Ru => Some(RoundingMode::Up),
            Policy::Faithful => None,
        }
    }

    fn spec(self) -> RoundingSpec {
        match self.mode() {
            Some(m) => RoundingSpec::new(m),
            None => RoundingSpec::faithful(Vec::new()),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Policy> {
        if s.eq_ignore_ascii_case("faithful") {
            return Ok(Policy::Faithful);
        }
        Ok(match RoundingMode::parse(s)? {
            RoundingMode::NearestEven => Policy::RnEven,
            RoundingMode::NearestAway => Policy::RnAway,
            RoundingMode::Down => Policy::Rd,
            RoundingMode::Up => Policy::Ru,
        })
    }
}

/// Sweep budget and selection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Upper bound on grid cases per policy; high-part pairs are strided to fit.
    pub max_grid_cases: u64,
    /// Low-part pairs evaluated per high-part pair.
    pub pairs_per_hi: usize,
    /// Random low-part candidates added per high part.
    pub random_lows: usize,
    /// Stratified random cases per policy, on top of the grid.
    pub random_cases: u64,
    pub seed: u64,
    /// Restricts the sweep to one policy.
    pub policy: Option<Policy>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            max_grid_cases: 2_000_000,
            pairs_per_hi: 48,
            random_lows: 4,
            random_cases: 200_000,
            seed: 0x5eed,
            policy: None,
        }
    }
}

impl SweepOptions {
    /// A small budget for smoke runs.
    pub fn quick() -> Self {
        SweepOptions { max_grid_cases: 100_000, pairs_per_hi: 16, random_lows: 2, random_cases: 10_000, ..Self::default() }
    }

    fn policies(&self, allowed: &[Policy]) -> Result<Vec<Policy>> {
        match self.policy {
            None => Ok(allowed.to_vec()),
            Some(p) if allowed.contains(&p) => Ok(vec![p]),
            Some(p) => Err(Error::Usage(format!(
                "policy {p} not supported here; expected one of {}",
                allowed.iter().map(|p| p.name()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

fn check_p(p: u32, min: u32) -> Result<()> {
    if (min..=12).contains(&p) {
        Ok(())
    } else {
        Err(Error::Usage(format!("precision {p} outside the supported range {min}..=12")))
    }
}

pub(crate) fn probe_name(p: Probe) -> String {
    match p {
        Probe::Fast2SumExact => "fast2sum-exact".into(),
        Probe::EftExact { op } => format!("eft.{}", op.name()),
        Probe::SloppyAbs => "sloppy-abs".into(),
        Probe::SloppyFast2Sum => "sloppy-fast2sum".into(),
        Probe::SloppyRel => "sloppy-rel".into(),
        Probe::AccurateRel => "accurate-rel".into(),
        Probe::AccurateFast2Sums => "accurate-fast2sums".into(),
        Probe::AccurateDirectedRel => "accurate-directed-rel".into(),
        Probe::Direction(op) => match op {
            DirectedOp::Sloppy => "direction.sloppy".into(),
            DirectedOp::Accurate => "direction.accurate".into(),
            DirectedOp::AccurateDirected => "direction.accurate-directed".into(),
            DirectedOp::Mul { normalize, include_ll } => {
                format!("direction.mul(norm={normalize},ll={include_ll})")
            }
            DirectedOp::Maa { add, normalize_mul, include_ll } => {
                format!("direction.maa({},norm_mul={normalize_mul},ll={include_ll})", add.name())
            }
        },
        Probe::Enclosure(op) => format!("enclosure.{op:?}").to_lowercase(),
        Probe::ProductOverlap { include_ll } => format!("product-overlap(ll={include_ll})"),
    }
}

/// Per-policy sweep state: a rewindable engine and the report being filled.
struct Runner<'a> {
    e: SoftEngine,
    policy: Policy,
    p: u32,
    u: f64,
    report: SweepReport,
    expected: &'a dyn Fn(Probe) -> bool,
    started: Stopwatch,
}

impl<'a> Runner<'a> {
    fn new(check: &str, p: u32, policy: Policy, expected: &'a dyn Fn(Probe) -> bool) -> Result<Runner<'a>> {
        let spec = policy.spec();
        let u = spec.unit_roundoff(p);
        Ok(Runner {
            e: SoftEngine::new(p, spec)?,
            policy,
            p,
            u,
            report: SweepReport::new(check, p, policy.name()),
            expected,
            started: Stopwatch::now(),
        })
    }

    /// Evaluates one case; returns the observation when it was applicable.
    fn run(&mut self, probe: Probe, inputs: &[MiniFloat], rng: &mut impl RngCore) -> Result<Option<Observation>> {
        self.e.reset();
        if self.policy == Policy::Faithful {
            let mask = rng.next_u64();
            self.e.set_directions(Direction::sequence_from_bits(mask, 64));
        }
        let obs = observe(&mut self.e, probe, inputs)?;
        let name = probe_name(probe);
        if !obs.applicable {
            self.report.stat_add(&format!("skipped.{name}"), 1.0);
            return Ok(None);
        }
        self.report.cases += 1;
        let in_u2 = obs.observed / (self.u * self.u);
        self.report.stat_max(&format!("max_u2.{name}"), in_u2);
        if !obs.holds {
            let v = record(probe, self.p, &self.e, inputs, &obs);
            if (self.expected)(probe) {
                self.report.record_expected_failure(v);
            } else {
                self.report.record_violation(v);
            }
        }
        Ok(Some(obs))
    }

    fn finish(mut self) -> SweepReport {
        self.report.runtime = self.started.elapsed();
        self.report
    }
}

/// Indices of high-part pairs visited under the grid budget, and the
/// resulting fraction of pairs.
fn hi_stride(total: usize, per_pair: usize, budget: u64) -> (usize, f64) {
    let full = (total as u64) * per_pair as u64;
    if full <= budget {
        (1, 1.0)
    } else {
        let stride = full.div_ceil(budget.max(1)) as usize;
        (stride, 1.0 / stride as f64)
    }
}

/// Sweeps the two-double-word grid: for each visited high-part pair, the
/// per-pair low-part selection, then `opts.random_cases` random cases.
/// `each` receives the inputs and returns the probes to run.
fn sweep_pairs(
    r: &mut Runner<'_>,
    rule: &dyn Fn(MiniFloat) -> LowRule,
    probes: &[Probe],
    opts: &SweepOptions,
    stream: u64,
    mut extra: impl FnMut(&mut Runner<'_>, &[MiniFloat; 4], &Observation, Probe),
) -> Result<()> {
    let p = r.p;
    let mut rng = rng_for(opts.seed, stream);
    let xs = x_his(p);
    let x_rules: Vec<_> = xs.iter().map(|&h| rule(h)).collect();
    let x_cands: Vec<_> =
        xs.iter().zip(&x_rules).map(|(&h, ru)| low_candidates(h, ru, opts.random_lows, &mut rng)).collect();
    let pairs = hi_pairs(p);
    let (stride, frac) = hi_stride(pairs.len(), opts.pairs_per_hi, opts.max_grid_cases);
    let mut y_cache: std::collections::HashMap<(bool, u64, i64), (Vec<MiniFloat>, f64)> = Default::default();
    let (mut done, mut full) = (0f64, 0f64);
    let offset = (rng.next_u64() as usize) % stride;
    for (i, &(xh, yh)) in pairs.iter().enumerate().skip(offset).step_by(stride) {
        let xi = xs.iter().position(|&v| v == xh).expect("x_h from the grid");
        let key = (yh.is_negative(), yh.significand(), yh.exponent_bits());
        let (cy, ny) = y_cache
            .entry(key)
            .or_insert_with(|| {
                let ru = rule(yh);
                let ystream = stream << 32 ^ yh.significand() << 12 ^ ((yh.exponent_bits() + 1024) as u64) << 1 ^ key.0 as u64;
                (low_candidates(yh, &ru, opts.random_lows, &mut rng_for(opts.seed, ystream)), admissible_count(yh, &ru))
            })
            .clone();
        let mut prng = rng_for(opts.seed ^ 0x9e37_79b9, stream.wrapping_mul(1 << 32) + i as u64);
        let lows = low_pairs(&x_cands[xi], &cy, opts.pairs_per_hi, &mut prng);
        full += admissible_count(xh, &x_rules[xi]) * ny;
        done += lows.len() as f64;
        for (xl, yl) in lows {
            let inputs = [xh, xl, yh, yl];
            for &pr in probes {
                if let Some(o) = r.run(pr, &inputs, &mut prng)? {
                    extra(r, &inputs, &o, pr);
                }
            }
        }
    }
    r.report.coverage = if full > 0.0 { (done / full).min(1.0) * frac } else { frac };
    r.report.stat_add("grid_high_pairs", (pairs.len() / stride) as f64);
    for i in 0..opts.random_cases {
        let mut crng = rng_for(opts.seed, (stream + 1) << 40 | i);
        let (xh, yh) = random_hi_pair(p, &mut crng);
        let xl = random_low(xh, &rule(xh), &mut crng);
        let yl = random_low(yh, &rule(yh), &mut crng);
        let inputs = [xh, xl, yh, yl];
        for &pr in probes {
            if let Some(o) = r.run(pr, &inputs, &mut crng)? {
                extra(r, &inputs, &o, pr);
            }
        }
    }
    r.report.stat_add("random_cases", opts.random_cases as f64);
    Ok(())
}

fn overlap_rule(spec: &RoundingSpec, p: u32, sign: Option<bool>) -> impl Fn(MiniFloat) -> LowRule {
    let u_exp = spec.unit_roundoff_exp(p);
    let limit = overlap_limit(u_exp);
    move |_| LowRule::Overlap { limit: limit.clone(), u_exp, sign }
}

fn no_expected(_: Probe) -> bool {
    false
}

fn merge_all(check: &str, p: u32, parts: Vec<SweepReport>) -> SweepReport {
    let mut out = SweepReport::new(check, p, "");
    out.coverage = 0.0;
    for r in parts {
        out.merge(r);
    }
    out
}

/// Fast2Sum exactness when `ufp(a) <= ufp(b)` and `uls(a) >= ulp(b)`:
/// `b = ±N` with `2^(p-1) <= N < 2^p`, `a = ±M` with `1 <= M < 2^p`, under
/// RN-even and all eight per-operation direction triples. The sharpness
/// pair `a = 2^-1 + 2^-p`, `b = 1 + 2^(1-p)` is evaluated as an expected
/// failure whose error must be of the order of `u`.
pub fn check_lemma2(p: u32) -> Result<SweepReport> {
    check_p(p, 4)?;
    let started = Stopwatch::now();
    let mut report = SweepReport::new("lemma2", p, "rn-even,faithful-triples");
    let mut specs = vec![RoundingSpec::nearest_even()];
    specs.extend((0..8).map(|m| RoundingSpec::faithful(Direction::sequence_from_bits(m, 3))));
    let bs: Vec<_> = (1u64 << (p - 1)..1u64 << p).flat_map(|n| [mf(p, false, n, 0), mf(p, true, n, 0)]).collect();
    let as_: Vec<_> = (1u64..1u64 << p).flat_map(|m| [mf(p, false, m, 0), mf(p, true, m, 0)]).collect();
    for spec in &specs {
        let mut e = SoftEngine::new(p, spec.clone())?;
        for &b in &bs {
            for &a in &as_ {
                e.reset();
                if let Some(d) = &spec.directions {
                    e.set_directions(d.clone());
                }
                let inputs = [a, b];
                let o = observe(&mut e, Probe::Fast2SumExact, &inputs)?;
                report.cases += 1;
                if !o.holds {
                    report.record_violation(record(Probe::Fast2SumExact, p, &e, &inputs, &o));
                }
            }
        }
    }
    // sharpness construction: uls(a) = ulp(b)/2
    let a = mf(p, false, (1 << (p - 1)) + 1, -i64::from(p));
    let b = mf(p, false, (1 << (p - 1)) + 1, 1 - i64::from(p));
    for mode in [RoundingMode::NearestEven, RoundingMode::Down, RoundingMode::Up] {
        let spec = RoundingSpec::new(mode);
        let mut e = SoftEngine::new(p, spec.clone())?;
        let o = observe(&mut e, Probe::Fast2SumExact, &[a, b])?;
        let u = 2f64.powi(-(p as i32));
        report.measurements.push(Measurement::new(format!("sharpness.{mode}.error_over_u"), o.observed / u, 0.125, 8.0));
        if !o.holds {
            report.record_expected_failure(record(Probe::Fast2SumExact, p, &e, &[a, b], &o));
        }
    }
    report.runtime = started.elapsed();
    Ok(report)
}

/// Sloppy addition with overlapping inputs: absolute error
/// `<= (2o+3)u²(|x_h|+|y_h|) + 64u³(|x_h|+|y_h|)` and a valid final Fast2Sum.
pub fn check_thm1(p: u32, opts: &SweepOptions) -> Result<SweepReport> {
    check_p(p, 6)?;
    let mut parts = Vec::new();
    for (i, pol) in opts.policies(&[Policy::RnEven, Policy::Rd, Policy::Ru, Policy::Faithful])?.into_iter().enumerate() {
        let mut r = Runner::new("thm1", p, pol, &no_expected)?;
        let rule = overlap_rule(&pol.spec(), p, None);
        sweep_pairs(&mut r, &rule, &[Probe::SloppyAbs, Probe::SloppyFast2Sum], opts, 10 + i as u64, |_, _, _, _| {})?;
        let mut rep = r.finish();
        rep.max_error_u2 = rep.stats.get("max_u2.sloppy-abs").copied().unwrap_or(0.0);
        parts.push(rep);
    }
    Ok(merge_all("thm1", p, parts))
}

/// Accurate addition with overlapping inputs: both Fast2Sums valid in
/// faithful rounding. Cases whose intermediate `t` exceeds the overlap
/// limit are outside the hypothesis and only counted.
pub fn check_thm2(p: u32, opts: &SweepOptions) -> Result<SweepReport> {
    check_p(p, 6)?;
    let mut parts = Vec::new();
    for (i, pol) in opts.policies(&[Policy::RnEven, Policy::Rd, Policy::Ru, Policy::Faithful])?.into_iter().enumerate() {
        let mut r = Runner::new("thm2", p, pol, &no_expected)?;
        let rule = overlap_rule(&pol.spec(), p, None);
        sweep_pairs(&mut r, &rule, &[Probe::AccurateFast2Sums], opts, 20 + i as u64, |_, _, _, _| {})?;
        let mut rep = r.finish();
        rep.max_error_u2 = rep.stats.get("max_u2.accurate-fast2sums").copied().unwrap_or(0.0);
        parts.push(rep);
    }
    Ok(merge_all("thm2", p, parts))
}

/// Sloppy addition on nonoverlapping inputs in round-to-nearest: relative
/// error `<= 3u² + 5u³` when `r(x_h, y_h) <= 1/2`, `<= u` otherwise unless
/// the high parts are consecutive, and `< 2` always.
pub fn check_thm3(p: u32, opts: &SweepOptions) -> Result<SweepReport> {
    check_p(p, 4)?;
    let mut parts = Vec::new();
    for (i, pol) in opts.policies(&[Policy::RnEven, Policy::RnAway])?.into_iter().enumerate() {
        let mode = pol.mode().expect("nearest policy");
        let mut r = Runner::new("thm3", p, pol, &no_expected)?;
        let u = r.u;
        let tight = 3.0 * u * u + 5.0 * u.powi(3);
        let rule = move |_| LowRule::Nonoverlapping(mode);
        let mut max_le_half: f64 = 0.0;
        let mut max_all: f64 = 0.0;
        sweep_pairs(&mut r, &rule, &[Probe::SloppyRel], opts, 30 + i as u64, |r, inp, o, _| {
            max_all = max_all.max(o.observed);
            if cancellation_at_most_half(inp[0], inp[2]) {
                max_le_half = max_le_half.max(o.observed);
            } else if o.observed > tight {
                r.report.stat_add("above_3u2.r_gt_half", 1.0);
            }
            if o.observed > u {
                match adjacency(inp[0], inp[2]) {
                    Some(Adjacency::SameExponent) => r.report.stat_add("above_u.adjacent_same_exponent", 1.0),
                    Some(Adjacency::BinadeBoundary) => r.report.stat_add("above_u.adjacent_binade_boundary", 1.0),
                    None => r.report.stat_add("above_u.not_adjacent", 1.0),
                }
            }
        })?;
        let mut rep = r.finish();
        rep.max_error_u2 = max_le_half / (u * u);
        rep.measurements.push(Measurement::new("max_rel_error_r_le_half_over_u2", max_le_half / (u * u), 0.0, 3.0 + 5.0 * u));
        rep.measurements.push(Measurement::new("max_rel_error", max_all, 0.0, 2.0f64.next_down()));
        parts.push(rep);
    }
    Ok(merge_all("thm3", p, parts))
}

/// Accurate addition relative error `<= (3o+15)u² + 64u³`: the plain
/// algorithm in round-to-nearest, the directed variant in RD/RU with low
/// parts of the sign matching the direction.
pub fn check_thm4(p: u32, direction: Option<RoundingMode>, opts: &SweepOptions) -> Result<SweepReport> {
    check_p(p, 6)?;
    let pols = match direction {
        Some(RoundingMode::NearestAway) => vec![Policy::RnAway],
        Some(m) => vec![Policy::from_str(m.name())?],
        None => opts.policies(&[Policy::RnEven, Policy::Rd, Policy::Ru])?,
    };
    let mut parts = Vec::new();
    for (i, pol) in pols.into_iter().enumerate() {
        let mut r = Runner::new("thm4", p, pol, &no_expected)?;
        let spec = pol.spec();
        let (probe, sign) = match pol {
            Policy::Rd => (Probe::AccurateDirectedRel, Some(true)),
            Policy::Ru => (Probe::AccurateDirectedRel, Some(false)),
            Policy::Faithful => return Err(Error::Usage("thm4 takes rn-even, rd or ru".into())),
            _ => (Probe::AccurateRel, None),
        };
        let rule = overlap_rule(&spec, p, sign);
        sweep_pairs(&mut r, &rule, &[probe], opts, 40 + i as u64, |_, _, _, _| {})?;
        let mut rep = r.finish();
        rep.max_error_u2 = rep.stats.get(&format!("max_u2.{}", probe_name(probe))).copied().unwrap_or(0.0);
        parts.push(rep);
    }
    Ok(merge_all("thm4", p, parts))
}

/// Products that drop `x_l·y_l` are not direction-consistent when the
/// dropped term has the wrong sign; they are reported as expected failures.
fn drops_ll(p: Probe) -> bool {
    matches!(
        p,
        Probe::Direction(DirectedOp::Mul { include_ll: false, .. }) | Probe::Direction(DirectedOp::Maa { include_ll: false, .. })
    )
}

/// Results in uniform RD lie below the exact value and in RU above, for
/// both additions, products and MAA; interval operations enclose the exact
/// corner values.
pub fn check_direction_consistency(p: u32, opts: &SweepOptions) -> Result<SweepReport> {
    check_p(p, 4)?;
    let adds = [
        Probe::Direction(DirectedOp::Sloppy),
        Probe::Direction(DirectedOp::Accurate),
        Probe::Direction(DirectedOp::AccurateDirected),
    ];
    let mut muls = Vec::new();
    for include_ll in [true, false] {
        for normalize in [true, false] {
            muls.push(Probe::Direction(DirectedOp::Mul { normalize, include_ll }));
        }
    }
    let mut maas = Vec::new();
    for include_ll in [true, false] {
        for add in [AddAlgorithm::Sloppy, AddAlgorithm::Accurate, AddAlgorithm::AccurateDirected] {
            for normalize_mul in [true, false] {
                maas.push(Probe::Direction(DirectedOp::Maa { add, normalize_mul, include_ll }));
            }
        }
    }
    let mut parts = Vec::new();
    for (i, pol) in opts.policies(&[Policy::Rd, Policy::Ru])?.into_iter().enumerate() {
        let spec = pol.spec();
        let mut r = Runner::new("direction", p, pol, &drops_ll)?;
        let stream = 50 + 4 * i as u64;
        sweep_pairs(&mut r, &overlap_rule(&spec, p, None), &adds, opts, stream, |_, _, _, _| {})?;
        let cov_add = r.report.coverage;
        let nonoverlap = |_| LowRule::Overlap { limit: Dyadic::one(), u_exp: spec.unit_roundoff_exp(p), sign: None };
        sweep_pairs(&mut r, &nonoverlap, &muls, opts, stream + 1, |_, _, _, _| {})?;
        let cov = cov_add.min(r.report.coverage);
        maa_sweep(&mut r, &maas, opts, stream + 2)?;
        if pol == Policy::Rd {
            enclosure_sweep(&mut r, opts, stream + 3)?;
        }
        let mut rep = r.finish();
        rep.coverage = cov;
        parts.push(rep);
    }
    Ok(merge_all("direction", p, parts))
}

/// A nonoverlapping double-word with a random high part of exponent offset
/// in the grid range.
fn random_dw(p: u32, rng: &mut impl RngCore) -> [MiniFloat; 2] {
    let k = rng.random_range(offsets(p));
    let h = mf(p, rng.random_bool(0.5), rng.random_range(1u64 << (p - 1)..1u64 << p), 1 - i64::from(p) + k);
    let rule = LowRule::Overlap { limit: Dyadic::one(), u_exp: -i64::from(p), sign: None };
    let l = random_low(h, &rule, rng);
    [h, l]
}

fn cases_budget(opts: &SweepOptions) -> u64 {
    (opts.max_grid_cases / 8).max(1000) + opts.random_cases
}

fn maa_sweep(r: &mut Runner<'_>, probes: &[Probe], opts: &SweepOptions, stream: u64) -> Result<()> {
    let p = r.p;
    for i in 0..cases_budget(opts) {
        let mut rng = rng_for(opts.seed, stream << 40 | i);
        let (a, b, c) = (random_dw(p, &mut rng), random_dw(p, &mut rng), random_dw(p, &mut rng));
        let inputs = [a[0], a[1], b[0], b[1], c[0], c[1]];
        for &pr in probes {
            r.run(pr, &inputs, &mut rng)?;
        }
    }
    Ok(())
}

/// Point intervals over the nonoverlapping grid plus random wide intervals.
fn enclosure_sweep(r: &mut Runner<'_>, opts: &SweepOptions, stream: u64) -> Result<()> {
    let p = r.p;
    let rule = LowRule::Overlap { limit: Dyadic::one(), u_exp: -i64::from(p), sign: None };
    let mut rng = rng_for(opts.seed, stream);
    let xs = x_his(p);
    let point = |d: [MiniFloat; 2]| [d[0], d[1], d[0], d[1]];
    let ops = [Probe::Enclosure(IntervalOp::Add), Probe::Enclosure(IntervalOp::Mul)];
    let budget = (opts.max_grid_cases / 16).max(1000);
    let per = (budget / (xs.len() as u64 * offsets(p).count() as u64)).max(1);
    for &xh in &xs {
        for k in offsets(p) {
            let ys = y_his(p, k);
            for _ in 0..per {
                let yh = ys[rng.random_range(0..ys.len())];
                let x = [xh, random_low(xh, &rule, &mut rng)];
                let y = [yh, random_low(yh, &rule, &mut rng)];
                let inputs: Vec<MiniFloat> = point(x).into_iter().chain(point(y)).collect();
                for &op in &ops {
                    r.run(op, &inputs, &mut rng)?;
                }
            }
        }
    }
    for i in 0..cases_budget(opts) / 4 {
        let mut rng = rng_for(opts.seed, stream << 40 | i);
        let mut iv = || {
            let (mut a, mut b) = (random_dw(p, &mut rng), random_dw(p, &mut rng));
            if rng.random_bool(0.25) {
                b = a;
            }
            if a[0].to_dyadic() + a[1].to_dyadic() > b[0].to_dyadic() + b[1].to_dyadic() {
                std::mem::swap(&mut a, &mut b);
            }
            [a[0], a[1], b[0], b[1]]
        };
        let (x, y, c) = (iv(), iv(), iv());
        let two: Vec<MiniFloat> = x.into_iter().chain(y).collect();
        let three: Vec<MiniFloat> = two.iter().copied().chain(c).collect();
        let mut rng2 = rng_for(opts.seed, stream << 40 | i | 1 << 39);
        for &op in &ops {
            r.run(op, &two, &mut rng2)?;
        }
        r.run(Probe::Enclosure(IntervalOp::Maa), &three, &mut rng2)?;
    }
    Ok(())
}

/// Overlap factor of unnormalized products `<= 3 + 16u`: every pair of
/// high parts in `[1, 2)` with the low-part candidate grid at precision `p`
/// (round-to-nearest), then `native_cases` random binary64 products.
pub fn check_product_overlap(p: u32, native_cases: u64, opts: &SweepOptions) -> Result<SweepReport> {
    check_p(p, 4)?;
    let started = Stopwatch::now();
    let mut r = Runner::new("product-overlap", p, Policy::RnEven, &no_expected)?;
    let rule = LowRule::Nonoverlapping(RoundingMode::NearestEven);
    let mut rng = rng_for(opts.seed, 60);
    let xs = x_his(p);
    let cands: Vec<_> = xs.iter().map(|&h| low_candidates(h, &rule, opts.random_lows, &mut rng)).collect();
    let probes = [Probe::ProductOverlap { include_ll: false }, Probe::ProductOverlap { include_ll: true }];
    let mut grid_max = [0f64; 2];
    for (i, &xh) in xs.iter().enumerate() {
        for (j, &yh) in xs.iter().enumerate() {
            for &xl in &cands[i] {
                for &yl in &cands[j] {
                    for (k, &pr) in probes.iter().enumerate() {
                        if let Some(o) = r.run(pr, &[xh, xl, yh, yl], &mut rng)? {
                            grid_max[k] = grid_max[k].max(o.observed);
                        }
                    }
                }
            }
        }
    }
    let mut rep = r.finish();
    let u = 2f64.powi(-(p as i32));
    rep.measurements.push(Measurement::new("grid_max_overlap", grid_max[0], 0.0, 3.0 + 16.0 * u));
    rep.measurements.push(Measurement::new("grid_max_overlap_with_ll", grid_max[1], 0.0, 3.0 + 16.0 * u));
    rep.stats.retain(|k, _| !k.starts_with("max_u2."));
    let native = native_product_overlap(native_cases, opts.seed);
    let u53 = 2f64.powi(-53);
    rep.measurements.push(Measurement::new("binary64_max_overlap", native.max, 0.0, 3.0 + 16.0 * u53));
    rep.stats.insert("binary64_cases".into(), native_cases as f64);
    rep.cases += native_cases;
    rep.violation_count += native.count - native.violations.len() as u64;
    for v in native.violations {
        rep.record_violation(v);
    }
    rep.max_error_u2 = 0.0;
    rep.runtime = started.elapsed();
    Ok(rep)
}

/// Exactness of the error-free transformations in round-to-nearest: every
/// pair of precision-`p` values over a window of `p + 6` binades (both
/// signs, zero included), then `native_cases` random binary64 pairs checked
/// against the dyadic oracle.
pub fn check_eft_exactness(p: u32, native_cases: u64, opts: &SweepOptions) -> Result<SweepReport> {
    check_p(p, 4)?;
    let started = Stopwatch::now();
    let mut r = Runner::new("eft-exactness", p, Policy::RnEven, &no_expected)?;
    let mut rng = rng_for(opts.seed, 80);
    let vals: Vec<_> = crate::fp::enumerate(p, -i64::from(p) - 3, 2).collect();
    for &a in &vals {
        for &b in &vals {
            for op in EftOp::ALL {
                r.run(Probe::EftExact { op }, &[a, b], &mut rng)?;
            }
        }
    }
    let mut rep = r.finish();
    rep.coverage = 1.0;
    let native = native_eft_exactness(native_cases, opts.seed);
    rep.stats.insert("binary64_cases".into(), native_cases as f64);
    rep.cases += native_cases;
    rep.violation_count += native.count - native.violations.len() as u64;
    for v in native.violations {
        rep.record_violation(v);
    }
    rep.runtime = started.elapsed();
    Ok(rep)
}

/// Random binary64 pairs: mixed exponent gaps, near-cancellation and
/// products that stay clear of underflow and overflow.
fn native_eft_exactness(n: u64, seed: u64) -> NativeTally {
    use crate::eft::{fast2sum, two_prod, two_prod_split, two_sum, two_sum_magsel};
    use crate::fp::{Float, Native};
    let mut rng = rng_for(seed, 81);
    let mut out = NativeTally { max: 0.0, count: 0, violations: Vec::new() };
    let d = |x: f64| Dyadic::from_f64(x).expect("finite");
    for _ in 0..n {
        let m: f64 = rng.random_range(1.0..2.0);
        let a = m * 2f64.powi(rng.random_range(-300..300)) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let b = match rng.random_range(0..4) {
            // neighbour of -a
            0 => {
                let mut b = -a;
                for _ in 0..rng.random_range(0..4) {
                    b = b.next_up();
                }
                b
            }
            _ => {
                let m: f64 = rng.random_range(1.0..2.0);
                let s = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                s * m * a.abs() * 2f64.powi(rng.random_range(-70..70))
            }
        };
        let (da, db) = (d(a), d(b));
        let (sum, prod) = (&da + &db, &da * &db);
        let mut nat = Native;
        let (big, small) = if a.abs() >= b.abs() { (a, b) } else { (b, a) };
        let results = [
            (EftOp::Fast2Sum, fast2sum(&mut nat, big, small), &sum),
            (EftOp::TwoSum, two_sum(&mut nat, a, b), &sum),
            (EftOp::TwoSumMagsel, two_sum_magsel(&mut nat, a, b), &sum),
            (EftOp::TwoProd, two_prod(&mut nat, a, b), &prod),
            (EftOp::TwoProdSplit, two_prod_split(&mut nat, a, b), &prod),
        ];
        for (op, res, exact) in results {
            if &(d(res.s) + d(res.t)) == exact {
                continue;
            }
            out.count += 1;
            if out.violations.len() < super::MAX_KEPT {
                let inputs = if op == EftOp::Fast2Sum { [big, small] } else { [a, b] };
                out.violations.push(super::Violation {
                    probe: Probe::EftExact { op },
                    p: 53,
                    rounding: "rn-even".into(),
                    inputs: inputs.iter().map(|v| v.to_hex()).collect(),
                    observed: f64::INFINITY,
                    bound: 0.0,
                });
            }
        }
    }
    out
}

struct NativeTally {
    max: f64,
    count: u64,
    violations: Vec<super::Violation>,
}

/// Random nonoverlapping binary64 double-words with high parts over a
/// moderate exponent range; the bound is decided exactly when close.
fn native_product_overlap(n: u64, seed: u64) -> NativeTally {
    use crate::dw::{dw_mul, overlap_factor, DoubleWord};
    use crate::fp::Native;
    let bound = 3.0 + 16.0 * 2f64.powi(-53);
    let u = 2f64.powi(-53);
    let mut rng = rng_for(seed, 61);
    let mut out = NativeTally { max: 0.0, count: 0, violations: Vec::new() };
    let gen = |rng: &mut rand_chacha::ChaCha8Rng| {
        let m: f64 = rng.random_range(1.0..2.0);
        let h = m * 2f64.powi(rng.random_range(-40..40)) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let f: f64 = rng.random_range(-1.0..1.0);
        let ulp = h.abs().next_up() - h.abs();
        let l = if rng.random_range(0..16) == 0 { 0.0 } else { f * ulp * 0.5 };
        DoubleWord::new(h, l)
    };
    for _ in 0..n {
        let (x, y) = (gen(&mut rng), gen(&mut rng));
        let z = dw_mul(&mut Native, x, y, false, false);
        let quick = (z.lo / z.hi).abs() / u;
        let o = if quick > 2.9 { overlap_factor(&z, u) } else { quick };
        if o > out.max {
            out.max = o;
        }
        if o > bound {
            out.count += 1;
        }
        if o > bound && out.violations.len() < super::MAX_KEPT {
            out.violations.push(super::Violation {
                probe: Probe::ProductOverlap { include_ll: false },
                p: 53,
                rounding: "rn-even".into(),
                inputs: [x.hi, x.lo, y.hi, y.lo].iter().map(|v| crate::fp::Float::to_hex(*v)).collect(),
                observed: o,
                bound,
            });
        }
    }
    out
}
