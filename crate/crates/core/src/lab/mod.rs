//! Verification laboratory: exhaustive and sampled sweeps against the exact
//! oracle, the counterexample registry, and error statistics.

mod cases;
mod checks;
mod counterexamples;
mod distribution;
mod errstats;
mod probe;

pub(crate) use cases::rng_for;
pub use checks::{
    check_direction_consistency, check_eft_exactness, check_lemma2, check_product_overlap, check_thm1, check_thm2, check_thm3, check_thm4,
    Policy, SweepOptions,
};
pub use counterexamples::{run_counterexamples, Counterexample, CounterexampleKind, REGISTRY};
pub use distribution::{empirical_distribution, DistributionCase, DistributionRow};
pub use errstats::{run_errstats, run_errstats_rows, Aggregate, ErrorStats, LowGenerator, ORACLE_CHECKS};
pub use probe::{adjacency, evaluate, nonoverlapping, replay, Adjacency, DirectedOp, EftOp, IntervalOp, Observation, Probe, SLACK};

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dw::DoubleWord;
use crate::fp::{Dyadic, Float};

/// Wall-clock timer that reads zero on targets without a clock.
#[derive(Copy, Clone, Debug)]
pub(crate) struct Stopwatch {
    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn now() -> Stopwatch {
        Stopwatch {
            #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.start.elapsed();
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        Duration::ZERO
    }
}

/// Number of violations kept verbatim in a report; the count is always exact.
pub const MAX_KEPT: usize = 64;

/// One failing (or expected-failing) case, replayable with [`replay`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub probe: Probe,
    pub p: u32,
    /// Rounding used, as accepted by `RoundingSpec::from_str`.
    pub rounding: String,
    /// Hex-float inputs in the probe's layout.
    pub inputs: Vec<String>,
    pub observed: f64,
    pub bound: f64,
}

/// A named measurement with the range it is expected to fall in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub min: f64,
    pub max: f64,
    pub pass: bool,
}

impl Measurement {
    pub fn new(name: impl Into<String>, value: f64, min: f64, max: f64) -> Measurement {
        Measurement { name: name.into(), value, min, max, pass: (min..=max).contains(&value) }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub check: String,
    pub p: u32,
    pub policy: String,
    pub cases: u64,
    /// Fraction of the enumerated case space that was evaluated.
    pub coverage: f64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
    /// Largest primary error observed, in units of `u²`.
    pub max_error_u2: f64,
    pub expected_failure_count: u64,
    pub expected_failures: Vec<Violation>,
    pub measurements: Vec<Measurement>,
    pub stats: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl SweepReport {
    pub fn new(check: &str, p: u32, policy: impl Into<String>) -> SweepReport {
        SweepReport { check: check.to_string(), p, policy: policy.into(), coverage: 1.0, ..SweepReport::default() }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0 && self.measurements.iter().all(|m| m.pass)
    }

    pub fn record_violation(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < MAX_KEPT {
            self.violations.push(v);
        }
    }

    pub fn record_expected_failure(&mut self, v: Violation) {
        self.expected_failure_count += 1;
        if self.expected_failures.len() < MAX_KEPT {
            self.expected_failures.push(v);
        }
    }

    pub fn stat_max(&mut self, key: &str, v: f64) {
        let e = self.stats.entry(key.to_string()).or_insert(v);
        if v > *e {
            *e = v;
        }
    }

    pub fn stat_add(&mut self, key: &str, v: f64) {
        *self.stats.entry(key.to_string()).or_insert(0.0) += v;
    }

    /// Folds `other` into `self` (same check and precision).
    pub fn merge(&mut self, other: SweepReport) {
        let total = self.cases + other.cases;
        if total > 0 {
            self.coverage = (self.coverage * self.cases as f64 + other.coverage * other.cases as f64) / total as f64;
        }
        self.cases = total;
        self.violation_count += other.violation_count;
        for v in other.violations {
            if self.violations.len() < MAX_KEPT {
                self.violations.push(v);
            }
        }
        self.expected_failure_count += other.expected_failure_count;
        for v in other.expected_failures {
            if self.expected_failures.len() < MAX_KEPT {
                self.expected_failures.push(v);
            }
        }
        self.max_error_u2 = self.max_error_u2.max(other.max_error_u2);
        self.measurements.extend(other.measurements);
        for (k, v) in other.stats {
            self.stats.insert(format!("{}.{k}", other.policy), v);
        }
        self.notes.extend(other.notes);
        self.runtime += other.runtime;
        if !self.policy.split(',').any(|p| p == other.policy) {
            self.policy = if self.policy.is_empty() { other.policy } else { format!("{},{}", self.policy, other.policy) };
        }
    }
}

/// `|value(d) - exact| / scale`, rounded upward. Infinite when `scale = 0`
/// and the numerator is not.
pub fn modified_rel_error<S: Float>(d: &DoubleWord<S>, exact: &Dyadic, scale: &Dyadic) -> f64 {
    (d.value() - exact).abs().ratio_up(&scale.abs())
}

/// Ordinary relative error `|value(d) - exact| / |exact|`.
pub fn rel_error<S: Float>(d: &DoubleWord<S>, exact: &Dyadic) -> f64 {
    modified_rel_error(d, exact, exact)
}
