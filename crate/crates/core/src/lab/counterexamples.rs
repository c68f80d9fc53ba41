//! Registered inputs with known, quoted error values.


use super::{rel_error, Measurement, Stopwatch, SweepReport};
use crate::dw::{accurate_add, accurate_add_directed_checked, sloppy_add, DoubleWord};
use crate::eft::TwoSumImpl;
use crate::error::Result;
use crate::fp::{MiniFloat, Native, RoundingMode, SoftEngine};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CounterexampleKind {
    /// Sloppy addition in binary64 RN-even near its `3u²` bound.
    SloppyTight,
    /// Accurate addition in binary64 RD, plain and directed variant.
    AccurateRd,
}

#[derive(Copy, Clone, Debug)]
pub struct Counterexample {
    pub id: &'static str,
    pub kind: CounterexampleKind,
    /// `[x_h, x_l, y_h, y_l]`.
    pub inputs: [f64; 4],
}

const fn scaled(m: f64, e: i32) -> f64 {
    // 2^e for |e| < 1023, built from the exponent field
    m * f64::from_bits(((1023 + e) as u64) << 52)
}

pub const REGISTRY: [Counterexample; 3] = [
    Counterexample {
        id: "sloppy-tight-1",
        kind: CounterexampleKind::SloppyTight,
        inputs: [
            scaled(844424930131969.0, -49),
            scaled(1.0, -53),
            scaled(-4503599627370499.0, -53),
            scaled(4714705859903487.0, -152),
        ],
    },
    Counterexample {
        id: "sloppy-tight-2",
        kind: CounterexampleKind::SloppyTight,
        inputs: [
            scaled(6755399441055745.0, -52),
            scaled(140737488355327.0, -100),
            scaled(-4503599627370489.0, -53),
            scaled(4714705859903487.0, -152),
        ],
    },
    Counterexample {
        id: "accurate-rd",
        kind: CounterexampleKind::AccurateRd,
        inputs: [scaled(1.0, 52), 1.0 - scaled(1.0, -53), -(scaled(1.0, 52) + 1.0), scaled(1.0, -107)],
    },
];

/// Evaluates every registry entry; each contributes one or two measurements.
pub fn run_counterexamples() -> Result<SweepReport> {
    let started = Stopwatch::now();
    let mut rep = SweepReport::new("counterexamples", 53, "rn-even,rd");
    let u = 2f64.powi(-53);
    for c in &REGISTRY {
        let [xh, xl, yh, yl] = c.inputs;
        match c.kind {
            CounterexampleKind::SloppyTight => {
                let (x, y) = (DoubleWord::new(xh, xl), DoubleWord::new(yh, yl));
                let z = sloppy_add(&mut Native, x, y, TwoSumImpl::Standard);
                let err = rel_error(&z, &(x.value() + y.value())) / (u * u);
                rep.measurements.push(Measurement::new(format!("{}.rel_error_over_u2", c.id), err, 2.9999999999999, 3.0));
            }
            CounterexampleKind::AccurateRd => {
                let mut e = SoftEngine::with_mode(53, RoundingMode::Down)?;
                let v = |x: f64| MiniFloat::from_f64(53, x);
                let x = DoubleWord::new(v(xh)?, v(xl)?);
                let y = DoubleWord::new(v(yh)?, v(yl)?);
                let exact = x.value() + y.value();
                let bad = accurate_add(&mut e, x, y, TwoSumImpl::Standard);
                e.check()?;
                let good = accurate_add_directed_checked(&mut e, x, y, TwoSumImpl::Standard)?;
                let ud = 2f64.powi(-52);
                rep.measurements.push(Measurement::new(
                    format!("{}.plain.rel_error", c.id),
                    rel_error(&bad, &exact),
                    2f64.powi(-55),
                    1.0,
                ));
                rep.measurements.push(Measurement::new(
                    format!("{}.directed.rel_error_over_u2", c.id),
                    rel_error(&good, &exact) / (ud * ud),
                    0.0,
                    18.0,
                ));
            }
        }
        rep.cases += 1;
    }
    rep.max_error_u2 = rep
        .measurements
        .iter()
        .filter(|m| m.name.ends_with("over_u2") && m.name.starts_with("sloppy"))
        .map(|m| m.value)
        .fold(0.0, f64::max);
    rep.runtime = started.elapsed();
    Ok(rep)
}
