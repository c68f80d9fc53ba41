use std::fmt::Write as _;

use serde_json::json;

use crate::output::{to_value, Outcome};
use crate::{BenchArgs, ErrstatsArgs, Theorem, VerifyArgs};
use dwarith::bench::{self, BenchResult};
use dwarith::dw::{AddAlgorithm, VariantConfig};
use dwarith::eft::TwoSumImpl;
use dwarith::lab::{self, LowGenerator, Policy, SweepOptions, SweepReport};
use dwarith::Result;

fn sweep_options(a: &VerifyArgs) -> Result<SweepOptions> {
    let mut o = if a.quick { SweepOptions::quick() } else { SweepOptions::default() };
    if let Some(v) = a.max_grid {
        o.max_grid_cases = v;
    }
    if let Some(v) = a.pairs_per_hi {
        o.pairs_per_hi = v.max(1);
    }
    if let Some(v) = a.random_lows {
        o.random_lows = v;
    }
    if let Some(v) = a.random_cases {
        o.random_cases = v;
    }
    o.seed = a.seed;
    o.policy = a.mode.as_deref().map(str::parse::<Policy>).transpose()?;
    Ok(o)
}

fn run_check(t: Theorem, a: &VerifyArgs, o: &SweepOptions) -> Result<SweepReport> {
    let native = |full: u64| a.native_cases.unwrap_or(if a.quick { 100_000 } else { full });
    match t {
        Theorem::Lemma2 => lab::check_lemma2(a.p),
        Theorem::Thm1 => lab::check_thm1(a.p, o),
        Theorem::Thm2 => lab::check_thm2(a.p, o),
        Theorem::Thm3 => lab::check_thm3(a.p, o),
        Theorem::Thm4 => lab::check_thm4(a.p, None, o),
        Theorem::Direction => lab::check_direction_consistency(a.p, o),
        Theorem::ProductOverlap => lab::check_product_overlap(a.p, native(10_000_000), o),
        Theorem::Eft => lab::check_eft_exactness(a.p, native(1_000_000), o),
        Theorem::All => unreachable!("expanded by the caller"),
    }
}

fn report_text(r: &SweepReport, out: &mut String) {
    let _ = writeln!(
        out,
        "{} p={} policy={} cases={} coverage={:.4} violations={} expected_failures={} max_error={:.4}u^2 time={:.2?}",
        r.check, r.p, r.policy, r.cases, r.coverage, r.violation_count, r.expected_failure_count, r.max_error_u2, r.runtime
    );
    for m in &r.measurements {
        let _ = writeln!(
            out,
            "  {} = {} in [{}, {}]: {}",
            m.name,
            num(m.value),
            num(m.min),
            num(m.max),
            if m.pass { "ok" } else { "OUT OF RANGE" }
        );
    }
    for v in r.violations.iter().take(5) {
        let _ = writeln!(out, "  violation {:?} {} [{}] observed={} bound={}", v.probe, v.rounding, v.inputs.join(" "), v.observed, v.bound);
    }
    for n in &r.notes {
        let _ = writeln!(out, "  note: {n}");
    }
}

fn num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e6) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn report_row(r: &SweepReport) -> Vec<String> {
    vec![
        r.check.clone(),
        r.p.to_string(),
        r.policy.clone(),
        r.cases.to_string(),
        r.coverage.to_string(),
        r.violation_count.to_string(),
        r.expected_failure_count.to_string(),
        r.max_error_u2.to_string(),
        r.passed().to_string(),
    ]
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let o = sweep_options(a)?;
    let theorems = match a.theorem {
        Theorem::All => vec![
            Theorem::Lemma2,
            Theorem::Thm1,
            Theorem::Thm2,
            Theorem::Thm3,
            Theorem::Thm4,
            Theorem::Direction,
            Theorem::ProductOverlap,
            Theorem::Eft,
        ],
        t => vec![t],
    };
    let reports = theorems.into_iter().map(|t| run_check(t, a, &o)).collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for r in &reports {
        report_text(r, &mut text);
    }
    Ok(Outcome {
        command: "verify",
        seed: Some(a.seed),
        config: json!({ "args": to_value(a)?, "sweep": to_value(&o)? }),
        passed: reports.iter().all(SweepReport::passed),
        results: to_value(&reports)?,
        header: vec!["check", "p", "policy", "cases", "coverage", "violations", "expected_failures", "max_error_u2", "passed"],
        rows: reports.iter().map(report_row).collect(),
        text,
    })
}

pub fn errstats(a: &ErrstatsArgs) -> Result<Outcome> {
    let rows = match (&a.variant, a.row.as_str()) {
        (Some(v), _) => vec![v.parse::<VariantConfig>()?],
        (None, "all") => VariantConfig::table2_rows(),
        (None, r) => vec![VariantConfig::from_table2_label(r)?],
    };
    let gens = match a.generator.as_str() {
        "both" => vec![LowGenerator::Uniform, LowGenerator::Zero],
        g => vec![LowGenerator::parse(g)?],
    };
    let mut stats = Vec::new();
    for g in gens {
        stats.extend(lab::run_errstats_rows(a.n, a.trials, &rows, a.seed, g)?);
    }
    let mut text = format!("n={} trials={}\n", a.n, a.trials);
    let _ = writeln!(text, "{:<8} {:<8} {:>10} {:>10} {:>10}", "row", "lows", "average", "std", "max");
    for s in &stats {
        let _ = writeln!(
            text,
            "{:<8} {:<8} {:>10.3e} {:>10.3e} {:>10.3e}",
            s.label,
            s.generator.name(),
            s.aggregate.average,
            s.aggregate.std,
            s.aggregate.max
        );
    }
    Ok(Outcome {
        command: "errstats",
        seed: Some(a.seed),
        config: to_value(a)?,
        passed: true,
        results: to_value(&stats)?,
        header: vec!["row", "generator", "n", "trials", "seed", "average", "std", "max"],
        rows: stats
            .iter()
            .map(|s| {
                vec![
                    s.label.clone(),
                    s.generator.name().into(),
                    s.n.to_string(),
                    s.trials.to_string(),
                    s.seed.to_string(),
                    format!("{:e}", s.aggregate.average),
                    format!("{:e}", s.aggregate.std),
                    format!("{:e}", s.aggregate.max),
                ]
            })
            .collect(),
        text,
    })
}

pub fn counterexample() -> Result<Outcome> {
    let rep = lab::run_counterexamples()?;
    let registry: Vec<_> = lab::REGISTRY
        .iter()
        .map(|c| {
            json!({
                "id": c.id,
                "kind": format!("{:?}", c.kind),
                "inputs": c.inputs.iter().map(|&v| dwarith::fp::Float::to_hex(v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut text = String::new();
    for c in &lab::REGISTRY {
        let h: Vec<String> = c.inputs.iter().map(|&v| dwarith::fp::Float::to_hex(v)).collect();
        let _ = writeln!(text, "{}: x = ({}, {}), y = ({}, {})", c.id, h[0], h[1], h[2], h[3]);
    }
    report_text(&rep, &mut text);
    Ok(Outcome {
        command: "counterexample",
        seed: None,
        config: json!({}),
        passed: rep.passed(),
        results: json!({ "registry": registry, "report": to_value(&rep)? }),
        header: vec!["measurement", "value", "min", "max", "pass"],
        rows: rep
            .measurements
            .iter()
            .map(|m| vec![m.name.clone(), m.value.to_string(), m.min.to_string(), m.max.to_string(), m.pass.to_string()])
            .collect(),
        text,
    })
}

fn is_fastest(c: &VariantConfig) -> bool {
    c.add_algo == AddAlgorithm::Sloppy && !c.normalize_mul && c.normalize_add && c.two_sum_impl == TwoSumImpl::Standard
}

pub fn bench(a: &BenchArgs) -> Result<Outcome> {
    let table = bench::table1();
    let mut timings: Vec<BenchResult> = Vec::new();
    if !a.count_only {
        let reps = bench::reps_from_env(a.reps.unwrap_or(if a.smoke { 3 } else { bench::DEFAULT_REPS }))?;
        let variants = match &a.variant {
            Some(v) => vec![v.parse::<VariantConfig>()?],
            None => VariantConfig::table1_rows(),
        };
        for v in &variants {
            timings.push(bench::gemm_dw(v, a.m, a.n, a.k, reps, a.seed)?);
        }
    }
    let speedup = {
        let base = timings.iter().find(|r| r.variant == VariantConfig::default());
        let fast = timings.iter().find(|r| is_fastest(&r.variant));
        base.zip(fast).map(|(b, f)| f.gflops / b.gflops)
    };
    let mut text = String::new();
    let _ = writeln!(text, "{:<23} {:<16} {:>4} {:>4} {:>4}", "omit add/mul, sloppy", "two-sum", "#cmp", "#add", "#mul");
    let mut rows = Vec::new();
    for r in &table {
        let timing = r.variant.and_then(|v| timings.iter().find(|t| t.variant == v));
        let _ = write!(
            text,
            "{:<23} {:<16} {:>4} {:>4} {:>4}",
            r.label,
            r.two_sum.name(),
            r.ops.comparisons,
            r.ops.additions,
            r.ops.multiplications
        );
        if let Some(t) = timing {
            let _ = write!(text, "  {:.3} GFLOPS ({:.1} double)", t.gflops, t.gflops_double);
        }
        text.push('\n');
        rows.push(vec![
            r.label.clone(),
            r.two_sum.name().into(),
            r.ops.comparisons.to_string(),
            r.ops.additions.to_string(),
            r.ops.multiplications.to_string(),
            timing.map(|t| t.gflops.to_string()).unwrap_or_default(),
            timing.map(|t| t.gflops_double.to_string()).unwrap_or_default(),
        ]);
    }
    if let Some(s) = speedup {
        let _ = writeln!(text, "sloppy + skipped mul normalization vs accurate + full normalization: {s:.2}x");
    }
    if !timings.is_empty() {
        let _ = writeln!(text, "{}x{}x{}, best of {} reps", a.m, a.n, a.k, timings[0].reps);
    }
    Ok(Outcome {
        command: "bench",
        seed: Some(a.seed),
        config: to_value(a)?,
        passed: true,
        results: json!({ "table1": to_value(&table)?, "gemm": to_value(&timings)?, "speedup": speedup }),
        header: vec!["label", "two_sum", "comparisons", "additions", "multiplications", "gflops", "gflops_double"],
        rows,
        text,
    })
}
