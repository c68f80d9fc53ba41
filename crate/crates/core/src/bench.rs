//! Operation counting, a cache-resident double-word GEMM and the
//! compensated dot product it is compared with.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dw::{maa, AddAlgorithm, DoubleWord, VariantConfig};
use crate::eft::{two_prod, two_sum_with, ScalarPair, TwoSumImpl};
use crate::error::{Error, Result};
use crate::fp::{Arith, Float, Native};

/// Scalar operations of one MAA (or one dot-product element). An FMA is one
/// addition plus one multiplication; a magnitude select is a max and a min,
/// two comparisons.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub comparisons: u64,
    pub additions: u64,
    pub multiplications: u64,
}

impl OpCount {
    /// Additions and comparisons, the weight used for the equivalent
    /// double-precision rate.
    pub fn weight(&self) -> u64 {
        self.additions + self.comparisons
    }
}

/// Backend that forwards to `A` and tallies every scalar operation.
#[derive(Clone, Debug, Default)]
pub struct Counting<A> {
    pub inner: A,
    pub ops: OpCount,
}

impl<A: Arith> Arith for Counting<A> {
    type Scalar = A::Scalar;

    fn add(&mut self, a: A::Scalar, b: A::Scalar) -> A::Scalar {
        self.ops.additions += 1;
        self.inner.add(a, b)
    }
    fn sub(&mut self, a: A::Scalar, b: A::Scalar) -> A::Scalar {
        self.ops.additions += 1;
        self.inner.sub(a, b)
    }
    fn mul(&mut self, a: A::Scalar, b: A::Scalar) -> A::Scalar {
        self.ops.multiplications += 1;
        self.inner.mul(a, b)
    }
    fn fma(&mut self, a: A::Scalar, b: A::Scalar, c: A::Scalar) -> A::Scalar {
        self.ops.additions += 1;
        self.ops.multiplications += 1;
        self.inner.fma(a, b, c)
    }
    fn mag_select(&mut self, a: A::Scalar, b: A::Scalar) -> (A::Scalar, A::Scalar) {
        self.ops.comparisons += 2;
        self.inner.mag_select(a, b)
    }
    fn split_constant(&self) -> A::Scalar {
        self.inner.split_constant()
    }
    fn precision(&self) -> u32 {
        self.inner.precision()
    }
    fn unit_roundoff(&self) -> f64 {
        self.inner.unit_roundoff()
    }
}

/// Operations of one MAA under `cfg`.
pub fn count_ops(cfg: &VariantConfig) -> OpCount {
    let mut c = Counting { inner: Native, ops: OpCount::default() };
    let x = DoubleWord::new(0.75, 2f64.powi(-56));
    let y = DoubleWord::new(-0.3, 0.3 * 2f64.powi(-55));
    let z = DoubleWord::new(0.125, -2f64.powi(-60));
    maa(&mut c, x, y, z, cfg);
    c.ops
}

/// Operations per element of the compensated dot product.
pub fn count_dot2_ops(two_sum: TwoSumImpl) -> OpCount {
    let mut c = Counting { inner: Native, ops: OpCount::default() };
    dot2_with(&mut c, two_sum, &[0.7], &[1.3]).expect("equal lengths");
    c.ops
}

/// Compensated dot product: each product is split by 2Prod, accumulated by
/// 2Sum, and both error terms are summed separately. Returns `(sum, error)`.
pub fn dot2_compensated(a: &[f64], b: &[f64]) -> Result<ScalarPair<f64>> {
    dot2_with(&mut Native, TwoSumImpl::Standard, a, b)
}

pub fn dot2_with<A: Arith>(ar: &mut A, two_sum: TwoSumImpl, a: &[A::Scalar], b: &[A::Scalar]) -> Result<ScalarPair<A::Scalar>> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!("dot product of lengths {} and {}", a.len(), b.len())));
    }
    let Some(first) = a.first() else {
        return Err(Error::Usage("dot product of empty vectors".into()));
    };
    let mut s = first.zero_like();
    let mut err = first.zero_like();
    for (&x, &y) in a.iter().zip(b) {
        let p = two_prod(ar, x, y);
        let q = two_sum_with(ar, two_sum, s, p.s);
        s = q.s;
        let e = ar.add(p.t, q.t);
        err = ar.add(err, e);
    }
    Ok(ScalarPair::new(s, err))
}

/// One row of the GEMM operation-count table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub label: String,
    /// `None` for the compensated dot-product rows.
    pub variant: Option<VariantConfig>,
    pub two_sum: TwoSumImpl,
    pub ops: OpCount,
}

/// The twelve variant rows followed by the two compensated rows.
pub fn table1() -> Vec<Table1Row> {
    let mut rows: Vec<Table1Row> = VariantConfig::table1_rows()
        .into_iter()
        .map(|c| Table1Row {
            label: format!(
                "{} {} {}",
                yes_no(!c.normalize_add),
                yes_no(!c.normalize_mul),
                yes_no(c.add_algo == AddAlgorithm::Sloppy)
            ),
            variant: Some(c),
            two_sum: c.two_sum_impl,
            ops: count_ops(&c),
        })
        .collect();
    for ts in [TwoSumImpl::Standard, TwoSumImpl::MagnitudeSelect] {
        rows.push(Table1Row { label: "compensated dot product".into(), variant: None, two_sum: ts, ops: count_dot2_ops(ts) });
    }
    rows
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Row-major matrix of double-words stored as separate high and low arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct DwMatrix {
    pub rows: usize,
    pub cols: usize,
    pub hi: Vec<f64>,
    pub lo: Vec<f64>,
}

impl DwMatrix {
    pub fn zeros(rows: usize, cols: usize) -> DwMatrix {
        DwMatrix { rows, cols, hi: vec![0.0; rows * cols], lo: vec![0.0; rows * cols] }
    }

    /// Entries with high parts uniform in `[-1/2, 1/2)` and nonoverlapping
    /// low parts.
    pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> DwMatrix {
        let mut m = DwMatrix::zeros(rows, cols);
        for i in 0..rows * cols {
            let h: f64 = rng.random_range(-0.5..0.5);
            let l = rng.random_range(-0.5..0.5) * (h.abs().next_up() - h.abs());
            m.hi[i] = h;
            m.lo[i] = if h + l == h { l } else { 0.0 };
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> DoubleWord<f64> {
        DoubleWord::new(self.hi[i * self.cols + j], self.lo[i * self.cols + j])
    }

    fn bits(&self) -> (Vec<u64>, Vec<u64>) {
        (self.hi.iter().map(|v| v.to_bits()).collect(), self.lo.iter().map(|v| v.to_bits()).collect())
    }
}

fn check_dims(a: &DwMatrix, b: &DwMatrix, c: &DwMatrix) -> Result<()> {
    if a.cols != b.rows || c.rows != a.rows || c.cols != b.cols {
        return Err(Error::Usage(format!(
            "shape mismatch: {}x{} * {}x{} into {}x{}",
            a.rows, a.cols, b.rows, b.cols, c.rows, c.cols
        )));
    }
    Ok(())
}

#[inline(always)]
fn kernel<const ALGO: u8, const NM: bool, const NA: bool, const MS: bool>(a: &DwMatrix, b: &DwMatrix, c: &mut DwMatrix) {
    let cfg = VariantConfig {
        add_algo: match ALGO {
            0 => AddAlgorithm::Sloppy,
            1 => AddAlgorithm::Accurate,
            _ => AddAlgorithm::AccurateDirected,
        },
        normalize_mul: NM,
        normalize_add: NA,
        include_ll: false,
        two_sum_impl: if MS { TwoSumImpl::MagnitudeSelect } else { TwoSumImpl::Standard },
    };
    let (n, k) = (b.cols, a.cols);
    for i in 0..a.rows {
        let (ch, cl) = (&mut c.hi[i * n..(i + 1) * n], &mut c.lo[i * n..(i + 1) * n]);
        for p in 0..k {
            let x = DoubleWord::new(a.hi[i * k + p], a.lo[i * k + p]);
            let (bh, bl) = (&b.hi[p * n..(p + 1) * n], &b.lo[p * n..(p + 1) * n]);
            for j in 0..n {
                let r = maa(&mut Native, x, DoubleWord::new(bh[j], bl[j]), DoubleWord::new(ch[j], cl[j]), &cfg);
                ch[j] = r.hi;
                cl[j] = r.lo;
            }
        }
    }
}

/// `C <- A·B + C`, one MAA per multiply-add, accumulating over the inner
/// dimension in increasing order.
pub fn gemm_soa(cfg: &VariantConfig, a: &DwMatrix, b: &DwMatrix, c: &mut DwMatrix) -> Result<()> {
    check_dims(a, b, c)?;
    if cfg.include_ll {
        gemm_naive(cfg, a, b, c)?;
        return Ok(());
    }
    let ms = cfg.two_sum_impl == TwoSumImpl::MagnitudeSelect;
    macro_rules! go {
        ($algo:literal) => {
            match (cfg.normalize_mul, cfg.normalize_add, ms) {
                (false, false, false) => kernel::<$algo, false, false, false>(a, b, c),
                (false, false, true) => kernel::<$algo, false, false, true>(a, b, c),
                (false, true, false) => kernel::<$algo, false, true, false>(a, b, c),
                (false, true, true) => kernel::<$algo, false, true, true>(a, b, c),
                (true, false, false) => kernel::<$algo, true, false, false>(a, b, c),
                (true, false, true) => kernel::<$algo, true, false, true>(a, b, c),
                (true, true, false) => kernel::<$algo, true, true, false>(a, b, c),
                (true, true, true) => kernel::<$algo, true, true, true>(a, b, c),
            }
        };
    }
    match cfg.add_algo {
        AddAlgorithm::Sloppy => go!(0),
        AddAlgorithm::Accurate => go!(1),
        AddAlgorithm::AccurateDirected => go!(2),
    }
    Ok(())
}

/// Reference triple loop over array-of-structures entries.
pub fn gemm_naive(cfg: &VariantConfig, a: &DwMatrix, b: &DwMatrix, c: &mut DwMatrix) -> Result<()> {
    check_dims(a, b, c)?;
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = c.get(i, j);
            for p in 0..a.cols {
                acc = maa(&mut Native, a.get(i, p), b.get(p, j), acc, cfg);
            }
            c.hi[i * c.cols + j] = acc.hi;
            c.lo[i * c.cols + j] = acc.lo;
        }
    }
    Ok(())
}

/// Above this many bytes of operands the matrices are unlikely to stay in cache.
pub const CACHE_LIMIT_BYTES: usize = 4 << 20;
pub const DEFAULT_WARMUPS: usize = 10;
pub const DEFAULT_REPS: usize = 100;
/// Overrides the repetition count (warm-ups never drop below one).
pub const REPS_ENV: &str = "DWARITH_BENCH_REPS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub variant: VariantConfig,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub warmups: usize,
    pub reps: usize,
    pub best_seconds: f64,
    /// Double-word multiply-adds per second in the best repetition.
    pub maa_per_second: f64,
    /// `2mnk / t`.
    pub gflops: f64,
    /// `gflops` weighted by the additions and comparisons of one MAA.
    pub gflops_double: f64,
    pub ops: OpCount,
}

/// Repetitions from the environment override, else `reps`.
pub fn reps_from_env(reps: usize) -> Result<usize> {
    match std::env::var(REPS_ENV) {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&r| r > 0).ok_or_else(|| Error::Usage(format!("{REPS_ENV}={v:?} is not a positive integer"))),
        Err(_) => Ok(reps),
    }
}

/// Times `C <- A·B + C` on random cache-resident matrices. The kernel output
/// is first compared bit for bit with the naive loop.
pub fn gemm_dw(cfg: &VariantConfig, m: usize, n: usize, k: usize, reps: usize, seed: u64) -> Result<BenchResult> {
    if m == 0 || n == 0 || k == 0 || reps == 0 {
        return Err(Error::Usage("gemm dimensions and repetitions must be positive".into()));
    }
    let elems = m
        .checked_mul(k)
        .and_then(|ak| k.checked_mul(n).and_then(|bk| m.checked_mul(n).and_then(|cn| ak.checked_add(bk)?.checked_add(cn))))
        .ok_or_else(|| Error::Usage(format!("dimensions {m}x{n}x{k} overflow")))?;
    let bytes = elems.checked_mul(16).ok_or_else(|| Error::Usage(format!("dimensions {m}x{n}x{k} overflow")))?;
    if bytes > CACHE_LIMIT_BYTES {
        return Err(Error::Usage(format!(
            "{m}x{n}x{k} needs {bytes} bytes of operands, above the {CACHE_LIMIT_BYTES}-byte cache-residency limit"
        )));
    }
    let mut rng = crate::lab::rng_for(seed, 90);
    let a = DwMatrix::random(m, k, &mut rng);
    let b = DwMatrix::random(k, n, &mut rng);
    let c0 = DwMatrix::random(m, n, &mut rng);

    let mut fast = c0.clone();
    gemm_soa(cfg, &a, &b, &mut fast)?;
    let mut slow = c0.clone();
    gemm_naive(cfg, &a, &b, &mut slow)?;
    if fast.bits() != slow.bits() {
        return Err(Error::ContractViolation("SoA kernel disagrees with the reference loop".into()));
    }

    let warmups = DEFAULT_WARMUPS.min(reps).max(1);
    let mut c = c0.clone();
    for _ in 0..warmups {
        c.hi.copy_from_slice(&c0.hi);
        c.lo.copy_from_slice(&c0.lo);
        gemm_soa(cfg, &a, &b, &mut c)?;
    }
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        c.hi.copy_from_slice(&c0.hi);
        c.lo.copy_from_slice(&c0.lo);
        let t = Instant::now();
        gemm_soa(cfg, &a, &b, &mut c)?;
        best = best.min(t.elapsed().as_secs_f64());
        std::hint::black_box(&c);
    }
    let best = best.max(1e-9);
    let maa_per_second = (m * n * k) as f64 / best;
    let ops = count_ops(cfg);
    let gflops = 2.0 * maa_per_second / 1e9;
    Ok(BenchResult {
        variant: *cfg,
        m,
        n,
        k,
        warmups,
        reps,
        best_seconds: best,
        maa_per_second,
        gflops,
        gflops_double: gflops * ops.weight() as f64,
        ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dw::gamma_bound;
    use crate::fp::Dyadic;

    #[test]
    fn counts_of_named_rows() {
        let acc = VariantConfig::default();
        assert_eq!(count_ops(&acc), OpCount { comparisons: 0, additions: 26, multiplications: 4 });
        let fast = VariantConfig::new(AddAlgorithm::Sloppy, false, true, TwoSumImpl::Standard);
        assert_eq!(count_ops(&fast), OpCount { comparisons: 0, additions: 14, multiplications: 4 });
        let pair = VariantConfig::new(AddAlgorithm::Sloppy, false, false, TwoSumImpl::MagnitudeSelect);
        assert_eq!(count_ops(&pair), OpCount { comparisons: 2, additions: 8, multiplications: 4 });
        assert_eq!(count_dot2_ops(TwoSumImpl::Standard), OpCount { comparisons: 0, additions: 9, multiplications: 2 });
        assert_eq!(count_dot2_ops(TwoSumImpl::MagnitudeSelect), OpCount { comparisons: 2, additions: 6, multiplications: 2 });
        assert_eq!(table1().len(), 14);
    }

    #[test]
    fn one_by_one_is_a_single_maa() {
        let mut rng = crate::lab::rng_for(3, 0);
        for cfg in VariantConfig::table1_rows() {
            let (a, b, c0) = (DwMatrix::random(1, 1, &mut rng), DwMatrix::random(1, 1, &mut rng), DwMatrix::random(1, 1, &mut rng));
            let mut c = c0.clone();
            gemm_soa(&cfg, &a, &b, &mut c).unwrap();
            let want = maa(&mut Native, a.get(0, 0), b.get(0, 0), c0.get(0, 0), &cfg);
            assert_eq!((c.hi[0].to_bits(), c.lo[0].to_bits()), (want.hi.to_bits(), want.lo.to_bits()));
        }
    }

    #[test]
    fn soa_matches_naive_8x8x8() {
        let mut rng = crate::lab::rng_for(4, 0);
        let (a, b, c0) = (DwMatrix::random(8, 8, &mut rng), DwMatrix::random(8, 8, &mut rng), DwMatrix::random(8, 8, &mut rng));
        for cfg in VariantConfig::table1_rows() {
            let (mut x, mut y) = (c0.clone(), c0.clone());
            gemm_soa(&cfg, &a, &b, &mut x).unwrap();
            gemm_naive(&cfg, &a, &b, &mut y).unwrap();
            assert_eq!(x.bits(), y.bits(), "{cfg}");
        }
        assert!(gemm_soa(&VariantConfig::default(), &a, &DwMatrix::zeros(7, 8), &mut c0.clone()).is_err());
    }

    #[test]
    fn gemm_guards() {
        let cfg = VariantConfig::default();
        assert!(matches!(gemm_dw(&cfg, 0, 1, 1, 1, 0), Err(Error::Usage(_))));
        assert!(matches!(gemm_dw(&cfg, usize::MAX, 2, 2, 1, 0), Err(Error::Usage(_))));
        assert!(matches!(gemm_dw(&cfg, 1024, 1024, 1024, 1, 0), Err(Error::Usage(_))));
        let r = gemm_dw(&cfg, 4, 4, 4, 3, 0).unwrap();
        assert_eq!((r.reps, r.warmups, r.ops.additions), (3, 3, 26));
        assert!(r.gflops > 0.0);
    }

    #[test]
    fn dot2_small_cases() {
        let r = dot2_compensated(&[1.0], &[1.0]).unwrap();
        assert_eq!((r.s, r.t), (1.0, 0.0));
        assert!(dot2_compensated(&[1.0, 2.0], &[1.0]).is_err());
        assert!(dot2_compensated(&[], &[]).is_err());
    }

    #[test]
    fn dot2_ill_conditioned() {
        // x·y summed in both signs: huge terms cancel, the small ones survive
        let mut rng = crate::lab::rng_for(5, 0);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..50 {
            let x = rng.random_range(1.0..2.0) * 2f64.powi(rng.random_range(-20..20));
            let y = rng.random_range(1.0..2.0) * 2f64.powi(rng.random_range(-20..20));
            a.extend([x, x]);
            b.extend([y, -y * (1.0 + 2f64.powi(-40))]);
        }
        let exact = a.iter().zip(&b).fold(Dyadic::zero(), |s, (&x, &y)| {
            s + Dyadic::from_f64(x).unwrap() * Dyadic::from_f64(y).unwrap()
        });
        let abs_sum = a.iter().zip(&b).map(|(x, y)| (x * y).abs()).sum::<f64>();
        let r = dot2_compensated(&a, &b).unwrap();
        let got = r.s + r.t;
        let u = 2f64.powi(-53);
        let cond = abs_sum / exact.to_f64().abs();
        assert!(cond > 1e10, "cond {cond:e}");
        let err = (Dyadic::from_f64(got).unwrap() - &exact).abs().to_f64();
        let bound = u * exact.to_f64().abs() + gamma_bound(a.len() as u64, u).unwrap().powi(2) * abs_sum;
        assert!(err <= bound, "{err:e} > {bound:e}");
        // plain summation loses most of the digits
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((naive - exact.to_f64()).abs() > 1e3 * err.max(f64::MIN_POSITIVE));
    }
}
