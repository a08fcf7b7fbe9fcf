//! Timing of fast transform paths against dense matrix-vector products.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::{mat_vec, TransformKind, TransformPlan};

/// Agreement required between the two paths before anything is timed.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub kind: TransformKind,
    pub n: usize,
    pub padded: usize,
    pub max_abs_diff: f64,
    pub fast_median_ns: f64,
    pub fast_mad_ns: f64,
    pub naive_median_ns: f64,
    pub naive_mad_ns: f64,
    pub speedup: f64,
    /// Leading-order operation counts, e.g. `N^2 = 16777216`.
    pub naive_ops: String,
    pub fast_ops: String,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median and median absolute deviation.
pub fn median_mad(samples: &[f64]) -> (f64, f64) {
    let mut v = samples.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = v.iter().map(|x| (x - med).abs()).collect();
    (med, median(&mut dev))
}

fn op_counts(kind: TransformKind, n: usize) -> (String, String) {
    let log = (n as f64).log2();
    let naive = format!("N^2 = {}", n * n);
    let fast = match kind {
        TransformKind::Random { .. } => format!("N^2 = {} (dense)", n * n),
        k if k.is_wavelet() => format!("N = {n} (times filter length)"),
        _ => format!("N log2 N = {:.0}", n as f64 * log),
    };
    (naive, fast)
}

fn time_ns(mut f: impl FnMut()) -> f64 {
    let start = Instant::now();
    f();
    start.elapsed().as_nanos() as f64
}

/// Checks and times one `(kind, n)` pair over `reps` repetitions.
pub fn bench_one(kind: TransformKind, n: usize, reps: usize, seed: u64) -> Result<BenchRow> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("bench sizes must be >= 4, got {n}")));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("repetitions must be >= 1".into()));
    }
    let plan = TransformPlan::new(kind, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();

    let fast = plan.apply_fast(&x)?;
    let naive = plan.apply_naive(&x)?;
    let max_abs_diff = fast
        .iter()
        .zip(&naive)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(max_abs_diff < CHECK_TOLERANCE) {
        return Err(Error::Numeric(format!(
            "{kind} at N = {n}: fast and naive paths differ by {max_abs_diff:e}"
        )));
    }

    // Both sides get their setup (plan buffers, explicit matrix) outside the clock.
    let mut exec = plan.executor();
    let mut out = vec![0.0; plan.output_dim];
    let mut padded = x.clone();
    padded.resize(plan.padded_dim, 0.0);
    let w = plan.matrix();
    exec.run(&x, &mut out);
    let _ = mat_vec(&w, &padded);

    let mut fast_t = Vec::with_capacity(reps);
    let mut naive_t = Vec::with_capacity(reps);
    for _ in 0..reps {
        fast_t.push(time_ns(|| {
            exec.run(std::hint::black_box(&x), &mut out);
            std::hint::black_box(&out);
        }));
        naive_t.push(time_ns(|| {
            std::hint::black_box(mat_vec(&w, std::hint::black_box(&padded)));
        }));
    }
    let (fast_median_ns, fast_mad_ns) = median_mad(&fast_t);
    let (naive_median_ns, naive_mad_ns) = median_mad(&naive_t);
    let (naive_ops, fast_ops) = op_counts(kind, plan.padded_dim);
    Ok(BenchRow {
        kind,
        n,
        padded: plan.padded_dim,
        max_abs_diff,
        fast_median_ns,
        fast_mad_ns,
        naive_median_ns,
        naive_mad_ns,
        speedup: naive_median_ns / fast_median_ns.max(1.0),
        naive_ops,
        fast_ops,
    })
}

pub fn run(kinds: &[TransformKind], sizes: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(kinds.len() * sizes.len());
    for &kind in kinds {
        for &n in sizes {
            rows.push(bench_one(kind, n, reps, seed)?);
        }
    }
    Ok(rows)
}

pub fn table(rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>6} {:>14} {:>12} {:>14} {:>12} {:>9}  {:<22} {}",
        "transform", "N", "fast med ns", "fast MAD", "naive med ns", "naive MAD", "speedup", "naive ops", "fast ops"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>6} {:>14.0} {:>12.0} {:>14.0} {:>12.0} {:>8.1}x  {:<22} {}",
            r.kind.label(),
            r.n,
            r.fast_median_ns,
            r.fast_mad_ns,
            r.naive_median_ns,
            r.naive_mad_ns,
            r.speedup,
            r.naive_ops,
            r.fast_ops
        );
    }
    s
}
