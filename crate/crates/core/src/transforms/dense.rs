//! Explicit transform matrices.
//!
//! These are built from closed-form basis definitions (or, for wavelets, by
//! composing dense per-level analysis matrices) and never call the fast
//! kernels, so they can check them.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::wavelet::{level_lengths, FilterBank};
use super::{TransformKind, TransformPlan};

pub fn build(plan: &TransformPlan) -> DMatrix<f64> {
    let n = plan.padded_dim;
    match plan.kind {
        TransformKind::Dct2 => DMatrix::from_fn(n, n, |k, j| {
            let c = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            c * (PI * (2 * j + 1) as f64 * k as f64 / (2 * n) as f64).cos()
        }),
        TransformKind::Dst1 => {
            let c = (2.0 / (n + 1) as f64).sqrt();
            DMatrix::from_fn(n, n, |k, j| {
                c * (PI * ((j + 1) * (k + 1)) as f64 / (n + 1) as f64).sin()
            })
        }
        TransformKind::Dht => {
            let c = 1.0 / (n as f64).sqrt();
            DMatrix::from_fn(n, n, |k, j| {
                // Reduce k*j mod n before the trig call to keep the argument small.
                let theta = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                c * (theta.cos() + theta.sin())
            })
        }
        TransformKind::FwhtNatural => hadamard(n),
        TransformKind::FwhtSequency => {
            let h = hadamard(n);
            let mut rows: Vec<usize> = (0..n).collect();
            rows.sort_by_key(|&r| sign_changes(h.row(r).iter().copied()));
            DMatrix::from_fn(n, n, |i, j| h[(rows[i], j)])
        }
        TransformKind::Haar => haar(n),
        TransformKind::Random { seed } => random(seed, n),
        kind => {
            let bank = FilterBank::for_kind(kind).expect("wavelet kind");
            cascade(&bank, n, plan.wavelet_levels)
        }
    }
}

pub fn sign_changes(row: impl Iterator<Item = f64>) -> usize {
    let mut count = 0;
    let mut prev: Option<bool> = None;
    for v in row {
        let pos = v > 0.0;
        if prev.is_some_and(|p| p != pos) {
            count += 1;
        }
        prev = Some(pos);
    }
    count
}

fn hadamard(n: usize) -> DMatrix<f64> {
    let c = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |i, j| {
        if (i & j).count_ones() % 2 == 0 {
            c
        } else {
            -c
        }
    })
}

/// Haar basis from its box functions: row 0 is the constant, then for each
/// scale (coarsest first) the shifted +/- steps.
fn haar(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    let c0 = 1.0 / (n as f64).sqrt();
    w.row_mut(0).fill(c0);
    let mut row = 1;
    let mut support = n;
    while support >= 2 {
        let count = n / support;
        let amp = 1.0 / (support as f64).sqrt();
        for k in 0..count {
            let start = k * support;
            for j in start..start + support / 2 {
                w[(row, j)] = amp;
            }
            for j in start + support / 2..start + support {
                w[(row, j)] = -amp;
            }
            row += 1;
        }
        support /= 2;
    }
    w
}

/// Dense per-level analysis matrix for a signal of length `m`.
fn level_matrix(bank: &FilterBank, m: usize) -> DMatrix<f64> {
    let na = m.div_ceil(2);
    let nd = m / 2;
    let mut a = DMatrix::zeros(m, m);
    for k in 0..na {
        for (i, &h) in bank.analysis_lo.iter().enumerate() {
            a[(k, (2 * k + i) % m)] += h;
        }
    }
    for k in 0..nd {
        for (i, &g) in bank.analysis_hi.iter().enumerate() {
            a[(na + k, (2 * k + i) % m)] += g;
        }
    }
    a
}

fn cascade(bank: &FilterBank, n: usize, levels: usize) -> DMatrix<f64> {
    let mut w = DMatrix::<f64>::identity(n, n);
    for m in level_lengths(n, levels) {
        let top = level_matrix(bank, m) * w.rows(0, m);
        w.rows_mut(0, m).copy_from(&top);
    }
    w
}

/// i.i.d. standard normal entries scaled by 1/sqrt(n), drawn row by row from ChaCha8.
pub fn random(seed: u64, n: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v: f64 = StandardNormal.sample(&mut rng);
            w[(i, j)] = v * scale;
        }
    }
    w
}
