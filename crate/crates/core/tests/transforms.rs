//! Transform kernels against closed forms written out here, plus energy and
//! reconstruction properties.

use std::f64::consts::PI;

use dtnet::transforms::{bag_default, plan, TransformKind};
use proptest::prelude::*;

fn dct2_direct(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    (0..x.len())
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * (PI * (i as f64 + 0.5) * k as f64 / n).cos())
                .sum();
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            scale * s
        })
        .collect()
}

fn dst1_direct(x: &[f64]) -> Vec<f64> {
    let m = x.len() as f64 + 1.0;
    (1..=x.len())
        .map(|k| {
            (2.0 / m).sqrt()
                * x.iter()
                    .enumerate()
                    .map(|(i, v)| v * (PI * (i + 1) as f64 * k as f64 / m).sin())
                    .sum::<f64>()
        })
        .collect()
}

fn dht_direct(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    (0..x.len())
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| {
                    let a = 2.0 * PI * (i * k) as f64 / n;
                    v * (a.cos() + a.sin())
                })
                .sum::<f64>()
                / n.sqrt()
        })
        .collect()
}

/// Sylvester construction `H_{2n} = [[H, H], [H, -H]]`.
fn sylvester(n: usize) -> Vec<Vec<f64>> {
    let mut h = vec![vec![1.0]];
    while h.len() < n {
        let m = h.len();
        let mut next = vec![vec![0.0; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

#[test]
fn spectral_kinds_match_textbook_sums() {
    for n in [2, 3, 7, 16, 45] {
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) as f64).sin()).collect();
        let pairs: [(TransformKind, fn(&[f64]) -> Vec<f64>); 3] = [
            (TransformKind::Dct2, dct2_direct),
            (TransformKind::Dst1, dst1_direct),
            (TransformKind::Dht, dht_direct),
        ];
        for (kind, oracle) in pairs {
            let got = plan(kind, n).unwrap().apply_fast(&x).unwrap();
            assert!(max_diff(&got, &oracle(&x)) < 1e-10, "{kind} at {n}");
        }
    }
}

#[test]
fn natural_hadamard_matches_sylvester() {
    let n = 32;
    let h = sylvester(n);
    let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
    let want: Vec<f64> = h
        .iter()
        .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / (n as f64).sqrt())
        .collect();
    let got = plan(TransformKind::FwhtNatural, n).unwrap().apply_fast(&x).unwrap();
    assert!(max_diff(&got, &want) < 1e-12);
}

#[test]
fn sequency_rows_have_increasing_sign_changes() {
    let n = 16;
    let w = plan(TransformKind::FwhtSequency, n).unwrap().matrix();
    for (s, row) in w.row_iter().enumerate() {
        let changes = row
            .iter()
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|p| p[0].signum() != p[1].signum())
            .count();
        assert_eq!(changes, s);
    }
}

#[test]
fn haar_on_four_points() {
    let r = 0.5;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = [1.0, 2.0, 3.0, 4.0];
    // Rows: scaling, coarse wavelet, two fine wavelets.
    let want = [
        r * 10.0,
        r * (1.0 + 2.0 - 3.0 - 4.0),
        s * (1.0 - 2.0),
        s * (3.0 - 4.0),
    ];
    let got = plan(TransformKind::Haar, 4).unwrap().apply_fast(&x).unwrap();
    assert!(max_diff(&got, &want) < 1e-14, "{got:?}");
}

#[test]
fn plan_sizes() {
    let p = plan(TransformKind::FwhtNatural, 6).unwrap();
    assert_eq!((p.padded_dim, p.output_dim), (8, 8));
    let p = plan(TransformKind::Dct2, 10).unwrap();
    assert_eq!((p.padded_dim, p.output_dim), (10, 10));
    assert_eq!(plan(TransformKind::Db20, 256).unwrap().wavelet_levels, 8);
    assert!(plan(TransformKind::Dct2, 1).is_err());
}

#[test]
fn random_kind_is_seeded() {
    let a = plan(TransformKind::Random { seed: 3 }, 9).unwrap().matrix();
    let b = plan(TransformKind::Random { seed: 3 }, 9).unwrap().matrix();
    let c = plan(TransformKind::Random { seed: 4 }, 9).unwrap().matrix();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_equals_naive(n in 2usize..80, seed in any::<u64>(), k in 0usize..13) {
        let kind = if k == 12 { TransformKind::Random { seed } } else { bag_default()[k] };
        let x: Vec<f64> = (0..n).map(|i| ((i as u64 ^ seed) as f64 * 1e-3).sin()).collect();
        let p = plan(kind, n).unwrap();
        let fast = p.apply_fast(&x).unwrap();
        prop_assert_eq!(fast.len(), p.output_dim);
        prop_assert!(max_diff(&fast, &p.apply_naive(&x).unwrap()) < 1e-9);
    }

    #[test]
    fn orthonormal_kinds_keep_energy(x in (2usize..70).prop_flat_map(vector), k in 0usize..12) {
        let kind = bag_default()[k];
        prop_assume!(kind.is_orthonormal());
        let y = plan(kind, x.len()).unwrap().apply_fast(&x).unwrap();
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ey: f64 = y.iter().map(|v| v * v).sum();
        prop_assert!((ex - ey).abs() <= 1e-9 * ex.max(1.0));
    }

    #[test]
    fn wavelets_reconstruct(x in (1u32..8).prop_flat_map(|e| vector(1 << e)), k in 0usize..12) {
        let kind = bag_default()[k];
        prop_assume!(kind.is_wavelet() && x.len() >= 2);
        let p = plan(kind, x.len()).unwrap();
        let back = p.inverse_wavelet(&p.apply_fast(&x).unwrap()).unwrap();
        prop_assert!(max_diff(&back, &x) < 1e-9);
    }

    #[test]
    fn transforms_are_linear(x in vector(24), y in vector(24), a in -3.0..3.0f64, k in 0usize..12) {
        let p = plan(bag_default()[k], 24).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + v).collect();
        let lhs = p.apply_fast(&mix).unwrap();
        let rhs: Vec<f64> = p
            .apply_fast(&x)
            .unwrap()
            .iter()
            .zip(p.apply_fast(&y).unwrap())
            .map(|(u, v)| a * u + v)
            .collect();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-9);
    }
}
