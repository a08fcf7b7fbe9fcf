//! Unsupervised choice of the transform for a new layer.
//!
//! Every candidate in the bag is run through the layer's transform block
//! (transform, prune, normalize) and scored; the lowest `sc1` wins.
//!
//! - Method 1 scores the spread (population std) of the per-node standard deviations.
//! - Method 2 correlates the network input with the block output, takes the
//!   singular values of that correlation matrix, and counts how many
//!   components (as a percentage of `K`) are needed to reach a `gamma`
//!   fraction of the singular value mass. Ties prefer the larger mass at that
//!   index, then bag order.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{part2_forward, row_variances, HyperParams, Method};
use crate::transforms::TransformKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub kind: TransformKind,
    pub sc1: f64,
    /// Method 2 tie-breaker; 0 under method 1.
    pub sc2: f64,
    pub kept_nodes: usize,
    /// Every node was pruned; the candidate was skipped.
    pub degenerate: bool,
}

/// Population standard deviation of the per-row standard deviations.
pub fn method1_score(z2: &DMatrix<f64>) -> Result<f64> {
    if z2.nrows() == 0 {
        return Err(Error::EmptyLayer);
    }
    if z2.ncols() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: z2.ncols(),
        });
    }
    let sigmas: Vec<f64> = row_variances(z2).into_iter().map(f64::sqrt).collect();
    let m = sigmas.len() as f64;
    let mean = sigmas.iter().sum::<f64>() / m;
    let var = sigmas.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / m;
    Ok(var.sqrt())
}

/// Rows centered and scaled so that `A·Bᵀ` of two such matrices is the Pearson
/// correlation. Zero-variance rows become zero.
fn standardized_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let j = m.ncols() as f64;
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let mean = row.sum() / j;
        row.add_scalar_mut(-mean);
        let norm = row.norm();
        if norm > 0.0 && norm.is_finite() && norm > 1e-14 * (mean.abs() * j.sqrt()).max(1e-300) {
            row /= norm;
        } else {
            row.fill(0.0);
        }
    }
    out
}

fn correlation_from_standardized(xs: &DMatrix<f64>, zs: &DMatrix<f64>) -> DMatrix<f64> {
    let zt = zs.transpose();
    xs * zt
}

/// Pearson correlation between every input feature (rows of `x`) and every
/// block node (rows of `z2`), `P × M'`.
pub fn correlation_matrix(x: &DMatrix<f64>, z2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != z2.ncols() {
        return Err(Error::dim(format!(
            "{} input samples vs {} node samples",
            x.ncols(),
            z2.ncols()
        )));
    }
    if x.ncols() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: x.ncols(),
        });
    }
    Ok(correlation_from_standardized(
        &standardized_rows(x),
        &standardized_rows(z2),
    ))
}

/// Cumulative normalized singular values of `r`, length `min(P, M')`.
///
/// The second value is `true` when every singular value is zero, in which
/// case the curve is all ones.
pub fn cumulative_singular(r: &DMatrix<f64>) -> Result<(Vec<f64>, bool)> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite correlation entry".into()));
    }
    let k = r.nrows().min(r.ncols());
    if k == 0 {
        return Err(Error::EmptyLayer);
    }
    let mut sv: Vec<f64> = r.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut acc = 0.0;
    let mut cum: Vec<f64> = sv
        .iter()
        .map(|s| {
            acc += s;
            acc
        })
        .collect();
    if acc <= 0.0 {
        return Ok((vec![1.0; k], true));
    }
    cum.iter_mut().for_each(|c| *c /= acc);
    *cum.last_mut().unwrap() = 1.0;
    Ok((cum, false))
}

/// `(sc1, sc2)` from a cumulative curve: first 1-based index reaching `gamma`.
pub fn scores_from_curve(curve: &[f64], gamma: f64) -> (f64, f64) {
    let idx = curve.iter().position(|&c| c >= gamma).unwrap_or(curve.len() - 1);
    let sc1 = 100.0 * (idx + 1) as f64 / curve.len() as f64;
    (sc1, curve[idx])
}

/// Method 2 score of block output `z2` against network input `x`.
pub fn method2_score(x: &DMatrix<f64>, z2: &DMatrix<f64>, gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    let r = correlation_matrix(x, z2)?;
    let (curve, _) = cumulative_singular(&r)?;
    Ok(scores_from_curve(&curve, gamma))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be in [0, 1], got {gamma}"
        )));
    }
    Ok(())
}

/// `Less` when `a` beats `b`. Remaining ties are left to bag order.
fn compare(a: &SelectionScore, b: &SelectionScore, method: Method) -> Ordering {
    let by_sc1 = a.sc1.partial_cmp(&b.sc1).unwrap_or(Ordering::Equal);
    match method {
        Method::Method2 => by_sc1.then(b.sc2.partial_cmp(&a.sc2).unwrap_or(Ordering::Equal)),
        _ => by_sc1,
    }
}

/// Picks the transform for the layer fed by `y_prev`, given network input `x`.
///
/// Candidates are scored in bag order and the winner is reduced in that
/// order too, so the choice is deterministic. Degenerate candidates are
/// reported but never chosen.
pub fn select_transform(
    bag: &[TransformKind],
    y_prev: &DMatrix<f64>,
    x: &DMatrix<f64>,
    hp: &HyperParams,
) -> Result<(TransformKind, Vec<SelectionScore>)> {
    if bag.is_empty() {
        return Err(Error::InvalidParameter("transform bag is empty".into()));
    }
    let method = match hp.method {
        Method::Method1 | Method::Method2 => hp.method,
        // Fixed and random runs do not select; score with method 2 for reporting.
        _ => Method::Method2,
    };
    if method == Method::Method2 {
        check_gamma(hp.gamma)?;
    }
    if x.ncols() != y_prev.ncols() {
        return Err(Error::dim("input and layer sample counts differ"));
    }
    let xs = (method == Method::Method2).then(|| standardized_rows(x));

    let mut scores = Vec::with_capacity(bag.len());
    for &kind in bag {
        let z2 = match part2_forward(kind, y_prev, hp.eta_var) {
            Ok((z2, _, _)) => z2,
            Err(Error::DegenerateLayer(_)) => {
                scores.push(SelectionScore {
                    kind,
                    sc1: 0.0,
                    sc2: 0.0,
                    kept_nodes: 0,
                    degenerate: true,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let (sc1, sc2) = match &xs {
            Some(xs) => {
                let r = correlation_from_standardized(xs, &standardized_rows(&z2));
                let (curve, _) = cumulative_singular(&r)?;
                scores_from_curve(&curve, hp.gamma)
            }
            None => (method1_score(&z2)?, 0.0),
        };
        log::debug!("  candidate {kind}: sc1 {sc1:.4}, sc2 {sc2:.6}, nodes {}", z2.nrows());
        scores.push(SelectionScore {
            kind,
            sc1,
            sc2,
            kept_nodes: z2.nrows(),
            degenerate: false,
        });
    }

    let mut best: Option<&SelectionScore> = None;
    for s in scores.iter().filter(|s| !s.degenerate) {
        if best.is_none_or(|b| compare(s, b, method) == Ordering::Less) {
            best = Some(s);
        }
    }
    let chosen = best.ok_or(Error::SelectionImpossible)?.kind;
    Ok((chosen, scores))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method1_examples() {
        // Rows with identical spread.
        let z = DMatrix::from_row_slice(2, 4, &[1.0, -1.0, 1.0, -1.0, 2.0, 0.0, 2.0, 0.0]);
        assert!(method1_score(&z).unwrap().abs() < 1e-15);
        // Per-row sigmas {1, 3} give a spread of 1.
        let z = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 3.0, -3.0]);
        assert!((method1_score(&z).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            method1_score(&DMatrix::zeros(0, 3)),
            Err(Error::EmptyLayer)
        ));
    }

    #[test]
    fn identity_curve() {
        let (c, degenerate) = cumulative_singular(&DMatrix::identity(3, 3)).unwrap();
        assert!(!degenerate);
        for (a, b) in c.iter().zip([1.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let (c, _) = cumulative_singular(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(scores_from_curve(&c, 0.8), (100.0, 1.0));
        assert_eq!(scores_from_curve(&c, 0.0).0, 25.0);
    }

    #[test]
    fn rank_one_curve() {
        let u = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, -1.0]);
        let v = DMatrix::from_row_slice(1, 5, &[0.5, 1.0, 0.0, -2.0, 1.0]);
        let (c, _) = cumulative_singular(&(u * v)).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let (sc1, sc2) = scores_from_curve(&c, 1.0);
        assert!((sc1 - 100.0 / 3.0).abs() < 1e-12 && (sc2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_correlation_is_flagged() {
        let (c, degenerate) = cumulative_singular(&DMatrix::zeros(2, 4)).unwrap();
        assert!(degenerate);
        assert_eq!(c, vec![1.0, 1.0]);
    }

    #[test]
    fn self_correlation_diagonal() {
        let x = DMatrix::from_fn(3, 20, |i, j| ((i * 20 + j) as f64 * 0.7).sin());
        let r = correlation_matrix(&x, &x).unwrap();
        for i in 0..3 {
            assert!((r[(i, i)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_feature_gives_zero_row() {
        let mut x = DMatrix::from_fn(2, 10, |i, j| ((i * 10 + j) as f64).cos());
        x.row_mut(1).fill(4.0);
        let r = correlation_matrix(&x, &x).unwrap();
        assert_eq!(r.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
    }

    #[test]
    fn singleton_bag_wins() {
        let y = DMatrix::from_fn(4, 12, |i, j| ((i * 12 + j) as f64 * 0.3).sin());
        let hp = HyperParams::default();
        let (kind, scores) = select_transform(&[TransformKind::Sym2], &y, &y, &hp).unwrap();
        assert_eq!(kind, TransformKind::Sym2);
        assert_eq!(scores.len(), 1);
    }

    #[test]
    fn ties_follow_bag_order() {
        // Haar and rbior1.1 share filters and, on a power-of-two input, levels.
        let y = DMatrix::from_fn(8, 30, |i, j| ((i * 30 + j) as f64 * 0.13).sin());
        for method in [Method::Method1, Method::Method2] {
            let hp = HyperParams {
                method,
                ..HyperParams::default()
            };
            let bag = [TransformKind::Rbior1_1, TransformKind::Haar];
            let (kind, s) = select_transform(&bag, &y, &y, &hp).unwrap();
            assert_eq!(s[0].sc1, s[1].sc1);
            assert_eq!(kind, TransformKind::Rbior1_1);
        }
    }

    #[test]
    fn all_degenerate_is_an_error() {
        let y = DMatrix::from_element(4, 10, 1.0);
        let hp = HyperParams::default();
        assert!(matches!(
            select_transform(&[TransformKind::Dct2], &y, &y, &hp),
            Err(Error::SelectionImpossible)
        ));
    }
}
