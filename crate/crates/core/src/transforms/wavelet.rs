//! Periodized multi-level wavelet filter banks.
//!
//! Analysis at one level of length `m` produces `ceil(m/2)` approximation and
//! `floor(m/2)` detail coefficients by circular correlation with the analysis
//! filters, so the total coefficient count never changes. The final layout is
//! `[a_L, d_L, d_{L-1}, ..., d_1]`.

use crate::error::{Error, Result};

use super::TransformKind;

/// Scaling filter (reconstruction low-pass) of db4.
const DB4: [f64; 8] = [
    0.23037781330889651,
    0.71484657055291567,
    0.63088076792985892,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.032883011666885197,
    -0.010597401785069032,
];

/// Scaling filter (reconstruction low-pass) of db20.
const DB20: [f64; 40] = [
    0.00077995361366684629,
    0.010549394624950399,
    0.063423780459081522,
    0.21994211355139703,
    0.47269618531090168,
    0.61049323893859386,
    0.36150229873933104,
    -0.13921208801148388,
    -0.32678680043403496,
    -0.016727088309077008,
    0.22829105081991632,
    0.039850246457771202,
    -0.15545875070726795,
    -0.024716827338613585,
    0.10229171917444256,
    0.0056322468573074356,
    -0.061722899624680458,
    0.0058746818118118266,
    0.03229429953076958,
    -0.0087893249239015606,
    -0.01381052613715192,
    0.006721627302259457,
    0.0044205423870457908,
    -0.0035814942596096226,
    -0.00083156217282255693,
    0.0013925596193231364,
    -5.3497598439976948e-05,
    -0.00038510474869921763,
    0.00010153288973670291,
    6.7742808283777301e-05,
    -3.7105861833947128e-05,
    -4.3761438621839971e-06,
    7.2412482876736205e-06,
    -1.0119940100188862e-06,
    -6.8470795970005574e-07,
    2.6339242262700013e-07,
    2.0143220235505126e-10,
    -1.814843248299696e-08,
    4.0561270555518328e-09,
    -2.9988364896193194e-10,
];

const SYM2: [f64; 4] = [
    0.48296291314469025,
    0.83651630373746899,
    0.22414386804185735,
    -0.12940952255092145,
];

const COIF1: [f64; 6] = [
    -0.07273261951252645,
    0.33789766245748182,
    0.85257202021160039,
    0.38486484686485778,
    -0.07273261951252645,
    -0.015655728135791993,
];

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const B13: f64 = 0.088388347648318447;

/// Analysis and synthesis filters, both in correlation form and sharing one
/// index origin, so that synthesis is `x[(2k+i) mod m] += a[k] lo[i] + d[k] hi[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub analysis_lo: Vec<f64>,
    pub analysis_hi: Vec<f64>,
    pub synthesis_lo: Vec<f64>,
    pub synthesis_hi: Vec<f64>,
}

impl FilterBank {
    /// Orthogonal bank from a scaling filter `h`: `g[i] = (-1)^i h[L-1-i]`.
    fn orthogonal(h: &[f64]) -> Self {
        let len = h.len();
        let g: Vec<f64> = (0..len)
            .map(|i| if i % 2 == 0 { h[len - 1 - i] } else { -h[len - 1 - i] })
            .collect();
        FilterBank {
            analysis_lo: h.to_vec(),
            analysis_hi: g.clone(),
            synthesis_lo: h.to_vec(),
            synthesis_hi: g,
        }
    }

    pub fn for_kind(kind: TransformKind) -> Option<Self> {
        let bank = match kind {
            TransformKind::Haar | TransformKind::Rbior1_1 => FilterBank::orthogonal(&[R2, R2]),
            TransformKind::Db4 => FilterBank::orthogonal(&DB4),
            TransformKind::Db20 => FilterBank::orthogonal(&DB20),
            TransformKind::Sym2 => FilterBank::orthogonal(&SYM2),
            TransformKind::Coif1 => FilterBank::orthogonal(&COIF1),
            TransformKind::Bior1_3 => FilterBank {
                analysis_lo: vec![-B13, B13, R2, R2, B13, -B13],
                analysis_hi: vec![0.0, 0.0, R2, -R2, 0.0, 0.0],
                synthesis_lo: vec![0.0, 0.0, R2, R2, 0.0, 0.0],
                synthesis_hi: vec![-B13, -B13, R2, -R2, B13, B13],
            },
            _ => return None,
        };
        Some(bank)
    }
}

/// One analysis level on `x[..m]`, writing `[a | d]` into `out[..m]`.
fn analyze_level(bank: &FilterBank, x: &[f64], out: &mut [f64], m: usize) {
    let na = m.div_ceil(2);
    let nd = m / 2;
    let lo = &bank.analysis_lo;
    let hi = &bank.analysis_hi;
    let taps = lo.len();
    for k in 0..na {
        let start = 2 * k;
        let (mut a, mut d) = (0.0, 0.0);
        if start + taps <= m {
            let window = &x[start..start + taps];
            for i in 0..taps {
                a += lo[i] * window[i];
                d += hi[i] * window[i];
            }
        } else {
            for i in 0..taps {
                let v = x[(start + i) % m];
                a += lo[i] * v;
                d += hi[i] * v;
            }
        }
        out[k] = a;
        if k < nd {
            out[na + k] = d;
        }
    }
}

/// Forward multi-level transform in place; `scratch` must hold at least `buf.len()` values.
pub fn forward(bank: &FilterBank, levels: usize, buf: &mut [f64], scratch: &mut [f64]) {
    let mut m = buf.len();
    for _ in 0..levels {
        if m < 2 {
            break;
        }
        analyze_level(bank, buf, scratch, m);
        buf[..m].copy_from_slice(&scratch[..m]);
        m = m.div_ceil(2);
    }
}

/// Lengths of the signal entering each analysis level.
pub fn level_lengths(n: usize, levels: usize) -> Vec<usize> {
    let mut lens = Vec::with_capacity(levels);
    let mut m = n;
    for _ in 0..levels {
        lens.push(m);
        m = m.div_ceil(2);
    }
    lens
}

/// Inverse of [`forward`] through the synthesis filters.
///
/// Only defined when every level length is even; odd levels drop information.
pub fn inverse(bank: &FilterBank, levels: usize, coeffs: &[f64]) -> Result<Vec<f64>> {
    let lens = level_lengths(coeffs.len(), levels);
    if let Some(&odd) = lens.iter().find(|&&m| m % 2 != 0) {
        return Err(Error::dim(format!(
            "wavelet synthesis needs even lengths at every level, found {odd}"
        )));
    }
    let mut buf = coeffs.to_vec();
    let mut rebuilt = vec![0.0; coeffs.len()];
    let taps = bank.synthesis_lo.len();
    for &m in lens.iter().rev() {
        let half = m / 2;
        rebuilt[..m].iter_mut().for_each(|v| *v = 0.0);
        for k in 0..half {
            let a = buf[k];
            let d = buf[half + k];
            for i in 0..taps {
                rebuilt[(2 * k + i) % m] += a * bank.synthesis_lo[i] + d * bank.synthesis_hi[i];
            }
        }
        buf[..m].copy_from_slice(&rebuilt[..m]);
    }
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_scaling_filters_are_normalized() {
        for kind in [
            TransformKind::Db4,
            TransformKind::Db20,
            TransformKind::Sym2,
            TransformKind::Coif1,
        ] {
            let bank = FilterBank::for_kind(kind).unwrap();
            let sum: f64 = bank.analysis_lo.iter().sum();
            let energy: f64 = bank.analysis_lo.iter().map(|v| v * v).sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12, "{kind}: sum {sum}");
            assert!((energy - 1.0).abs() < 1e-12, "{kind}: energy {energy}");
            // The high-pass kills constants.
            let hsum: f64 = bank.analysis_hi.iter().sum();
            assert!(hsum.abs() < 1e-12, "{kind}: highpass sum {hsum}");
        }
    }

    #[test]
    fn two_point_haar_level() {
        let bank = FilterBank::for_kind(TransformKind::Haar).unwrap();
        let mut buf = [3.0, 1.0];
        let mut scratch = [0.0; 2];
        forward(&bank, 1, &mut buf, &mut scratch);
        assert!((buf[0] - 4.0 * R2).abs() < 1e-15);
        assert!((buf[1] - 2.0 * R2).abs() < 1e-15);
    }

    #[test]
    fn odd_length_keeps_count() {
        assert_eq!(level_lengths(13, 3), vec![13, 7, 4]);
        let bank = FilterBank::for_kind(TransformKind::Db4).unwrap();
        let mut buf: Vec<f64> = (0..13).map(|i| i as f64).collect();
        let mut scratch = vec![0.0; 13];
        forward(&bank, 3, &mut buf, &mut scratch);
        assert_eq!(buf.len(), 13);
        assert!(inverse(&bank, 3, &buf).is_err());
    }

    #[test]
    fn reconstruction_on_even_levels() {
        for kind in [TransformKind::Db20, TransformKind::Bior1_3, TransformKind::Coif1] {
            let bank = FilterBank::for_kind(kind).unwrap();
            let x: Vec<f64> = (0..32).map(|i| ((i * 7 % 11) as f64).sin()).collect();
            let mut buf = x.clone();
            let mut scratch = vec![0.0; 32];
            forward(&bank, 5, &mut buf, &mut scratch);
            let back = inverse(&bank, 5, &buf).unwrap();
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() < 1e-10, "{kind}");
            }
        }
    }
}
