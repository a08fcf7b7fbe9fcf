//! Deterministic linear transforms used as the untrained block of each layer.
//!
//! Every kind has two paths: a fast kernel ([`TransformPlan::apply_fast`]) and
//! an explicit O(N²) matrix ([`TransformPlan::apply_naive`]) built from the
//! closed-form basis. The two are kept independent so one checks the other.
//!
//! Conventions:
//! - all spectral transforms are orthonormal (DCT-II, DST-I, DHT and FWHT use 1/√N scaling);
//! - FWHT and Haar zero-pad the input to the next power of two;
//! - wavelets are periodized, run `floor(log2 N)` levels and emit
//!   `[a_L, d_L, ..., d_1]`, so the output length equals the input length.

mod dense;
mod fwht;
mod kind;
mod spectral;
pub mod wavelet;

use nalgebra::DMatrix;

pub use dense::sign_changes;
pub use fwht::{fwht_in_place, sequency_permutation};
pub use kind::{bag_default, TransformKind};

use crate::error::{Error, Result};
use spectral::{Spectral, SpectralKernel};
use wavelet::FilterBank;

/// Sizes of one transform application. Immutable and cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TransformPlan {
    pub kind: TransformKind,
    pub input_dim: usize,
    pub padded_dim: usize,
    pub output_dim: usize,
    /// Decomposition depth; zero for non-wavelet kinds.
    pub wavelet_levels: usize,
}

/// Plans `kind` for inputs of length `input_dim`.
pub fn plan(kind: TransformKind, input_dim: usize) -> Result<TransformPlan> {
    TransformPlan::new(kind, input_dim)
}

/// The explicit `output_dim × padded_dim` matrix of `kind` at size `n`.
pub fn transform_matrix(kind: TransformKind, n: usize) -> Result<DMatrix<f64>> {
    Ok(plan(kind, n)?.matrix())
}

impl TransformPlan {
    pub fn new(kind: TransformKind, input_dim: usize) -> Result<Self> {
        if input_dim < 2 {
            return Err(Error::dim(format!(
                "{kind} needs an input of length at least 2, got {input_dim}"
            )));
        }
        let padded_dim = if kind.needs_power_of_two() {
            input_dim.next_power_of_two()
        } else {
            input_dim
        };
        let wavelet_levels = if kind.is_wavelet() {
            padded_dim.ilog2() as usize
        } else {
            0
        };
        Ok(TransformPlan {
            kind,
            input_dim,
            padded_dim,
            output_dim: padded_dim,
            wavelet_levels,
        })
    }

    /// Levels run by the wavelet cascade (Haar goes all the way down).
    fn cascade_levels(&self) -> usize {
        match self.kind {
            TransformKind::Haar => self.padded_dim.ilog2() as usize,
            _ => self.wavelet_levels,
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::dim(format!(
                "{} planned for length {}, got {}",
                self.kind,
                self.input_dim,
                x.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite input at index {i} to {}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Reusable executor holding plans and scratch space.
    pub fn executor(&self) -> Executor {
        let kernel = match self.kind {
            TransformKind::FwhtNatural => Kernel::Fwht { order: None },
            TransformKind::FwhtSequency => Kernel::Fwht {
                order: Some(sequency_permutation(self.padded_dim)),
            },
            TransformKind::Dct2 => Kernel::Spectral(SpectralKernel::new(Spectral::Dct2, self.padded_dim)),
            TransformKind::Dst1 => Kernel::Spectral(SpectralKernel::new(Spectral::Dst1, self.padded_dim)),
            TransformKind::Dht => Kernel::Spectral(SpectralKernel::new(Spectral::Dht, self.padded_dim)),
            TransformKind::Random { seed } => Kernel::Dense(dense::random(seed, self.padded_dim)),
            kind => Kernel::Wavelet {
                bank: FilterBank::for_kind(kind).expect("wavelet kind"),
                levels: self.cascade_levels(),
            },
        };
        Executor {
            plan: *self,
            kernel,
            buf: vec![0.0; self.padded_dim],
            scratch: vec![0.0; self.padded_dim],
        }
    }

    /// Fast-path transform of one vector.
    pub fn apply_fast(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.output_dim];
        self.executor().run(x, &mut out);
        Ok(out)
    }

    /// Reference path: explicit matrix times the zero-padded input.
    pub fn apply_naive(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(mat_vec(&self.matrix(), x))
    }

    /// The explicit transform matrix, `output_dim × padded_dim`.
    pub fn matrix(&self) -> DMatrix<f64> {
        dense::build(self)
    }

    /// Transforms every column of `m` (`input_dim × J`) with the fast path.
    pub fn apply_columns(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.input_dim {
            return Err(Error::dim(format!(
                "{} planned for {} rows, matrix has {}",
                self.kind,
                self.input_dim,
                m.nrows()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite input to {}", self.kind)));
        }
        let cols = m.ncols();
        let mut out = vec![0.0; self.output_dim * cols];
        let mut exec = self.executor();
        for (x, y) in m
            .as_slice()
            .chunks_exact(self.input_dim)
            .zip(out.chunks_exact_mut(self.output_dim))
        {
            exec.run(x, y);
        }
        Ok(DMatrix::from_vec(self.output_dim, cols, out))
    }

    /// Synthesis for the invertible wavelet kinds (every level length even).
    pub fn inverse_wavelet(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let bank = FilterBank::for_kind(self.kind)
            .ok_or_else(|| Error::InvalidParameter(format!("{} is not a wavelet", self.kind)))?;
        if coeffs.len() != self.output_dim {
            return Err(Error::dim(format!(
                "expected {} coefficients, got {}",
                self.output_dim,
                coeffs.len()
            )));
        }
        wavelet::inverse(&bank, self.cascade_levels(), coeffs)
    }
}

/// `w · x` where `x` is implicitly zero-padded to `w.ncols()`.
pub(crate) fn mat_vec(w: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; w.nrows()];
    for (j, &v) in x.iter().enumerate() {
        if v != 0.0 {
            for (o, &c) in out.iter_mut().zip(w.column(j).iter()) {
                *o += c * v;
            }
        }
    }
    out
}

enum Kernel {
    Fwht { order: Option<Vec<usize>> },
    Spectral(SpectralKernel),
    Wavelet { bank: FilterBank, levels: usize },
    Dense(DMatrix<f64>),
}

/// Fast transform of one plan, reused across many vectors.
pub struct Executor {
    plan: TransformPlan,
    kernel: Kernel,
    buf: Vec<f64>,
    scratch: Vec<f64>,
}

impl Executor {
    pub fn plan(&self) -> &TransformPlan {
        &self.plan
    }

    /// Writes the transform of `x` (length `input_dim`) into `out` (length `output_dim`).
    ///
    /// Inputs are assumed validated; lengths are only debug-checked.
    pub fn run(&mut self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.plan.input_dim);
        debug_assert_eq!(out.len(), self.plan.output_dim);
        self.buf[..x.len()].copy_from_slice(x);
        self.buf[x.len()..].iter_mut().for_each(|v| *v = 0.0);
        match &mut self.kernel {
            Kernel::Fwht { order } => {
                fwht_in_place(&mut self.buf);
                let scale = 1.0 / (self.buf.len() as f64).sqrt();
                match order {
                    None => {
                        for (o, v) in out.iter_mut().zip(&self.buf) {
                            *o = v * scale;
                        }
                    }
                    Some(perm) => {
                        for (o, &p) in out.iter_mut().zip(perm.iter()) {
                            *o = self.buf[p] * scale;
                        }
                    }
                }
            }
            Kernel::Spectral(k) => k.run(&self.buf, out),
            Kernel::Wavelet { bank, levels } => {
                wavelet::forward(bank, *levels, &mut self.buf, &mut self.scratch);
                out.copy_from_slice(&self.buf);
            }
            Kernel::Dense(w) => out.copy_from_slice(&mat_vec(w, &self.buf)),
        }
    }
}
