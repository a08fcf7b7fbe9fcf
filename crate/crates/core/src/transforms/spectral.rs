//! DCT-II, DST-I and DHT computed through a complex FFT.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spectral {
    Dct2,
    Dst1,
    Dht,
}

/// Reusable FFT plan plus buffers for one spectral transform of length `n`.
pub struct SpectralKernel {
    which: Spectral,
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    /// DCT-II post-rotation `e^{-i pi k / 2n}`.
    twiddles: Vec<Complex<f64>>,
}

impl SpectralKernel {
    pub fn new(which: Spectral, n: usize) -> Self {
        let fft_len = match which {
            Spectral::Dct2 | Spectral::Dht => n,
            Spectral::Dst1 => 2 * (n + 1),
        };
        let fft = FftPlanner::new().plan_fft_forward(fft_len);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        let twiddles = match which {
            Spectral::Dct2 => (0..n)
                .map(|k| Complex::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
                .collect(),
            _ => Vec::new(),
        };
        SpectralKernel {
            which,
            n,
            fft,
            buf: vec![Complex::default(); fft_len],
            scratch,
            twiddles,
        }
    }

    pub fn run(&mut self, x: &[f64], out: &mut [f64]) {
        match self.which {
            Spectral::Dct2 => self.dct2(x, out),
            Spectral::Dst1 => self.dst1(x, out),
            Spectral::Dht => self.dht(x, out),
        }
    }

    // Even samples forward, odd samples reversed, then one n-point FFT.
    fn dct2(&mut self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (i, &v) in x.iter().enumerate() {
            let slot = if i % 2 == 0 { i / 2 } else { n - 1 - i / 2 };
            self.buf[slot] = Complex::new(v, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let dc = (1.0 / n as f64).sqrt();
        let ac = (2.0 / n as f64).sqrt();
        for k in 0..n {
            let v = (self.buf[k] * self.twiddles[k]).re;
            out[k] = v * if k == 0 { dc } else { ac };
        }
    }

    // Odd extension [0, x, 0, -rev(x)] of length 2(n+1).
    fn dst1(&mut self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let m = self.buf.len();
        self.buf[0] = Complex::default();
        self.buf[n + 1] = Complex::default();
        for (i, &v) in x.iter().enumerate() {
            self.buf[i + 1] = Complex::new(v, 0.0);
            self.buf[m - 1 - i] = Complex::new(-v, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = (2.0 / (n + 1) as f64).sqrt() * 0.5;
        for k in 0..n {
            out[k] = -self.buf[k + 1].im * scale;
        }
    }

    fn dht(&mut self, x: &[f64], out: &mut [f64]) {
        for (b, &v) in self.buf.iter_mut().zip(x) {
            *b = Complex::new(v, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / (self.n as f64).sqrt();
        for (o, c) in out.iter_mut().zip(&self.buf) {
            *o = (c.re - c.im) * scale;
        }
    }
}
