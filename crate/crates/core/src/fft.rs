//! Three-dimensional FFTs on the zero-padded `(2n)³` lattice.
//!
//! Densities occupy only the `n³` corner of the padded array and only that
//! corner of a convolution is ever read back, so the forward and inverse
//! passes skip the lines that are known to be zero or are never used.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub(crate) struct PaddedFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl PaddedFft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let m = 2 * n;
        Self {
            n,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub(crate) fn padded(&self) -> usize {
        2 * self.n
    }

    pub(crate) fn volume(&self) -> usize {
        let m = self.padded();
        m * m * m
    }

    fn lines(&self, fft: &dyn Fft<f64>, data: &mut [Complex<f64>], axis: usize, limit: [usize; 2]) {
        let m = self.padded();
        let (stride, outer_stride, inner_stride) = match axis {
            0 => (m * m, m, 1),
            1 => (m, m * m, 1),
            _ => (1, m * m, m),
        };
        let mut line = vec![Complex::new(0.0, 0.0); m];
        let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for a in 0..limit[0] {
            for b in 0..limit[1] {
                let base = a * outer_stride + b * inner_stride;
                if stride == 1 {
                    fft.process_with_scratch(&mut data[base..base + m], &mut scratch);
                    continue;
                }
                for (t, x) in line.iter_mut().enumerate() {
                    *x = data[base + t * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (t, x) in line.iter().enumerate() {
                    data[base + t * stride] = *x;
                }
            }
        }
    }

    /// Unnormalised forward transform of an arbitrary padded array.
    pub(crate) fn forward_full(&self, data: &mut [Complex<f64>]) {
        let m = self.padded();
        let f = Arc::clone(&self.forward);
        self.lines(f.as_ref(), data, 2, [m, m]);
        self.lines(f.as_ref(), data, 1, [m, m]);
        self.lines(f.as_ref(), data, 0, [m, m]);
    }

    /// Forward transform of an array whose support lies in the `n³` corner.
    pub(crate) fn forward_corner(&self, data: &mut [Complex<f64>]) {
        let (n, m) = (self.n, self.padded());
        let f = Arc::clone(&self.forward);
        // axis 2: only lines with i, j < n are nonzero
        self.lines(f.as_ref(), data, 2, [n, n]);
        // axis 1: planes i < n
        self.lines(f.as_ref(), data, 1, [n, m]);
        self.lines(f.as_ref(), data, 0, [m, m]);
    }

    /// Unnormalised inverse transform; only the `n³` corner of the result is valid.
    pub(crate) fn inverse_corner(&self, data: &mut [Complex<f64>]) {
        let (n, m) = (self.n, self.padded());
        let f = Arc::clone(&self.inverse);
        self.lines(f.as_ref(), data, 0, [m, m]);
        self.lines(f.as_ref(), data, 1, [n, m]);
        self.lines(f.as_ref(), data, 2, [n, n]);
    }
}
