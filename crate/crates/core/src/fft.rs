//! Minimal 2D complex FFT on a square buffer, built on rustfft.
//!
//! Rows are transformed independently (in parallel when enabled), the buffer
//! is transposed, rows are transformed again and the buffer transposed back.
//! The inverse is unnormalized; callers divide by `size^2`.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::par;

pub(crate) struct Fft2 {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    pub fn forward(&self, buf: &mut [Complex<f64>]) {
        self.pass(buf, true);
    }

    pub fn inverse(&self, buf: &mut [Complex<f64>]) {
        self.pass(buf, false);
    }

    fn pass(&self, buf: &mut [Complex<f64>], forward: bool) {
        debug_assert_eq!(buf.len(), self.size * self.size);
        let fft = if forward { &self.fwd } else { &self.inv };
        self.rows(buf, fft);
        transpose_square(buf, self.size);
        self.rows(buf, fft);
        transpose_square(buf, self.size);
    }

    fn rows(&self, buf: &mut [Complex<f64>], fft: &Arc<dyn Fft<f64>>) {
        let scratch_len = fft.get_inplace_scratch_len();
        par::for_each_chunk_mut(buf, self.size, |_, row| {
            let mut scratch = vec![Complex::new(0.0, 0.0); scratch_len];
            fft.process_with_scratch(row, &mut scratch);
        });
    }
}

fn transpose_square(buf: &mut [Complex<f64>], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
