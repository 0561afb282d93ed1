//! Multi-dimensional complex FFT over row-major grid buffers.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::GridSpec;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized in-place transform along every axis of `grid`.
pub(crate) fn fft_nd(grid: GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.n();
    debug_assert_eq!(data.len(), grid.total());
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));

    let total = data.len();
    let mut lanes = Vec::new();
    for axis in 0..grid.dims() {
        let stride = n.pow((grid.dims() - 1 - axis) as u32);
        if stride == 1 {
            fft.process(data);
            continue;
        }
        // gather strided lanes into contiguous rows, transform, scatter back
        lanes.resize(total, Complex64::default());
        let block = n * stride;
        let mut row = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let dst = &mut lanes[row * n..(row + 1) * n];
                for (j, d) in dst.iter_mut().enumerate() {
                    *d = data[base + j * stride];
                }
                row += 1;
            }
        }
        fft.process(&mut lanes);
        let mut row = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let src = &lanes[row * n..(row + 1) * n];
                for (j, s) in src.iter().enumerate() {
                    data[base + j * stride] = *s;
                }
                row += 1;
            }
        }
    }
}
