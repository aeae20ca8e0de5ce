//! Thin row/column driver over `rustfft` for 1-D and 2-D square grids.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

/// Unnormalized in-place DFT of an `n^dim` row-major array.
pub(crate) fn transform(data: &mut [Complex64], dim: usize, n: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    });
    fft.process(data);
    if dim == 2 {
        transpose_square(data, n);
        fft.process(data);
        transpose_square(data, n);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
